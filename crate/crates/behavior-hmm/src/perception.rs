//! Position measurements -> velocity estimates -> event-based symbols.
//!
//! A constant-velocity Kalman filter smooths noisy (x, y) measurements into
//! a velocity estimate. The event detector watches the velocity heading and
//! emits one discrete symbol per completed direction change: the cumulative
//! signed heading change since the last event must exceed a trigger angle
//! and the heading rate must have stayed low for a few consecutive samples,
//! so a sweeping turn produces exactly one symbol once it settles.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PerceptionError {
    #[error("measurement time {time} does not advance past {last_time}")]
    NonMonotonicTime { time: f64, last_time: f64 },
    #[error("non-finite measurement ({x}, {y})")]
    NonFiniteMeasurement { x: f64, y: f64 },
}

/// Process / measurement noise magnitudes for the tracking filter.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Process acceleration sigma, m/s^2.
    pub accel_sigma: f64,
    /// Position measurement sigma, m.
    pub position_sigma: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams { accel_sigma: 0.2, position_sigma: 0.05 }
    }
}

/// Kalman estimate of agent position and velocity; state order [x, y, vx, vy].
#[derive(Debug, Clone)]
pub struct TrackState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub covariance: [[f64; 4]; 4],
    pub last_time: f64,
}

impl TrackState {
    /// Starts a track at the first measurement with zero velocity and unit
    /// prior covariance.
    pub fn initialize(x: f64, y: f64, time: f64) -> Self {
        let mut covariance = [[0.0; 4]; 4];
        for (i, row) in covariance.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        TrackState { x, y, vx: 0.0, vy: 0.0, covariance, last_time: time }
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    /// Velocity heading in degrees, in (-180, 180].
    pub fn heading_deg(&self) -> f64 {
        wrap_angle_deg(self.vy.atan2(self.vx).to_degrees())
    }

    /// Constant-velocity predict to `time`, then position update.
    pub fn update(
        &mut self,
        meas: (f64, f64),
        time: f64,
        noise: NoiseParams,
    ) -> Result<(), PerceptionError> {
        if !(meas.0.is_finite() && meas.1.is_finite()) {
            return Err(PerceptionError::NonFiniteMeasurement { x: meas.0, y: meas.1 });
        }
        if time <= self.last_time {
            return Err(PerceptionError::NonMonotonicTime { time, last_time: self.last_time });
        }
        let dt = time - self.last_time;

        // Predict.
        let mut x = [
            self.x + self.vx * dt,
            self.y + self.vy * dt,
            self.vx,
            self.vy,
        ];
        let f = [
            [1.0, 0.0, dt, 0.0],
            [0.0, 1.0, 0.0, dt],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let q_pos = noise.accel_sigma.powi(2) * dt.powi(4) / 4.0;
        let q_cross = noise.accel_sigma.powi(2) * dt.powi(3) / 2.0;
        let q_vel = noise.accel_sigma.powi(2) * dt.powi(2);
        let q = [
            [q_pos, 0.0, q_cross, 0.0],
            [0.0, q_pos, 0.0, q_cross],
            [q_cross, 0.0, q_vel, 0.0],
            [0.0, q_cross, 0.0, q_vel],
        ];
        let fp = mat4_mul(&f, &self.covariance);
        let mut p = mat4_mul(&fp, &mat4_transpose(&f));
        for i in 0..4 {
            for j in 0..4 {
                p[i][j] += q[i][j];
            }
        }

        // Update with H = [I2 0]. R is floored: a singular measurement
        // covariance makes the velocity gain ring, alternating the heading
        // estimate sample to sample even on exact data.
        let r = noise.position_sigma.max(1e-3).powi(2);
        let s = [
            [p[0][0] + r, p[0][1]],
            [p[1][0], p[1][1] + r],
        ];
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let s_inv = [
            [s[1][1] / det, -s[0][1] / det],
            [-s[1][0] / det, s[0][0] / det],
        ];
        // K = P H^T S^-1, a 4x2 gain.
        let mut k = [[0.0; 2]; 4];
        for i in 0..4 {
            for j in 0..2 {
                k[i][j] = p[i][0] * s_inv[0][j] + p[i][1] * s_inv[1][j];
            }
        }
        let innovation = [meas.0 - x[0], meas.1 - x[1]];
        for i in 0..4 {
            x[i] += k[i][0] * innovation[0] + k[i][1] * innovation[1];
        }
        // P = (I - K H) P, then symmetrize.
        let mut ikh = [[0.0; 4]; 4];
        for (i, row) in ikh.iter_mut().enumerate() {
            row[i] = 1.0;
            row[0] -= k[i][0];
            row[1] -= k[i][1];
        }
        let mut p_new = mat4_mul(&ikh, &p);
        for i in 0..4 {
            for j in (i + 1)..4 {
                let avg = 0.5 * (p_new[i][j] + p_new[j][i]);
                p_new[i][j] = avg;
                p_new[j][i] = avg;
            }
        }

        self.x = x[0];
        self.y = x[1];
        self.vx = x[2];
        self.vy = x[3];
        self.covariance = p_new;
        self.last_time = time;
        Ok(())
    }
}

fn mat4_mul(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut sum = 0.0;
            for (l, row) in b.iter().enumerate() {
                sum += a[i][l] * row[j];
            }
            out[i][j] = sum;
        }
    }
    out
}

fn mat4_transpose(a: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Wraps an angle in degrees into (-180, 180].
pub fn wrap_angle_deg(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

/// Turn-angle quantizer and event-trigger thresholds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuantizerConfig {
    /// Number of equal turn-angle bins, centered on multiples of 360/n_bins.
    pub n_bins: usize,
    /// Minimum cumulative heading change (degrees) to arm an event.
    pub trigger_angle: f64,
    /// Heading rate (degrees/second) below which the heading counts as settled.
    pub settle_rate: f64,
    /// Consecutive settled samples required before an armed event emits.
    pub settle_samples: usize,
    /// Samples slower than this (m/s) are ignored.
    pub min_speed: f64,
    /// Valid samples swallowed before arming, while the track's velocity
    /// estimate converges from its uninformative start. Without this the
    /// initial heading swing reads as one large spurious turn.
    pub warmup_samples: usize,
    /// Seconds the heading must stay settled after a turn before the event
    /// is finalized. The filtered heading keeps creeping toward its final
    /// value after the rate first drops below `settle_rate`; holding lets
    /// the turn angle be read plateau-to-plateau instead of mid-decay,
    /// which cuts the per-event angle error severalfold.
    pub hold_time: f64,
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        QuantizerConfig {
            n_bins: 8,
            trigger_angle: 30.0,
            settle_rate: 12.0,
            settle_samples: 5,
            min_speed: 0.05,
            warmup_samples: 15,
            hold_time: 6.0,
        }
    }
}

/// Maps a turn angle in (-180, 180] to its bin. Bins are centered on
/// multiples of the bin width (so a nominal 90-degree turn sits mid-bin,
/// never on a boundary); boundaries belong to the upper bin, and the bin
/// centered at 180 wraps across the branch cut.
pub fn symbol_for_angle(angle_deg: f64, n_bins: usize) -> usize {
    let width = 360.0 / n_bins as f64;
    let idx = (angle_deg / width + 0.5).floor() as i64;
    idx.rem_euclid(n_bins as i64) as usize
}

/// Center angle of a bin, in (-180, 180].
pub fn bin_center_deg(symbol: usize, n_bins: usize) -> f64 {
    wrap_angle_deg(symbol as f64 * 360.0 / n_bins as f64)
}

/// One emitted observation symbol with its raw turn angle for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationEvent {
    pub timestamp: f64,
    pub symbol: usize,
    pub turn_angle: f64,
}

/// Stateful turn-event detector over a stream of track updates.
///
/// The detector measures turn angles plateau-to-plateau: a turn begins when
/// the heading deviates from its last settled value by more than the
/// trigger angle, and is finalized once the heading has settled again and
/// stayed settled for `hold_time` seconds (or as soon as the next turn
/// begins, whichever comes first). Reading the angle between two settled
/// plateaus instead of at the moment the rate first dips keeps the measured
/// angle within a couple of degrees of the true turn.
#[derive(Debug, Clone)]
pub struct EventDetector {
    config: QuantizerConfig,
    reference_set: bool,
    warmup_remaining: usize,
    prev_heading: f64,
    prev_time: f64,
    /// Heading unwrapped across the branch cut; never reset.
    unwrapped: f64,
    /// Recent (time, unwrapped heading) pairs for the settle test.
    window: VecDeque<(f64, f64)>,
    /// Settled heading before the current turn; `None` until the track has
    /// settled once after warm-up.
    base: Option<f64>,
    /// Whether a turn is in progress (deviation from base passed trigger).
    turning: bool,
    /// Time the deviation first crossed the trigger angle; emitted events
    /// carry this onset time, not the later settle time.
    onset_time: Option<f64>,
    /// Latest settled heading observed within the current turn.
    turn_plateau: Option<f64>,
    /// When the current turn most recently became settled.
    settled_since: Option<f64>,
}

impl EventDetector {
    pub fn new(config: QuantizerConfig) -> Self {
        EventDetector {
            config,
            reference_set: false,
            warmup_remaining: config.warmup_samples,
            prev_heading: 0.0,
            prev_time: 0.0,
            unwrapped: 0.0,
            window: VecDeque::new(),
            base: None,
            turning: false,
            onset_time: None,
            turn_plateau: None,
            settled_since: None,
        }
    }

    pub fn config(&self) -> &QuantizerConfig {
        &self.config
    }

    /// Finalizes the pending turn at plateau heading `plateau`. Returns the
    /// event, or `None` when the accumulated deviation retreated below the
    /// trigger (a jitter blip, not a turn).
    fn finalize(&mut self, plateau: f64) -> Option<ObservationEvent> {
        let base = self.base.expect("finalize only runs with a baseline");
        let turn_angle = wrap_angle_deg(plateau - base);
        let timestamp = self.onset_time.take();
        self.base = Some(plateau);
        self.turning = false;
        self.turn_plateau = None;
        self.settled_since = None;
        if turn_angle.abs() <= self.config.trigger_angle {
            return None;
        }
        Some(ObservationEvent {
            timestamp: timestamp.unwrap_or(self.prev_time),
            symbol: symbol_for_angle(turn_angle, self.config.n_bins),
            turn_angle,
        })
    }

    /// Feeds one track sample; returns an event when a direction change has
    /// completed and settled.
    pub fn process(&mut self, track: &TrackState) -> Option<ObservationEvent> {
        if track.speed() < self.config.min_speed {
            return None;
        }
        let heading = track.heading_deg();
        let time = track.last_time;
        if self.warmup_remaining > 0 {
            self.warmup_remaining -= 1;
            self.prev_heading = heading;
            self.prev_time = time;
            self.reference_set = true;
            return None;
        }
        if !self.reference_set {
            self.reference_set = true;
            self.prev_heading = heading;
            self.prev_time = time;
            return None;
        }
        let dt = time - self.prev_time;
        if dt <= 0.0 {
            return None;
        }
        let delta = wrap_angle_deg(heading - self.prev_heading);
        self.unwrapped += delta;
        self.prev_heading = heading;
        self.prev_time = time;

        // Settle test: mean heading rate across the last settle_samples
        // samples. Differencing adjacent samples would multiply heading
        // noise by the sample rate; the windowed mean cancels jitter while
        // still reading high throughout a real turn.
        self.window.push_back((time, self.unwrapped));
        while self.window.len() > self.config.settle_samples + 1 {
            self.window.pop_front();
        }
        let (settled, win_rate) = if self.window.len() == self.config.settle_samples + 1 {
            let (t0, h0) = self.window[0];
            let rate = (self.unwrapped - h0) / (time - t0);
            (rate.abs() < self.config.settle_rate, rate)
        } else {
            (false, 0.0)
        };

        let base = match self.base {
            None => {
                // Wait for the initial heading to settle before arming.
                if settled {
                    self.base = Some(self.unwrapped);
                }
                return None;
            }
            Some(base) => base,
        };

        if !self.turning {
            let dev = self.unwrapped - base;
            // Onset fires on accumulated deviation, or early on a clearly
            // turning rate: freezing the baseline as soon as the rate rises
            // keeps the turn's slow leading edge (the track filter ramps up
            // gradually) from being absorbed into the baseline.
            let fast = win_rate.abs() > 2.0 * self.config.settle_rate
                && dev.abs() > 0.4 * self.config.trigger_angle
                && dev.signum() == win_rate.signum();
            if dev.abs() > self.config.trigger_angle || fast {
                self.turning = true;
                self.onset_time = Some(time);
            } else if settled {
                // Track slow drift with a damped update so the next turn is
                // measured against the heading just before it starts. A
                // direct assignment here would ratchet a turn's leading edge
                // into the baseline a sample at a time and bias every
                // measured angle low.
                self.base = Some(base + 0.15 * dev);
            }
            return None;
        }

        // A turn is pending.
        if settled {
            // Average the plateau over the settled stretch instead of
            // trusting the latest sample: a point estimate at the stretch
            // boundary inherits whatever jitter or early next-turn creep
            // happened to land there.
            let plateau = match self.turn_plateau {
                None => self.unwrapped,
                Some(p) => p + 0.25 * (self.unwrapped - p),
            };
            self.turn_plateau = Some(plateau);
            let since = *self.settled_since.get_or_insert(time);
            if time - since >= self.config.hold_time {
                return self.finalize(plateau);
            }
        } else {
            self.settled_since = None;
            if let Some(plateau) = self.turn_plateau {
                if (self.unwrapped - plateau).abs() > self.config.trigger_angle {
                    // The next turn began before the hold expired: finalize
                    // the pending one at its plateau and arm the new turn.
                    let event = self.finalize(plateau);
                    self.turning = true;
                    self.onset_time = Some(time);
                    return event;
                }
            }
        }
        None
    }

    /// Flushes a pending turn at end of stream, using the best available
    /// plateau (the heading may still be creeping when the data ends).
    pub fn finish(&mut self) -> Option<ObservationEvent> {
        if self.turning && self.base.is_some() {
            let plateau = self.turn_plateau.unwrap_or(self.unwrapped);
            self.finalize(plateau)
        } else {
            None
        }
    }
}

/// Full pipeline: timestamped positions -> Kalman track -> turn events.
pub fn events_from_positions(
    samples: &[(f64, f64, f64)],
    noise: NoiseParams,
    quantizer: QuantizerConfig,
) -> Result<Vec<ObservationEvent>, PerceptionError> {
    let mut events = Vec::new();
    let mut track: Option<TrackState> = None;
    let mut detector = EventDetector::new(quantizer);
    for &(t, x, y) in samples {
        match track.as_mut() {
            None => {
                if !(x.is_finite() && y.is_finite()) {
                    return Err(PerceptionError::NonFiniteMeasurement { x, y });
                }
                track = Some(TrackState::initialize(x, y, t));
            }
            Some(track) => {
                track.update((x, y), t, noise)?;
                if let Some(event) = detector.process(track) {
                    events.push(event);
                }
            }
        }
    }
    if let Some(event) = detector.finish() {
        events.push(event);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_symmetry_error(p: &[[f64; 4]; 4]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((p[i][j] - p[j][i]).abs());
            }
        }
        worst
    }

    #[test]
    fn stationary_track_velocity_stays_small() {
        let mut track = TrackState::initialize(0.0, 0.0, 0.0);
        for k in 1..=100 {
            track.update((0.0, 0.0), k as f64 * 0.1, NoiseParams::default()).unwrap();
        }
        assert!(track.speed() < 0.01, "speed = {}", track.speed());
    }

    #[test]
    fn constant_velocity_converges() {
        let mut track = TrackState::initialize(0.0, 0.0, 0.0);
        for k in 1..=50 {
            let t = k as f64 * 0.1;
            track.update((t * 1.0, 0.0), t, NoiseParams::default()).unwrap();
        }
        assert!((track.vx - 1.0).abs() < 0.02, "vx = {}", track.vx);
        assert!(track.vy.abs() < 0.02, "vy = {}", track.vy);
    }

    #[test]
    fn update_rejects_non_monotonic_time() {
        let mut track = TrackState::initialize(0.0, 0.0, 1.0);
        assert!(matches!(
            track.update((0.0, 0.0), 1.0, NoiseParams::default()),
            Err(PerceptionError::NonMonotonicTime { .. })
        ));
    }

    #[test]
    fn update_rejects_non_finite_measurement() {
        let mut track = TrackState::initialize(0.0, 0.0, 0.0);
        assert!(matches!(
            track.update((f64::NAN, 0.0), 0.1, NoiseParams::default()),
            Err(PerceptionError::NonFiniteMeasurement { .. })
        ));
    }

    #[test]
    fn covariance_stays_symmetric_psd() {
        let mut track = TrackState::initialize(0.0, 0.0, 0.0);
        let mut rng_state = 12345u64;
        for k in 1..=200 {
            // Cheap LCG jitter; the filter must stay well-conditioned on any input.
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let jitter = ((rng_state >> 33) as f64 / (1u64 << 31) as f64 - 0.5) * 0.1;
            let t = k as f64 * 0.1;
            track.update((0.3 * t + jitter, -0.2 * t - jitter), t, NoiseParams::default()).unwrap();
            assert!(max_symmetry_error(&track.covariance) < 1e-12);
            // Diagonal positivity plus 2x2 leading minors as a cheap PSD probe.
            for i in 0..4 {
                assert!(track.covariance[i][i] > -1e-9);
            }
        }
    }

    #[test]
    fn quantizer_maps_every_angle_to_one_bin() {
        let n = 8;
        let mut step_angle = -179.95;
        while step_angle <= 180.0 {
            let s = symbol_for_angle(step_angle, n);
            assert!(s < n, "angle {step_angle} -> {s}");
            step_angle += 0.05;
        }
        assert_eq!(symbol_for_angle(0.0, n), 0);
        assert_eq!(symbol_for_angle(90.0, n), 2);
        assert_eq!(symbol_for_angle(-90.0, n), 6);
        assert_eq!(symbol_for_angle(180.0, n), 4);
        assert_eq!(symbol_for_angle(-170.0, n), 4);
        assert_eq!(symbol_for_angle(60.0, n), 1);
        assert_eq!(symbol_for_angle(120.0, n), 3);
    }

    #[test]
    fn quantizer_boundary_belongs_to_upper_bin() {
        // 22.5 is the boundary between bins 0 and 1 for n = 8.
        assert_eq!(symbol_for_angle(22.5, 8), 1);
        assert_eq!(symbol_for_angle(22.4999, 8), 0);
    }

    #[test]
    fn quantizer_mirror_symmetry() {
        let n = 8;
        for &angle in &[10.0, 40.0, 89.0, 91.0, 130.0, 155.0] {
            let k = symbol_for_angle(angle, n);
            let mirrored = symbol_for_angle(-angle, n);
            assert_eq!(mirrored, (n - k) % n, "angle {angle}");
        }
    }

    fn run_heading_profile(profile: &[(f64, f64)]) -> Vec<ObservationEvent> {
        // profile entries are (duration_s, heading_deg) at constant speed.
        let speed = 0.3;
        let dt = 0.1;
        let mut samples = Vec::new();
        let (mut x, mut y, mut t) = (0.0, 0.0, 0.0);
        for &(duration, heading) in profile {
            let (dx, dy) = (heading.to_radians().cos(), heading.to_radians().sin());
            let steps = (duration / dt).round() as usize;
            for _ in 0..steps {
                t += dt;
                x += speed * dx * dt;
                y += speed * dy * dt;
                samples.push((t, x, y));
            }
        }
        events_from_positions(&samples, NoiseParams::default(), QuantizerConfig::default())
            .unwrap()
    }

    #[test]
    fn straight_line_emits_no_events() {
        let events = run_heading_profile(&[(20.0, 0.0)]);
        assert!(events.is_empty(), "{events:?}");
    }

    #[test]
    fn single_turn_emits_one_event() {
        let events = run_heading_profile(&[(8.0, 0.0), (8.0, 90.0)]);
        assert_eq!(events.len(), 1, "{events:?}");
        assert_eq!(events[0].symbol, symbol_for_angle(90.0, 8));
        assert!((events[0].turn_angle - 90.0).abs() < 10.0);
    }

    #[test]
    fn cw_and_ccw_turns_mirror() {
        let ccw = run_heading_profile(&[(8.0, 0.0), (8.0, 90.0)]);
        let cw = run_heading_profile(&[(8.0, 0.0), (8.0, -90.0)]);
        assert_eq!(ccw.len(), 1);
        assert_eq!(cw.len(), 1);
        assert_eq!(cw[0].symbol, (8 - ccw[0].symbol) % 8);
    }
}
