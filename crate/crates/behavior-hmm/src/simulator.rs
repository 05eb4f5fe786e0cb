//! Randomized executions of six polygonal behaviors as timed noisy position
//! streams with ground truth.
//!
//! A kinematic unicycle follows the transformed waypoint loop at constant
//! speed with a bounded turn rate. Runs start mid-way along the closing
//! segment so every vertex turn is executed exactly once and the trajectory
//! ends where it started. Measurements are ground truth plus per-axis
//! Gaussian noise, gated by the observer's detection range.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perception::{symbol_for_angle, wrap_angle_deg};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unknown behavior '{0}'; valid names: rectangle, triangle, convex_box, concave_box, trapezoid, hourglass")]
    UnknownBehavior(String),
    #[error("path has no waypoints")]
    EmptyPath,
    #[error("agent failed to complete the path within the step limit")]
    DidNotConverge,
    #[error("failed to read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
}

/// The six paper behaviors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorKind {
    Rectangle,
    Triangle,
    ConvexBox,
    ConcaveBox,
    Trapezoid,
    Hourglass,
}

impl BehaviorKind {
    pub const ALL: [BehaviorKind; 6] = [
        BehaviorKind::Rectangle,
        BehaviorKind::Triangle,
        BehaviorKind::ConvexBox,
        BehaviorKind::ConcaveBox,
        BehaviorKind::Trapezoid,
        BehaviorKind::Hourglass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BehaviorKind::Rectangle => "rectangle",
            BehaviorKind::Triangle => "triangle",
            BehaviorKind::ConvexBox => "convex_box",
            BehaviorKind::ConcaveBox => "concave_box",
            BehaviorKind::Trapezoid => "trapezoid",
            BehaviorKind::Hourglass => "hourglass",
        }
    }
}

impl fmt::Display for BehaviorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BehaviorKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        BehaviorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::UnknownBehavior(s.to_string()))
    }
}

/// Closed waypoint loop at unit scale plus the ground-truth signed turn
/// angle executed at each vertex (degrees, CCW positive).
#[derive(Debug, Clone)]
pub struct BehaviorTemplate {
    pub name: BehaviorKind,
    pub waypoints: Vec<[f64; 2]>,
    pub turn_events: Vec<f64>,
}

impl BehaviorTemplate {
    /// Canonical unit-scale CCW template for one behavior. Vertex orderings
    /// are chosen so the turns that distinguish a behavior from the others
    /// happen early in a run.
    pub fn standard(kind: BehaviorKind) -> Self {
        let h3 = 1.5 * 3.0f64.sqrt() / 2.0;
        let waypoints: Vec<[f64; 2]> = match kind {
            BehaviorKind::Rectangle => vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]],
            BehaviorKind::Triangle => vec![[0.0, 0.0], [1.5, 0.0], [0.75, h3]],
            // Elongated hexagon with pointed ends (turns 45, 45, 90, 45,
            // 45, 90). A regular hexagon's uniform 60-degree turns leave
            // its first two events indistinguishable from the trapezoid's
            // leg turns in one traversal direction, which delays
            // recognition past the 40% mark; mixing two turn sizes makes
            // the prefix unique by the second event either way around.
            BehaviorKind::ConvexBox => vec![
                [0.75, 0.0],
                [2.25, 0.0],
                [3.375, 1.125],
                [2.25, 2.25],
                [0.75, 2.25],
                [-0.375, 1.125],
            ],
            BehaviorKind::ConcaveBox => vec![
                [0.75, 1.5],
                [0.75, 0.75],
                [0.0, 0.75],
                [0.0, 0.0],
                [2.0, 0.0],
                [2.0, 1.5],
            ],
            // 54-degree base angles put the trapezoid's turns (126, 54)
            // comfortably inside bins 3 and 1 of the 8-bin quantizer on
            // both sides: steeper legs approach the 112.5-degree bin edge,
            // shallower legs push the small turns toward the event trigger.
            BehaviorKind::Trapezoid => {
                vec![[0.708, 0.975], [0.0, 0.0], [3.0, 0.0], [2.292, 0.975]]
            }
            // The shallow 3 x 0.525 box puts the apex turns at +-170
            // degrees, well inside the wrap bin even when the track filter
            // under-reads a turn by several degrees; a taller box's
            // +-153..166 turns land on or near the 157.5-degree bin edge.
            // The long sides give the filter time to settle between the
            // near-reversals even at the smallest run scales.
            BehaviorKind::Hourglass => vec![[0.0, 0.0], [3.0, 0.0], [0.0, 0.525], [3.0, 0.525]],
        };
        let turn_events = turn_angles(&waypoints);
        BehaviorTemplate { name: kind, waypoints, turn_events }
    }

    /// Nominal event count T_i: one turn per vertex.
    pub fn t_nominal(&self) -> usize {
        self.waypoints.len()
    }

    /// The symbol each ground-truth turn maps to under an n-bin quantizer.
    pub fn expected_symbols(&self, n_bins: usize) -> Vec<usize> {
        self.turn_events.iter().map(|&a| symbol_for_angle(a, n_bins)).collect()
    }
}

/// Signed exterior turn at each vertex of a closed polyline, in degrees.
/// Entry i is the turn executed at waypoint i (arriving from waypoint i-1).
pub fn turn_angles(waypoints: &[[f64; 2]]) -> Vec<f64> {
    let n = waypoints.len();
    (0..n)
        .map(|i| {
            let prev = waypoints[(i + n - 1) % n];
            let here = waypoints[i];
            let next = waypoints[(i + 1) % n];
            let incoming = (here[1] - prev[1]).atan2(here[0] - prev[0]);
            let outgoing = (next[1] - here[1]).atan2(next[0] - here[0]);
            wrap_angle_deg((outgoing - incoming).to_degrees())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ccw,
    Cw,
}

/// Everything that varies between runs. `randomized` draws the scale,
/// initial heading, and direction the way the experiment protocol does.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Uniform in [0.5, 1.5] when randomized.
    pub scale: f64,
    /// Rotation applied to the whole path, radians.
    pub initial_heading: f64,
    pub direction: Direction,
    /// Agent speed, m/s.
    pub speed: f64,
    /// Samples per second.
    pub sample_rate: f64,
    /// Per-axis Gaussian measurement noise, m.
    pub position_noise_sigma: f64,
    /// Samples farther than this from the observer are dropped, m.
    pub detection_range: f64,
    pub observer_position: [f64; 2],
    /// Translation of the path centroid away from the origin, m.
    pub center: [f64; 2],
    /// Unicycle turn rate bound, degrees/second.
    pub max_turn_rate: f64,
    /// Straight approach leg before the loop's start point, m. Gives the
    /// observer's track filter time to converge before the first turn;
    /// fractions of the loop executed are measured from the loop start.
    pub lead_in: f64,
}

impl RunConfig {
    pub fn fixed(seed: u64) -> Self {
        RunConfig {
            seed,
            scale: 1.0,
            initial_heading: 0.0,
            direction: Direction::Ccw,
            speed: 0.3,
            sample_rate: 10.0,
            position_noise_sigma: 0.05,
            detection_range: 7.5,
            observer_position: [0.0, 0.0],
            center: [0.0, 0.0],
            max_turn_rate: 180.0,
            lead_in: 0.9,
        }
    }

    /// Draws scale ~ U[0.5, 1.5], heading ~ U[0, 2pi), and a fair
    /// CW/CCW coin, all from the seed.
    pub fn randomized(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = rng.gen_range(0.5..=1.5);
        let initial_heading = rng.gen_range(0.0..std::f64::consts::TAU);
        let direction = if rng.gen_bool(0.5) { Direction::Ccw } else { Direction::Cw };
        RunConfig { scale, initial_heading, direction, ..RunConfig::fixed(seed) }
    }

    pub fn noiseless(seed: u64) -> Self {
        RunConfig { position_noise_sigma: 0.0, ..RunConfig::fixed(seed) }
    }
}

/// A template transformed by one run's scale, rotation, and direction.
#[derive(Debug, Clone)]
pub struct TransformedPath {
    /// Start point, then every vertex in traversal order, then the start
    /// point again (the loop closes where it began, mid-segment).
    pub route: Vec<[f64; 2]>,
    /// Expected signed turn at each vertex, in traversal order.
    pub turn_events: Vec<f64>,
    /// Perimeter of the transformed loop.
    pub path_length: f64,
    /// Length of the straight approach leg ahead of the loop start.
    pub lead_in: f64,
}

/// Scales about the centroid, rotates by the initial heading, reverses the
/// traversal under CW, and picks the start point mid-way along the closing
/// segment so every vertex turn is executed.
pub fn build_behavior_path(template: &BehaviorTemplate, config: &RunConfig) -> TransformedPath {
    let mut loop_points: Vec<[f64; 2]> = template.waypoints.clone();
    if config.direction == Direction::Cw {
        // Keep the same first vertex, traverse the loop the other way.
        loop_points[1..].reverse();
    }
    let n = loop_points.len();
    let cx = loop_points.iter().map(|p| p[0]).sum::<f64>() / n as f64;
    let cy = loop_points.iter().map(|p| p[1]).sum::<f64>() / n as f64;
    let (sin, cos) = config.initial_heading.sin_cos();
    for p in loop_points.iter_mut() {
        let dx = (p[0] - cx) * config.scale;
        let dy = (p[1] - cy) * config.scale;
        *p = [
            dx * cos - dy * sin + config.center[0],
            dx * sin + dy * cos + config.center[1],
        ];
    }
    let turn_events = turn_angles(&loop_points);
    let path_length: f64 = (0..n)
        .map(|i| dist(loop_points[i], loop_points[(i + 1) % n]))
        .sum();
    let last = loop_points[n - 1];
    let first = loop_points[0];
    let start = [(last[0] + first[0]) / 2.0, (last[1] + first[1]) / 2.0];
    // Straight approach collinear with the closing segment, so entering the
    // loop adds no heading change.
    let seg = dist(last, first).max(f64::MIN_POSITIVE);
    let dir = [(first[0] - last[0]) / seg, (first[1] - last[1]) / seg];
    let approach = [start[0] - dir[0] * config.lead_in, start[1] - dir[1] * config.lead_in];
    let mut route = Vec::with_capacity(n + 2);
    route.push(approach);
    route.extend_from_slice(&loop_points);
    route.push(start);
    TransformedPath { route, turn_events, path_length, lead_in: config.lead_in }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Ground-truth turn annotation for one vertex of a run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TurnEventTruth {
    pub angle: f64,
    pub symbol: usize,
    /// Simulation time at which the agent reached the vertex.
    pub time: f64,
}

/// One simulated execution: noisy gated measurements plus exact ground truth.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub behavior: BehaviorKind,
    pub config: RunConfig,
    /// (t, x, y) rows; samples beyond detection range are absent.
    pub measurements: Vec<(f64, f64, f64)>,
    /// (t, x, y, heading_rad) at every sample tick.
    pub ground_truth: Vec<(f64, f64, f64, f64)>,
    pub turn_events: Vec<TurnEventTruth>,
    pub path_length: f64,
    pub lead_in: f64,
}

impl SimRun {
    /// Ground-truth distance traveled by `time`, from the pose log.
    pub fn distance_traveled_at(&self, time: f64) -> f64 {
        let mut total = 0.0;
        for w in self.ground_truth.windows(2) {
            if w[1].0 > time {
                break;
            }
            total += (w[1].1 - w[0].1).hypot(w[1].2 - w[0].2);
        }
        total
    }

    /// Fraction of the loop executed by `time`; the approach leg counts as 0.
    pub fn fraction_executed_at(&self, time: f64) -> f64 {
        ((self.distance_traveled_at(time) - self.lead_in) / self.path_length).max(0.0)
    }
}

/// Drives the unicycle along the route. Deterministic given the config.
pub fn simulate_run(
    behavior: BehaviorKind,
    path: &TransformedPath,
    config: &RunConfig,
) -> Result<SimRun, SimError> {
    if path.route.len() < 3 {
        return Err(SimError::EmptyPath);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.position_noise_sigma.max(f64::MIN_POSITIVE)).unwrap();
    let dt = 1.0 / config.sample_rate;
    let capture = (config.speed * dt * 1.5).clamp(0.02, 0.045);
    let max_rate = config.max_turn_rate.to_radians();

    let mut pos = path.route[0];
    let mut heading =
        (path.route[1][1] - pos[1]).atan2(path.route[1][0] - pos[0]);
    let mut target = 1usize;
    let mut time = 0.0;
    let max_steps = ((3.0 * path.path_length / config.speed) / dt) as usize + 2_000;

    let mut measurements = Vec::new();
    let mut ground_truth = vec![(0.0, pos[0], pos[1], heading)];
    let mut arrivals: Vec<f64> = Vec::new();
    // Closest-approach fallback: if the turning radius exceeds the capture
    // radius the agent can orbit a waypoint forever, so a waypoint also counts
    // as reached once the agent is near it and starts moving away again.
    let near = (config.speed / max_rate * 1.5).max(2.0 * capture);
    let mut prev_goal_dist = f64::INFINITY;
    // Turn anticipation: begin turning r*tan(|dtheta|/2) before a vertex so
    // the arc inscribes the corner. Capturing exactly at the vertex makes
    // the agent swing wide and S-curve back, which reads as a too-large
    // turn followed by a slow correction.
    let turn_radius = config.speed / max_rate;
    let capture_at = |target: usize| -> f64 {
        match path.turn_events.get(target.wrapping_sub(1)) {
            Some(&turn_deg) => {
                let half = (turn_deg.to_radians().abs() / 2.0).min(1.45);
                (turn_radius * half.tan()).clamp(capture, 0.35)
            }
            None => capture,
        }
    };

    // Direction of the closing segment; the exit point is steered toward
    // along this line rather than chased as a point, because pursuing a
    // nearby point makes the bearing swing fast and wiggles the heading.
    let exit_index = path.route.len() - 1;
    let exit_point = path.route[exit_index];
    let exit_dir = {
        let before = path.route[exit_index - 1];
        let seg = dist(before, exit_point).max(f64::MIN_POSITIVE);
        [(exit_point[0] - before[0]) / seg, (exit_point[1] - before[1]) / seg]
    };

    for _ in 0..max_steps {
        time += dt;
        let goal = if target == exit_index {
            [exit_point[0] + exit_dir[0] * 10.0, exit_point[1] + exit_dir[1] * 10.0]
        } else {
            path.route[target]
        };
        let desired = (goal[1] - pos[1]).atan2(goal[0] - pos[0]);
        let mut err = desired - heading;
        while err > std::f64::consts::PI {
            err -= std::f64::consts::TAU;
        }
        while err <= -std::f64::consts::PI {
            err += std::f64::consts::TAU;
        }
        heading += err.clamp(-max_rate * dt, max_rate * dt);
        pos[0] += config.speed * heading.cos() * dt;
        pos[1] += config.speed * heading.sin() * dt;
        ground_truth.push((time, pos[0], pos[1], heading));

        let noisy = [pos[0] + noise.sample(&mut rng), pos[1] + noise.sample(&mut rng)];
        if dist(pos, config.observer_position) <= config.detection_range {
            measurements.push((
                time,
                if config.position_noise_sigma > 0.0 { noisy[0] } else { pos[0] },
                if config.position_noise_sigma > 0.0 { noisy[1] } else { pos[1] },
            ));
        }

        let goal_dist = dist(pos, path.route[target]);
        let arrived = if target == exit_index {
            // Passed the exit plane; the exit is crossed, not orbited.
            (pos[0] - exit_point[0]) * exit_dir[0] + (pos[1] - exit_point[1]) * exit_dir[1]
                >= 0.0
        } else {
            goal_dist <= capture_at(target) || (goal_dist <= near && goal_dist > prev_goal_dist)
        };
        if arrived {
            prev_goal_dist = f64::INFINITY;
            arrivals.push(time);
            target += 1;
            if target == path.route.len() {
                // Run-out past the closing point so an event ending near
                // the final waypoint still has samples to settle on. Keep
                // steering along the closing segment: freezing the heading
                // mid-correction would bake a pursuit transient into the
                // final straight leg.
                let tail_steps = (3.0 * config.sample_rate).ceil() as usize;
                for _ in 0..tail_steps {
                    time += dt;
                    let virtual_goal =
                        [pos[0] + exit_dir[0] * 10.0, pos[1] + exit_dir[1] * 10.0];
                    let desired =
                        (virtual_goal[1] - pos[1]).atan2(virtual_goal[0] - pos[0]);
                    let mut err = desired - heading;
                    while err > std::f64::consts::PI {
                        err -= std::f64::consts::TAU;
                    }
                    while err <= -std::f64::consts::PI {
                        err += std::f64::consts::TAU;
                    }
                    heading += err.clamp(-max_rate * dt, max_rate * dt);
                    pos[0] += config.speed * heading.cos() * dt;
                    pos[1] += config.speed * heading.sin() * dt;
                    ground_truth.push((time, pos[0], pos[1], heading));
                    let noisy =
                        [pos[0] + noise.sample(&mut rng), pos[1] + noise.sample(&mut rng)];
                    if dist(pos, config.observer_position) <= config.detection_range {
                        measurements.push((
                            time,
                            if config.position_noise_sigma > 0.0 { noisy[0] } else { pos[0] },
                            if config.position_noise_sigma > 0.0 { noisy[1] } else { pos[1] },
                        ));
                    }
                }
                let turn_events = path
                    .turn_events
                    .iter()
                    .zip(arrivals.iter())
                    .map(|(&angle, &t)| TurnEventTruth {
                        angle,
                        symbol: symbol_for_angle(angle, 8),
                        time: t,
                    })
                    .collect();
                return Ok(SimRun {
                    behavior,
                    config: *config,
                    measurements,
                    ground_truth,
                    turn_events,
                    path_length: path.path_length,
                    lead_in: path.lead_in,
                });
            }
        } else {
            prev_goal_dist = goal_dist;
        }
    }
    Err(SimError::DidNotConverge)
}

/// Convenience wrapper: standard template -> transformed path -> run.
pub fn simulate_behavior(kind: BehaviorKind, config: &RunConfig) -> Result<SimRun, SimError> {
    let template = BehaviorTemplate::standard(kind);
    let path = build_behavior_path(&template, config);
    simulate_run(kind, &path, config)
}

#[derive(Debug, Serialize, Deserialize)]
struct RunMeta {
    behavior: BehaviorKind,
    seed: u64,
    scale: f64,
    direction: Direction,
    path_length: f64,
    turn_events: Vec<TurnEventTruth>,
}

impl SimRun {
    /// Persists the run as `measurements.csv`, `truth.csv`, and `meta.json`.
    pub fn save(&self, dir: &Path) -> Result<(), SimError> {
        fs::create_dir_all(dir).map_err(|source| SimError::Io { path: dir.into(), source })?;
        let mut meas = String::from("t,x,y\n");
        for &(t, x, y) in &self.measurements {
            meas.push_str(&format!("{t},{x},{y}\n"));
        }
        write(dir.join("measurements.csv"), &meas)?;
        let mut truth = String::from("t,x,y,heading\n");
        for &(t, x, y, h) in &self.ground_truth {
            truth.push_str(&format!("{t},{x},{y},{h}\n"));
        }
        write(dir.join("truth.csv"), &truth)?;
        let meta = RunMeta {
            behavior: self.behavior,
            seed: self.config.seed,
            scale: self.config.scale,
            direction: self.config.direction,
            path_length: self.path_length,
            turn_events: self.turn_events.clone(),
        };
        write(
            dir.join("meta.json"),
            &serde_json::to_string_pretty(&meta).expect("serializable"),
        )
    }
}

fn write(path: PathBuf, contents: &str) -> Result<(), SimError> {
    fs::write(&path, contents).map_err(|source| SimError::Io { path, source })
}

/// Reads a `t,x,y` CSV written by [`SimRun::save`] (or any external source).
pub fn load_measurements(path: &Path) -> Result<Vec<(f64, f64, f64)>, SimError> {
    let text =
        fs::read_to_string(path).map_err(|source| SimError::Io { path: path.into(), source })?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |i: usize| -> Result<f64, SimError> {
            fields
                .get(i)
                .and_then(|f| f.trim().parse().ok())
                .ok_or_else(|| SimError::Malformed {
                    path: path.into(),
                    reason: format!("line {}: expected t,x,y", lineno + 1),
                })
        };
        rows.push((parse(0)?, parse(1)?, parse(2)?));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_have_consistent_turn_geometry() {
        for kind in BehaviorKind::ALL {
            let template = BehaviorTemplate::standard(kind);
            assert_eq!(template.turn_events.len(), template.waypoints.len());
            let recomputed = turn_angles(&template.waypoints);
            for (a, b) in template.turn_events.iter().zip(&recomputed) {
                assert!((a - b).abs() < 1e-9);
            }
            for w in template.waypoints.windows(2) {
                assert!(dist(w[0], w[1]) > 1e-9);
            }
        }
    }

    #[test]
    fn rectangle_turns_are_four_right_angles() {
        let template = BehaviorTemplate::standard(BehaviorKind::Rectangle);
        assert_eq!(template.t_nominal(), 4);
        for &turn in &template.turn_events {
            assert!((turn - 90.0).abs() < 1e-9);
        }
        let path = build_behavior_path(&template, &RunConfig::fixed(0));
        assert!((path.path_length - 6.0).abs() < 1e-9);
    }

    #[test]
    fn expected_symbol_sequences_are_distinct() {
        let mut seqs: Vec<Vec<usize>> = BehaviorKind::ALL
            .iter()
            .map(|&k| BehaviorTemplate::standard(k).expected_symbols(8))
            .collect();
        seqs.sort();
        seqs.dedup();
        assert_eq!(seqs.len(), 6, "symbol sequences collide: {seqs:?}");
    }

    #[test]
    fn randomized_scale_in_bounds() {
        for seed in 0..200 {
            let config = RunConfig::randomized(seed);
            assert!((0.5..=1.5).contains(&config.scale));
        }
    }

    #[test]
    fn cw_negates_turn_angles() {
        let template = BehaviorTemplate::standard(BehaviorKind::Rectangle);
        let ccw = build_behavior_path(&template, &RunConfig::fixed(0));
        let cw = build_behavior_path(
            &template,
            &RunConfig { direction: Direction::Cw, ..RunConfig::fixed(0) },
        );
        for (a, b) in ccw.turn_events.iter().zip(&cw.turn_events) {
            assert!((a + b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_noise_measurements_match_truth() {
        let run = simulate_behavior(BehaviorKind::Rectangle, &RunConfig::noiseless(1)).unwrap();
        assert_eq!(run.measurements.len(), run.ground_truth.len() - 1);
        for (m, g) in run.measurements.iter().zip(run.ground_truth.iter().skip(1)) {
            assert_eq!(m.1, g.1);
            assert_eq!(m.2, g.2);
        }
    }

    #[test]
    fn run_closes_loop() {
        // The agent enters the loop after the straight approach leg and
        // leaves it before the straight run-out; those two poses are the
        // same mid-segment point up to waypoint-capture slack.
        let config = RunConfig::noiseless(3);
        let t_enter = config.lead_in / config.speed;
        for kind in BehaviorKind::ALL {
            let run = simulate_behavior(kind, &config).unwrap();
            let t_leave = run.ground_truth.last().unwrap().0 - 3.0;
            let at = |t: f64| {
                run.ground_truth
                    .iter()
                    .min_by(|a, b| (a.0 - t).abs().partial_cmp(&(b.0 - t).abs()).unwrap())
                    .unwrap()
            };
            let enter = at(t_enter);
            let leave = at(t_leave);
            let gap = (leave.1 - enter.1).hypot(leave.2 - enter.2);
            assert!(gap < 0.2, "{kind}: closure gap {gap}");
        }
    }

    #[test]
    fn noise_residual_std_matches_sigma() {
        let config = RunConfig { scale: 1.4, ..RunConfig::fixed(9) };
        let mut residuals = Vec::new();
        for seed in 0..20 {
            let run =
                simulate_behavior(BehaviorKind::Hourglass, &RunConfig { seed, ..config }).unwrap();
            let truth: std::collections::BTreeMap<u64, (f64, f64)> = run
                .ground_truth
                .iter()
                .map(|&(t, x, y, _)| ((t * 1e6).round() as u64, (x, y)))
                .collect();
            for &(t, x, y) in &run.measurements {
                let (gx, gy) = truth[&((t * 1e6).round() as u64)];
                residuals.push(x - gx);
                residuals.push(y - gy);
            }
        }
        assert!(residuals.len() > 10_000);
        let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
        let var = residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>()
            / (residuals.len() - 1) as f64;
        let std = var.sqrt();
        assert!((std - 0.05).abs() < 0.005, "residual std {std}");
    }

    #[test]
    fn detection_range_gates_samples() {
        let config = RunConfig {
            center: [7.0, 0.0],
            ..RunConfig::noiseless(5)
        };
        let run = simulate_behavior(BehaviorKind::Rectangle, &config).unwrap();
        assert!(!run.measurements.is_empty());
        assert!(run.measurements.len() < run.ground_truth.len() - 1);
        for &(_, x, y) in &run.measurements {
            assert!(x.hypot(y) <= 7.5 + 1e-9);
        }
    }

    #[test]
    fn identical_config_reproduces_run_exactly() {
        let config = RunConfig::randomized(77);
        let a = simulate_behavior(BehaviorKind::Trapezoid, &config).unwrap();
        let b = simulate_behavior(BehaviorKind::Trapezoid, &config).unwrap();
        assert_eq!(a.measurements, b.measurements);
        assert_eq!(a.ground_truth, b.ground_truth);
    }

    #[test]
    fn save_writes_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let run = simulate_behavior(BehaviorKind::Triangle, &RunConfig::fixed(2)).unwrap();
        run.save(dir.path()).unwrap();
        let rows = load_measurements(&dir.path().join("measurements.csv")).unwrap();
        assert_eq!(rows.len(), run.measurements.len());
        assert!(dir.path().join("truth.csv").exists());
        assert!(dir.path().join("meta.json").exists());
    }

    #[test]
    fn unknown_behavior_name_is_rejected() {
        let err = "pentagon".parse::<BehaviorKind>().unwrap_err();
        assert!(err.to_string().contains("rectangle"));
    }
}
