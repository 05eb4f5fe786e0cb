//! Discrete-observation hidden Markov models: validation, scaled forward
//! recursion, sequence sampling, and multi-sequence Baum-Welch training.
//!
//! All sequence probabilities are tracked in log space. The forward pass
//! renormalizes the forward vector at every step and accumulates the log of
//! the scaling products, so arbitrarily long sequences never underflow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Row-sum / total-sum tolerance for stochastic vectors and matrices.
pub const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HmmError {
    #[error("model is invalid: {0:?}")]
    InvalidModel(Vec<ModelViolation>),
    #[error("symbol {symbol} is outside the model alphabet (n_symbols = {n_symbols})")]
    OutOfAlphabet { symbol: usize, n_symbols: usize },
    #[error("observation sequence is empty")]
    EmptySequence,
    #[error("sequence {index} has zero probability under the current model at step {step}")]
    ZeroProbabilityInTraining { index: usize, step: usize },
    #[error("invalid training configuration: {0}")]
    InvalidTrainConfig(String),
    #[error("training requires at least one nonempty sequence")]
    NoTrainingData,
    #[error("timestamps must be nondecreasing and match the symbol count")]
    InvalidTimestamps,
}

/// One violated [`HmmModel`] constraint, with enough indices to locate it.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelViolation {
    EmptyStates,
    EmptyAlphabet,
    PiLength { expected: usize, actual: usize },
    PiSum { sum: f64 },
    TransitionShape { row: usize },
    TransitionRowSum { row: usize, sum: f64 },
    EmissionShape { row: usize },
    EmissionRowSum { row: usize, sum: f64 },
    EntryOutOfRange { matrix: &'static str, row: usize, col: usize, value: f64 },
}

/// The model triple (A, B, pi) over N hidden states and M observation symbols.
///
/// Immutable after construction; construction fails unless every row of the
/// transition and emission matrices and the initial distribution is
/// stochastic within [`STOCHASTIC_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmModel {
    n_states: usize,
    n_symbols: usize,
    pi: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl HmmModel {
    pub fn new(pi: Vec<f64>, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Result<Self, HmmError> {
        let n_states = pi.len();
        let n_symbols = b.first().map(Vec::len).unwrap_or(0);
        let model = HmmModel { n_states, n_symbols, pi, a, b };
        let violations = model.validate();
        if violations.is_empty() {
            Ok(model)
        } else {
            Err(HmmError::InvalidModel(violations))
        }
    }

    /// Checks every structural and numeric invariant; an empty list means ok.
    pub fn validate(&self) -> Vec<ModelViolation> {
        let mut v = Vec::new();
        if self.n_states == 0 {
            v.push(ModelViolation::EmptyStates);
        }
        if self.n_symbols == 0 {
            v.push(ModelViolation::EmptyAlphabet);
        }
        if self.pi.len() != self.n_states {
            v.push(ModelViolation::PiLength { expected: self.n_states, actual: self.pi.len() });
        }
        check_entries("pi", 0, &self.pi, &mut v);
        let pi_sum: f64 = self.pi.iter().sum();
        if (pi_sum - 1.0).abs() > STOCHASTIC_TOL {
            v.push(ModelViolation::PiSum { sum: pi_sum });
        }
        if self.a.len() != self.n_states {
            v.push(ModelViolation::TransitionShape { row: self.a.len() });
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != self.n_states {
                v.push(ModelViolation::TransitionShape { row: i });
                continue;
            }
            check_entries("a", i, row, &mut v);
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                v.push(ModelViolation::TransitionRowSum { row: i, sum });
            }
        }
        if self.b.len() != self.n_states {
            v.push(ModelViolation::EmissionShape { row: self.b.len() });
        }
        for (j, row) in self.b.iter().enumerate() {
            if row.len() != self.n_symbols {
                v.push(ModelViolation::EmissionShape { row: j });
                continue;
            }
            check_entries("b", j, row, &mut v);
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                v.push(ModelViolation::EmissionRowSum { row: j, sum });
            }
        }
        v
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    /// Left-to-right initialization: each state self-loops or advances with
    /// probability 0.45 and may skip one state ahead with probability 0.1,
    /// the last state is absorbing, pi is concentrated on state 0, and
    /// emissions are uniform with a seeded +/-10% perturbation. The skip arc
    /// lets training absorb event streams where two adjacent turns were
    /// reported as a single combined event.
    pub fn left_to_right(n_states: usize, n_symbols: usize, seed: u64) -> Result<Self, HmmError> {
        if n_states == 0 || n_symbols == 0 {
            return Err(HmmError::InvalidModel(vec![if n_states == 0 {
                ModelViolation::EmptyStates
            } else {
                ModelViolation::EmptyAlphabet
            }]));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pi = vec![0.0; n_states];
        pi[0] = 1.0;
        let mut a = vec![vec![0.0; n_states]; n_states];
        for i in 0..n_states {
            if i + 2 < n_states {
                a[i][i] = 0.45;
                a[i][i + 1] = 0.45;
                a[i][i + 2] = 0.1;
            } else if i + 1 < n_states {
                a[i][i] = 0.5;
                a[i][i + 1] = 0.5;
            } else {
                a[i][i] = 1.0;
            }
        }
        let mut b = vec![vec![0.0; n_symbols]; n_states];
        for row in b.iter_mut() {
            for entry in row.iter_mut() {
                let perturb: f64 = rng.gen_range(-0.1..0.1);
                *entry = (1.0 + perturb) / n_symbols as f64;
            }
            normalize_row(row);
        }
        HmmModel::new(pi, a, b)
    }

    /// Initializes the forward recursion with the first observation.
    pub fn forward_init(&self, symbol: usize) -> Result<ForwardState, HmmError> {
        self.check_symbol(symbol)?;
        let mut alpha: Vec<f64> = (0..self.n_states)
            .map(|i| self.pi[i] * self.b[i][symbol])
            .collect();
        let scale: f64 = alpha.iter().sum();
        let log_prob = if scale > 0.0 {
            for entry in alpha.iter_mut() {
                *entry /= scale;
            }
            scale.ln()
        } else {
            alpha.iter_mut().for_each(|e| *e = 0.0);
            f64::NEG_INFINITY
        };
        Ok(ForwardState { alpha_hat: alpha, log_prob, t: 1 })
    }

    fn check_symbol(&self, symbol: usize) -> Result<(), HmmError> {
        if symbol >= self.n_symbols {
            Err(HmmError::OutOfAlphabet { symbol, n_symbols: self.n_symbols })
        } else {
            Ok(())
        }
    }
}

fn check_entries(matrix: &'static str, row: usize, entries: &[f64], v: &mut Vec<ModelViolation>) {
    for (col, &value) in entries.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) || !value.is_finite() {
            v.push(ModelViolation::EntryOutOfRange { matrix, row, col, value });
        }
    }
}

fn normalize_row(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    if sum > 0.0 {
        for entry in row.iter_mut() {
            *entry /= sum;
        }
    } else {
        let uniform = 1.0 / row.len() as f64;
        row.iter_mut().for_each(|e| *e = uniform);
    }
}

/// Renormalized forward variables plus the accumulated log scale.
///
/// `log_prob` equals log P(O_1..O_t | lambda) exactly; a prefix that is
/// impossible under the model is carried as negative infinity rather than an
/// error so a recognizer can keep reporting a ruled-out behavior.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardState {
    alpha_hat: Vec<f64>,
    log_prob: f64,
    t: usize,
}

impl ForwardState {
    /// Advances by one observation: alpha_{t+1}(j) = [sum_i alpha_t(i) a_ij] b_j(O).
    pub fn step(&mut self, model: &HmmModel, symbol: usize) -> Result<(), HmmError> {
        model.check_symbol(symbol)?;
        debug_assert_eq!(self.alpha_hat.len(), model.n_states);
        self.t += 1;
        if self.log_prob == f64::NEG_INFINITY {
            return Ok(());
        }
        let n = model.n_states;
        let mut next = vec![0.0; n];
        for (j, out) in next.iter_mut().enumerate() {
            let mut sum = 0.0;
            for i in 0..n {
                sum += self.alpha_hat[i] * model.a[i][j];
            }
            *out = sum * model.b[j][symbol];
        }
        let scale: f64 = next.iter().sum();
        if scale > 0.0 {
            for entry in next.iter_mut() {
                *entry /= scale;
            }
            self.log_prob += scale.ln();
        } else {
            next.iter_mut().for_each(|e| *e = 0.0);
            self.log_prob = f64::NEG_INFINITY;
        }
        self.alpha_hat = next;
        Ok(())
    }

    pub fn alpha_hat(&self) -> &[f64] {
        &self.alpha_hat
    }

    pub fn log_prob(&self) -> f64 {
        self.log_prob
    }

    pub fn t(&self) -> usize {
        self.t
    }
}

/// Timestamped discrete symbols; spacing may be highly irregular because
/// symbols are generated by events, not by a fixed clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSequence {
    pub symbols: Vec<usize>,
    pub timestamps: Vec<f64>,
    pub source_label: Option<String>,
}

impl ObservationSequence {
    pub fn new(
        symbols: Vec<usize>,
        timestamps: Vec<f64>,
        source_label: Option<String>,
    ) -> Result<Self, HmmError> {
        if timestamps.len() != symbols.len()
            || timestamps.windows(2).any(|w| w[1] < w[0])
        {
            return Err(HmmError::InvalidTimestamps);
        }
        Ok(ObservationSequence { symbols, timestamps, source_label })
    }

    /// Unit-spaced timestamps, for synthetic data.
    pub fn from_symbols(symbols: Vec<usize>) -> Self {
        let timestamps = (0..symbols.len()).map(|t| t as f64).collect();
        ObservationSequence { symbols, timestamps, source_label: None }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// log P(O | lambda) of a complete sequence, by folding the scaled forward
/// recursion. Bit-identical to an online fold of [`ForwardState::step`].
pub fn sequence_log_prob(model: &HmmModel, seq: &ObservationSequence) -> Result<f64, HmmError> {
    let (&first, rest) = seq.symbols.split_first().ok_or(HmmError::EmptySequence)?;
    let mut state = model.forward_init(first)?;
    for &symbol in rest {
        state.step(model, symbol)?;
    }
    Ok(state.log_prob)
}

/// Draws a state path from pi and the transition rows, emitting one symbol
/// per step. Deterministic given the seed; timestamps are 0, 1, 2, ...
pub fn sample_sequence(model: &HmmModel, length: usize, seed: u64) -> ObservationSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symbols = Vec::with_capacity(length);
    let mut state = 0usize;
    for t in 0..length {
        state = if t == 0 {
            draw_categorical(&mut rng, model.pi())
        } else {
            draw_categorical(&mut rng, &model.a[state])
        };
        symbols.push(draw_categorical(&mut rng, &model.b[state]));
    }
    ObservationSequence::from_symbols(symbols)
}

fn draw_categorical(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.gen::<f64>();
    let mut acc = 0.0;
    for (idx, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return idx;
        }
    }
    weights.len() - 1
}

/// Baum-Welch stopping and regularization knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_iterations: usize,
    pub log_likelihood_tolerance: f64,
    pub emission_floor: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_iterations: 100,
            log_likelihood_tolerance: 1e-6,
            emission_floor: 1e-3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self, n_symbols: usize) -> Result<(), HmmError> {
        if self.max_iterations == 0 {
            return Err(HmmError::InvalidTrainConfig("max_iterations must be positive".into()));
        }
        if !(self.log_likelihood_tolerance > 0.0) {
            return Err(HmmError::InvalidTrainConfig("tolerance must be positive".into()));
        }
        if !(0.0..=0.1).contains(&self.emission_floor)
            || self.emission_floor >= 1.0 / n_symbols as f64
        {
            return Err(HmmError::InvalidTrainConfig(format!(
                "emission_floor {} must lie in [0, 0.1] and below 1/M",
                self.emission_floor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: HmmModel,
    /// Total log-likelihood of the training set at the start of each
    /// iteration, i.e. under the parameters produced by the previous
    /// iteration. With emission_floor = 0 this is the exact EM trace.
    pub log_likelihood_trace: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Multi-sequence Baum-Welch with per-step scaling and pooled expected
/// counts. Stops when the per-iteration improvement drops below the
/// configured tolerance or at `max_iterations`.
pub fn baum_welch_train(
    sequences: &[ObservationSequence],
    init: &HmmModel,
    config: &TrainConfig,
) -> Result<TrainOutcome, HmmError> {
    config.validate(init.n_symbols)?;
    let violations = init.validate();
    if !violations.is_empty() {
        return Err(HmmError::InvalidModel(violations));
    }
    if sequences.is_empty() || sequences.iter().all(ObservationSequence::is_empty) {
        return Err(HmmError::NoTrainingData);
    }
    for seq in sequences {
        for &symbol in &seq.symbols {
            init.check_symbol(symbol)?;
        }
    }

    let n = init.n_states;
    let m = init.n_symbols;
    let mut model = init.clone();
    let mut trace = Vec::new();
    let mut warnings = Vec::new();

    for _ in 0..config.max_iterations {
        let mut pi_num = vec![0.0; n];
        let mut a_num = vec![vec![0.0; n]; n];
        let mut a_den = vec![0.0; n];
        let mut b_num = vec![vec![0.0; m]; n];
        let mut b_den = vec![0.0; n];
        let mut total_ll = 0.0;
        let mut n_used = 0usize;

        for (seq_idx, seq) in sequences.iter().enumerate() {
            if seq.is_empty() {
                continue;
            }
            n_used += 1;
            let obs = &seq.symbols;
            let len = obs.len();

            // Scaled forward pass; alpha rows are normalized, scales kept.
            let mut alpha = vec![vec![0.0; n]; len];
            let mut scales = vec![0.0; len];
            for i in 0..n {
                alpha[0][i] = model.pi[i] * model.b[i][obs[0]];
            }
            for t in 0..len {
                if t > 0 {
                    for j in 0..n {
                        let mut sum = 0.0;
                        for i in 0..n {
                            sum += alpha[t - 1][i] * model.a[i][j];
                        }
                        alpha[t][j] = sum * model.b[j][obs[t]];
                    }
                }
                let scale: f64 = alpha[t].iter().sum();
                if scale <= 0.0 {
                    return Err(HmmError::ZeroProbabilityInTraining { index: seq_idx, step: t + 1 });
                }
                for entry in alpha[t].iter_mut() {
                    *entry /= scale;
                }
                scales[t] = scale;
                total_ll += scale.ln();
            }

            // Backward pass with the same scales.
            let mut beta = vec![vec![0.0; n]; len];
            beta[len - 1].iter_mut().for_each(|e| *e = 1.0);
            for t in (0..len - 1).rev() {
                for i in 0..n {
                    let mut sum = 0.0;
                    for j in 0..n {
                        sum += model.a[i][j] * model.b[j][obs[t + 1]] * beta[t + 1][j];
                    }
                    beta[t][i] = sum / scales[t + 1];
                }
            }

            for t in 0..len {
                for i in 0..n {
                    let gamma = alpha[t][i] * beta[t][i];
                    if t == 0 {
                        pi_num[i] += gamma;
                    }
                    if t + 1 < len {
                        a_den[i] += gamma;
                        for j in 0..n {
                            a_num[i][j] += alpha[t][i]
                                * model.a[i][j]
                                * model.b[j][obs[t + 1]]
                                * beta[t + 1][j]
                                / scales[t + 1];
                        }
                    }
                    b_num[i][obs[t]] += gamma;
                    b_den[i] += gamma;
                }
            }
        }

        let improvement = trace.last().map(|&prev: &f64| total_ll - prev);
        trace.push(total_ll);
        if let Some(delta) = improvement {
            if delta < config.log_likelihood_tolerance {
                break;
            }
        }

        // M-step.
        for i in 0..n {
            model.pi[i] = pi_num[i] / n_used as f64;
        }
        for i in 0..n {
            if a_den[i] > 0.0 {
                for j in 0..n {
                    model.a[i][j] = a_num[i][j] / a_den[i];
                }
                normalize_row(&mut model.a[i]);
            } else {
                // State never occupied before the final step of any sequence.
                let uniform = 1.0 / n as f64;
                model.a[i].iter_mut().for_each(|e| *e = uniform);
                warnings.push(format!("transition row {i} had zero expected counts; reset to uniform"));
            }
        }
        for j in 0..n {
            if b_den[j] > 0.0 {
                for k in 0..m {
                    model.b[j][k] = b_num[j][k] / b_den[j];
                }
            } else {
                let uniform = 1.0 / m as f64;
                model.b[j].iter_mut().for_each(|e| *e = uniform);
                warnings.push(format!("emission row {j} had zero expected counts; reset to uniform"));
            }
            if config.emission_floor > 0.0 {
                for entry in model.b[j].iter_mut() {
                    if *entry < config.emission_floor {
                        *entry = config.emission_floor;
                    }
                }
            }
            normalize_row(&mut model.b[j]);
        }
        normalize_row(&mut model.pi);
    }

    let violations = model.validate();
    if !violations.is_empty() {
        return Err(HmmError::InvalidModel(violations));
    }
    Ok(TrainOutcome { model, log_likelihood_trace: trace, warnings })
}

/// Bare model file: `{"name", "n_states", "n_symbols", "pi", "a", "b"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedModelFile {
    pub name: String,
    pub n_states: usize,
    pub n_symbols: usize,
    pub pi: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl NamedModelFile {
    pub fn from_model(name: &str, model: &HmmModel) -> Self {
        NamedModelFile {
            name: name.to_string(),
            n_states: model.n_states,
            n_symbols: model.n_symbols,
            pi: model.pi.clone(),
            a: model.a.clone(),
            b: model.b.clone(),
        }
    }

    /// Rebuilds and revalidates the model; rejects inconsistent dimensions.
    pub fn into_model(self) -> Result<(String, HmmModel), HmmError> {
        let model = HmmModel::new(self.pi, self.a, self.b)?;
        if model.n_states != self.n_states || model.n_symbols != self.n_symbols {
            return Err(HmmError::InvalidModel(vec![ModelViolation::TransitionShape {
                row: self.n_states,
            }]));
        }
        Ok((self.name, model))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state_model() -> HmmModel {
        HmmModel::new(
            vec![1.0, 0.0],
            vec![vec![0.5, 0.5], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn validate_accepts_well_formed_model() {
        let model = HmmModel::new(
            vec![1.0, 0.0],
            vec![vec![0.5, 0.5], vec![0.3, 0.7]],
            vec![vec![0.6, 0.4], vec![0.2, 0.8]],
        );
        assert!(model.is_ok());
    }

    #[test]
    fn validate_flags_bad_row_sum() {
        let err = HmmModel::new(
            vec![1.0, 0.0],
            vec![vec![0.5, 0.4], vec![0.3, 0.7]],
            vec![vec![0.6, 0.4], vec![0.2, 0.8]],
        )
        .unwrap_err();
        match err {
            HmmError::InvalidModel(v) => {
                assert!(v
                    .iter()
                    .any(|x| matches!(x, ModelViolation::TransitionRowSum { row: 0, .. })));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn validate_flags_negative_emission_entry() {
        let err = HmmModel::new(
            vec![1.0, 0.0],
            vec![vec![0.5, 0.5], vec![0.3, 0.7]],
            vec![vec![0.6, 0.4], vec![-0.1, 1.1]],
        )
        .unwrap_err();
        match err {
            HmmError::InvalidModel(v) => {
                assert!(v.iter().any(|x| matches!(
                    x,
                    ModelViolation::EntryOutOfRange { matrix: "b", row: 1, col: 0, .. }
                )));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn forward_init_deterministic_one_state() {
        let model = HmmModel::new(vec![1.0], vec![vec![1.0]], vec![vec![1.0]]).unwrap();
        let state = model.forward_init(0).unwrap();
        assert_eq!(state.alpha_hat(), &[1.0]);
        assert_eq!(state.log_prob(), 0.0);
        assert_eq!(state.t(), 1);
    }

    #[test]
    fn forward_init_half_mass() {
        let model = HmmModel::new(
            vec![0.5, 0.5],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let state = model.forward_init(0).unwrap();
        assert_eq!(state.alpha_hat(), &[1.0, 0.0]);
        assert!((state.log_prob() - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn forward_init_zero_probability() {
        let model = HmmModel::new(
            vec![1.0, 0.0],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let state = model.forward_init(0).unwrap();
        assert_eq!(state.log_prob(), f64::NEG_INFINITY);
        let mut state = state;
        state.step(&model, 1).unwrap();
        assert_eq!(state.log_prob(), f64::NEG_INFINITY);
        assert_eq!(state.t(), 2);
    }

    #[test]
    fn forward_init_rejects_out_of_alphabet() {
        let model = two_state_model();
        assert!(matches!(
            model.forward_init(7),
            Err(HmmError::OutOfAlphabet { symbol: 7, n_symbols: 2 })
        ));
    }

    #[test]
    fn forward_step_two_state_path() {
        // Only the path 1 -> 2 emits [0, 1]; its probability is 0.5.
        let model = two_state_model();
        let seq = ObservationSequence::from_symbols(vec![0, 1]);
        let lp = sequence_log_prob(&model, &seq).unwrap();
        assert!((lp.exp() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn forward_step_deterministic_self_loop() {
        let model = HmmModel::new(
            vec![1.0, 0.0],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let mut state = model.forward_init(0).unwrap();
        let alpha = state.alpha_hat().to_vec();
        state.step(&model, 0).unwrap();
        assert_eq!(state.alpha_hat(), &alpha[..]);
        assert_eq!(state.log_prob(), 0.0);
    }

    #[test]
    fn sequence_log_prob_rejects_empty() {
        let model = two_state_model();
        let seq = ObservationSequence::from_symbols(vec![]);
        assert!(matches!(sequence_log_prob(&model, &seq), Err(HmmError::EmptySequence)));
    }

    #[test]
    fn sample_deterministic_chain() {
        let model = HmmModel::new(
            vec![1.0, 0.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap();
        for seed in [0, 1, 42] {
            let seq = sample_sequence(&model, 4, seed);
            assert_eq!(seq.symbols, vec![0, 1, 0, 1]);
        }
    }

    #[test]
    fn sample_zero_length() {
        let seq = sample_sequence(&two_state_model(), 0, 3);
        assert!(seq.is_empty());
    }

    #[test]
    fn sample_marginal_frequency() {
        let model = HmmModel::new(vec![1.0], vec![vec![1.0]], vec![vec![0.3, 0.7]]).unwrap();
        let mut zeros = 0usize;
        let n = 10_000;
        for seed in 0..n {
            if sample_sequence(&model, 1, seed as u64).symbols[0] == 0 {
                zeros += 1;
            }
        }
        let freq = zeros as f64 / n as f64;
        assert!((freq - 0.3).abs() < 0.02, "frequency {freq}");
    }

    #[test]
    fn train_degenerate_sequence_finds_analytic_optimum() {
        // For repeated [0, 0, 1] under a 2-state left-to-right model the
        // likelihood (1 - p) b00 b11 (p b00 + b10) is maximized analytically
        // at p = 1/3, b00 = 1, b11 = 2/3, worth 8/27 per sequence.
        let sequences: Vec<_> = (0..20)
            .map(|_| ObservationSequence::from_symbols(vec![0, 0, 1]))
            .collect();
        let init = HmmModel::left_to_right(2, 2, 7).unwrap();
        let out = baum_welch_train(&sequences, &init, &TrainConfig::default()).unwrap();
        assert!(out.model.b()[0][0] >= 0.99, "b00 = {}", out.model.b()[0][0]);
        assert!((out.model.a()[0][0] - 1.0 / 3.0).abs() < 0.01, "a00 = {}", out.model.a()[0][0]);
        assert!((out.model.b()[1][1] - 2.0 / 3.0).abs() < 0.01, "b11 = {}", out.model.b()[1][1]);
        let per_seq = out.log_likelihood_trace.last().unwrap() / 20.0;
        // The emission floor keeps b00 at 0.999, costing a little likelihood.
        assert!((per_seq - (8.0f64 / 27.0).ln()).abs() < 5e-3);
        assert!(out.model.validate().is_empty());
    }

    #[test]
    fn train_improves_over_init_and_generalizes() {
        let source = HmmModel::new(
            vec![0.6, 0.3, 0.1],
            vec![
                vec![0.7, 0.2, 0.1],
                vec![0.1, 0.8, 0.1],
                vec![0.2, 0.3, 0.5],
            ],
            vec![
                vec![0.8, 0.1, 0.1],
                vec![0.1, 0.8, 0.1],
                vec![0.1, 0.1, 0.8],
            ],
        )
        .unwrap();
        let train: Vec<_> = (0..50).map(|s| sample_sequence(&source, 12, s)).collect();
        let held_out: Vec<_> = (100..110).map(|s| sample_sequence(&source, 12, s)).collect();
        let init = HmmModel::new(
            vec![0.4, 0.35, 0.25],
            vec![
                vec![0.5, 0.3, 0.2],
                vec![0.3, 0.5, 0.2],
                vec![0.3, 0.3, 0.4],
            ],
            vec![
                vec![0.5, 0.3, 0.2],
                vec![0.3, 0.4, 0.3],
                vec![0.2, 0.3, 0.5],
            ],
        )
        .unwrap();
        let out = baum_welch_train(&train, &init, &TrainConfig::default()).unwrap();
        let trace = &out.log_likelihood_trace;
        assert!(trace.last().unwrap() >= trace.first().unwrap());
        let score = |model: &HmmModel| -> f64 {
            held_out.iter().map(|s| sequence_log_prob(model, s).unwrap()).sum()
        };
        assert!(score(&out.model) > score(&init));
    }

    #[test]
    fn train_rejects_out_of_alphabet_symbol() {
        let init = HmmModel::left_to_right(2, 2, 0).unwrap();
        let seqs = vec![ObservationSequence::from_symbols(vec![0, 5])];
        assert!(matches!(
            baum_welch_train(&seqs, &init, &TrainConfig::default()),
            Err(HmmError::OutOfAlphabet { symbol: 5, .. })
        ));
    }

    #[test]
    fn train_config_rejects_bad_floor() {
        let init = HmmModel::left_to_right(2, 2, 0).unwrap();
        let seqs = vec![ObservationSequence::from_symbols(vec![0, 1])];
        let config = TrainConfig { emission_floor: 0.6, ..TrainConfig::default() };
        assert!(matches!(
            baum_welch_train(&seqs, &init, &config),
            Err(HmmError::InvalidTrainConfig(_))
        ));
    }

    #[test]
    fn named_model_file_round_trip() {
        let model = two_state_model();
        let file = NamedModelFile::from_model("demo", &model);
        let json = serde_json::to_string(&file).unwrap();
        let parsed: NamedModelFile = serde_json::from_str(&json).unwrap();
        let (name, restored) = parsed.into_model().unwrap();
        assert_eq!(name, "demo");
        assert_eq!(restored, model);
    }

    #[test]
    fn named_model_file_rejects_invalid() {
        let file = NamedModelFile {
            name: "bad".into(),
            n_states: 2,
            n_symbols: 2,
            pi: vec![0.7, 0.7],
            a: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            b: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        };
        assert!(file.into_model().is_err());
    }
}
