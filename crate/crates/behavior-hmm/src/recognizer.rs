//! Online recognition over a set of per-behavior HMMs.
//!
//! After every observation event a session reports, for each behavior, the
//! raw sequence log-probability, the normalized likelihood
//! `L = P(O_1..t) / max_O P(O_1..t) * min(t / T_i, 1)`, the closed-set
//! posterior over all behaviors, and the argmax behavior. L answers the
//! open-set question (is this behavior occurring at all?) while the
//! posterior answers the closed-set one; both come from one forward pass.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::hmm::{ForwardState, HmmError, HmmModel};
use crate::normalizer::{
    build_normalizer_table, extend_normalizer_table, NormalizerError, NormalizerTable,
    DEFAULT_NODE_BUDGET,
};

/// Absolute tolerance for the witness check at load time.
pub const WITNESS_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum RecognizerError {
    #[error(transparent)]
    Hmm(#[from] HmmError),
    #[error(transparent)]
    Normalizer(#[from] NormalizerError),
    #[error("behavior '{name}': t_nominal must be at least 1")]
    ZeroNominalLength { name: String },
    #[error("behavior '{name}': normalizer covers t_max {t_max}, below t_nominal {t_nominal}")]
    NormalizerTooShort { name: String, t_max: usize, t_nominal: usize },
    #[error(
        "behavior '{name}': argmax_sequence yields log-prob {witness}, table says {stored}"
    )]
    WitnessMismatch { name: String, witness: f64, stored: f64 },
    #[error("alphabet mismatch: behavior '{name}' has {n_symbols} symbols, expected {expected}")]
    AlphabetMismatch { name: String, n_symbols: usize, expected: usize },
    #[error("behavior set is empty")]
    EmptyBehaviorSet,
    #[error("posterior is undefined: all behaviors have zero probability")]
    UndefinedPosterior,
    #[error("normalizer does not cover step {t} for behavior '{name}'")]
    NormalizerNotCovering { name: String, t: usize },
    #[error("failed to read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("failed to parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
}

/// A named HMM together with its nominal event count T_i and the
/// precomputed max-sequence normalizer table.
///
/// Behaviors are closed loops an agent may traverse in either direction.
/// Reversing direction reverses the order of the turns and negates each
/// turn angle, so the clockwise event stream is not a mirrored copy of the
/// counter-clockwise one — it is a different sequence. A behavior model
/// therefore optionally carries a second HMM trained on the reverse-form
/// sequences; recognition scores an incoming stream under both and keeps
/// the better orientation.
#[derive(Debug, Clone)]
pub struct BehaviorModel {
    name: String,
    hmm: HmmModel,
    t_nominal: usize,
    normalizer: NormalizerTable,
    reverse: Option<ReverseVariant>,
}

/// The reverse-traversal companion model of a behavior.
#[derive(Debug, Clone)]
pub struct ReverseVariant {
    hmm: HmmModel,
    normalizer: NormalizerTable,
}

impl BehaviorModel {
    /// Validates the model, the table horizon, and the witness property
    /// (the stored argmax sequence must reproduce the stored maximum).
    pub fn new(
        name: String,
        hmm: HmmModel,
        t_nominal: usize,
        normalizer: NormalizerTable,
    ) -> Result<Self, RecognizerError> {
        let violations = hmm.validate();
        if !violations.is_empty() {
            return Err(HmmError::InvalidModel(violations).into());
        }
        if t_nominal == 0 {
            return Err(RecognizerError::ZeroNominalLength { name });
        }
        if normalizer.t_max() < t_nominal {
            return Err(RecognizerError::NormalizerTooShort {
                name,
                t_max: normalizer.t_max(),
                t_nominal,
            });
        }
        let stored = normalizer.max_log_prob[normalizer.t_max() - 1];
        let witness = replay(&hmm, &normalizer.argmax_sequence)?;
        if !witness_matches(witness, stored) {
            return Err(RecognizerError::WitnessMismatch { name, witness, stored });
        }
        Ok(BehaviorModel { name, hmm, t_nominal, normalizer, reverse: None })
    }

    /// Attaches a reverse-traversal companion model, applying the same
    /// validation as the primary (model stochasticity, table horizon,
    /// witness replay).
    pub fn with_reverse(
        mut self,
        hmm: HmmModel,
        normalizer: NormalizerTable,
    ) -> Result<Self, RecognizerError> {
        let violations = hmm.validate();
        if !violations.is_empty() {
            return Err(HmmError::InvalidModel(violations).into());
        }
        if normalizer.t_max() < self.t_nominal {
            return Err(RecognizerError::NormalizerTooShort {
                name: self.name,
                t_max: normalizer.t_max(),
                t_nominal: self.t_nominal,
            });
        }
        let stored = normalizer.max_log_prob[normalizer.t_max() - 1];
        let witness = replay(&hmm, &normalizer.argmax_sequence)?;
        if !witness_matches(witness, stored) {
            return Err(RecognizerError::WitnessMismatch { name: self.name, witness, stored });
        }
        self.reverse = Some(ReverseVariant { hmm, normalizer });
        Ok(self)
    }

    /// Builds the normalizer table for a reverse-traversal HMM and attaches
    /// it.
    pub fn attach_reverse_hmm(
        self,
        hmm: HmmModel,
        budget: u64,
    ) -> Result<Self, RecognizerError> {
        let normalizer =
            build_normalizer_table(&self.name, &hmm, self.t_nominal.max(1), budget)?;
        self.with_reverse(hmm, normalizer)
    }

    /// Trains nothing; builds the table for an already-trained HMM.
    pub fn from_hmm(
        name: &str,
        hmm: HmmModel,
        t_nominal: usize,
        budget: u64,
    ) -> Result<Self, RecognizerError> {
        let normalizer = build_normalizer_table(name, &hmm, t_nominal.max(1), budget)?;
        BehaviorModel::new(name.to_string(), hmm, t_nominal, normalizer)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn hmm(&self) -> &HmmModel {
        &self.hmm
    }

    pub fn t_nominal(&self) -> usize {
        self.t_nominal
    }

    pub fn normalizer(&self) -> &NormalizerTable {
        &self.normalizer
    }

    pub fn reverse_hmm(&self) -> Option<&HmmModel> {
        self.reverse.as_ref().map(|r| &r.hmm)
    }

    /// L = exp(log_prob - max_log_prob[t]) * min(t / T_i, 1), in [0, 1].
    pub fn likelihood(&self, state: &ForwardState) -> Result<f64, RecognizerError> {
        let t = state.t();
        let max_lp = self.normalizer.at(t).ok_or_else(|| {
            RecognizerError::NormalizerNotCovering { name: self.name.clone(), t }
        })?;
        if state.log_prob() == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let ratio = (state.log_prob() - max_lp).exp().min(1.0);
        let fraction = (t as f64 / self.t_nominal as f64).min(1.0);
        Ok(ratio * fraction)
    }

    /// L for a forward state advanced under the reverse-traversal model.
    pub fn likelihood_reverse(&self, state: &ForwardState) -> Result<f64, RecognizerError> {
        let rev = self.reverse.as_ref().expect("reverse variant present");
        let t = state.t();
        let max_lp = rev.normalizer.at(t).ok_or_else(|| {
            RecognizerError::NormalizerNotCovering { name: self.name.clone(), t }
        })?;
        if state.log_prob() == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let ratio = (state.log_prob() - max_lp).exp().min(1.0);
        let fraction = (t as f64 / self.t_nominal as f64).min(1.0);
        Ok(ratio * fraction)
    }

    /// Grows the normalizer tables so they cover prefix length `t`.
    pub fn ensure_normalizer(&mut self, t: usize, budget: u64) -> Result<(), RecognizerError> {
        if t > self.normalizer.t_max() {
            self.normalizer = extend_normalizer_table(&self.normalizer, &self.hmm, t, budget)?;
        }
        if let Some(rev) = self.reverse.as_mut() {
            if t > rev.normalizer.t_max() {
                rev.normalizer = extend_normalizer_table(&rev.normalizer, &rev.hmm, t, budget)?;
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> BehaviorModelFile {
        BehaviorModelFile {
            name: self.name.clone(),
            n_states: self.hmm.n_states(),
            n_symbols: self.hmm.n_symbols(),
            pi: self.hmm.pi().to_vec(),
            a: self.hmm.a().to_vec(),
            b: self.hmm.b().to_vec(),
            t_nominal: self.t_nominal,
            max_log_prob: self.normalizer.max_log_prob.clone(),
            argmax_sequence: self.normalizer.argmax_sequence.clone(),
            reverse: self.reverse.as_ref().map(|rev| ReverseModelFile {
                pi: rev.hmm.pi().to_vec(),
                a: rev.hmm.a().to_vec(),
                b: rev.hmm.b().to_vec(),
                max_log_prob: rev.normalizer.max_log_prob.clone(),
                argmax_sequence: rev.normalizer.argmax_sequence.clone(),
            }),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), RecognizerError> {
        let json = serde_json::to_string_pretty(&self.to_file()).expect("serializable");
        fs::write(path, json).map_err(|source| RecognizerError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, RecognizerError> {
        let text = fs::read_to_string(path).map_err(|source| RecognizerError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: BehaviorModelFile =
            serde_json::from_str(&text).map_err(|source| RecognizerError::Parse {
                path: path.to_path_buf(),
                source,
            })?;
        file.into_behavior_model()
    }
}

fn replay(hmm: &HmmModel, symbols: &[usize]) -> Result<f64, RecognizerError> {
    let (&first, rest) = symbols
        .split_first()
        .ok_or(RecognizerError::Hmm(HmmError::EmptySequence))?;
    let mut state = hmm.forward_init(first)?;
    for &s in rest {
        state.step(hmm, s)?;
    }
    Ok(state.log_prob())
}

fn witness_matches(witness: f64, stored: f64) -> bool {
    if witness == f64::NEG_INFINITY && stored == f64::NEG_INFINITY {
        return true;
    }
    (witness - stored).abs() <= WITNESS_TOL
}

/// On-disk behavior model: the bare HMM file plus `t_nominal` and the
/// embedded normalizer table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviorModelFile {
    pub name: String,
    pub n_states: usize,
    pub n_symbols: usize,
    pub pi: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub t_nominal: usize,
    pub max_log_prob: Vec<f64>,
    pub argmax_sequence: Vec<usize>,
    /// Optional reverse-traversal companion model; absent for behaviors
    /// defined over a single direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reverse: Option<ReverseModelFile>,
}

/// On-disk form of the reverse-traversal companion model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReverseModelFile {
    pub pi: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub max_log_prob: Vec<f64>,
    pub argmax_sequence: Vec<usize>,
}

impl BehaviorModelFile {
    pub fn into_behavior_model(self) -> Result<BehaviorModel, RecognizerError> {
        let hmm = HmmModel::new(self.pi, self.a, self.b)?;
        let normalizer = NormalizerTable {
            model_name: self.name.clone(),
            max_log_prob: self.max_log_prob,
            argmax_sequence: self.argmax_sequence,
        };
        let model = BehaviorModel::new(self.name, hmm, self.t_nominal, normalizer)?;
        match self.reverse {
            None => Ok(model),
            Some(rev) => {
                let hmm = HmmModel::new(rev.pi, rev.a, rev.b)?;
                let normalizer = NormalizerTable {
                    model_name: model.name.clone(),
                    max_log_prob: rev.max_log_prob,
                    argmax_sequence: rev.argmax_sequence,
                };
                model.with_reverse(hmm, normalizer)
            }
        }
    }
}

/// A validated, name-sorted set of behavior models over one alphabet.
#[derive(Debug, Clone)]
pub struct BehaviorSet {
    behaviors: Vec<BehaviorModel>,
    n_symbols: usize,
}

impl BehaviorSet {
    pub fn new(mut behaviors: Vec<BehaviorModel>) -> Result<Self, RecognizerError> {
        if behaviors.is_empty() {
            return Err(RecognizerError::EmptyBehaviorSet);
        }
        behaviors.sort_by(|x, y| x.name.cmp(&y.name));
        let n_symbols = behaviors[0].hmm.n_symbols();
        for b in &behaviors[1..] {
            if b.hmm.n_symbols() != n_symbols {
                return Err(RecognizerError::AlphabetMismatch {
                    name: b.name.clone(),
                    n_symbols: b.hmm.n_symbols(),
                    expected: n_symbols,
                });
            }
        }
        Ok(BehaviorSet { behaviors, n_symbols })
    }

    pub fn behaviors(&self) -> &[BehaviorModel] {
        &self.behaviors
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn names(&self) -> Vec<&str> {
        self.behaviors.iter().map(|b| b.name.as_str()).collect()
    }

    pub fn start_session(&self) -> RecognitionSession {
        RecognitionSession {
            behaviors: self.behaviors.clone(),
            states: vec![None; self.behaviors.len()],
            reverse_states: vec![None; self.behaviors.len()],
            t: 0,
            history: Vec::new(),
            extension_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// Loads every behavior model file in a directory (or an explicit file
/// list), validating models, alphabets, and normalizer witnesses.
pub fn load_behavior_set(path: &Path) -> Result<BehaviorSet, RecognizerError> {
    let mut files: Vec<PathBuf> = if path.is_dir() {
        let entries = fs::read_dir(path).map_err(|source| RecognizerError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
            .collect()
    } else {
        vec![path.to_path_buf()]
    };
    files.sort();
    load_behavior_files(&files)
}

pub fn load_behavior_files(paths: &[PathBuf]) -> Result<BehaviorSet, RecognizerError> {
    let behaviors = paths
        .iter()
        .map(|p| BehaviorModel::load(p))
        .collect::<Result<Vec<_>, _>>()?;
    BehaviorSet::new(behaviors)
}

/// Closed-set normalization: p_i = exp(lp_i) / sum_j exp(lp_j), computed by
/// shifting by the maximum before exponentiating.
pub fn exclusive_posterior(log_probs: &[f64]) -> Result<Vec<f64>, RecognizerError> {
    let max = log_probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(RecognizerError::UndefinedPosterior);
    }
    let unnorm: Vec<f64> = log_probs.iter().map(|&lp| (lp - max).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    Ok(unnorm.into_iter().map(|u| u / total).collect())
}

/// Per-event recognition output across all behaviors in the session.
#[derive(Debug, Clone, PartialEq)]
pub struct RecognitionReport {
    pub t_event: usize,
    pub time: f64,
    /// Parallel to the session's name-sorted behavior order.
    pub names: Vec<String>,
    pub log_probs: Vec<f64>,
    pub likelihoods: Vec<f64>,
    /// `None` when every behavior has zero probability.
    pub posterior: Option<Vec<f64>>,
    pub argmax: String,
}

impl RecognitionReport {
    /// One JSON Lines record:
    /// `{"t_event", "time", "L": {name: float}, "posterior": {...}|null, "argmax"}`.
    pub fn to_json_line(&self) -> String {
        let l: BTreeMap<&str, f64> = self
            .names
            .iter()
            .map(String::as_str)
            .zip(self.likelihoods.iter().copied())
            .collect();
        let posterior = match &self.posterior {
            Some(p) => json!(self
                .names
                .iter()
                .map(String::as_str)
                .zip(p.iter().copied())
                .collect::<BTreeMap<&str, f64>>()),
            None => serde_json::Value::Null,
        };
        json!({
            "t_event": self.t_event,
            "time": self.time,
            "L": l,
            "posterior": posterior,
            "argmax": self.argmax,
        })
        .to_string()
    }
}

/// One online recognition stream: owns a forward state per behavior and the
/// report history. Events must be applied in order by a single caller.
#[derive(Debug, Clone)]
pub struct RecognitionSession {
    behaviors: Vec<BehaviorModel>,
    states: Vec<Option<ForwardState>>,
    /// Forward states under each behavior's reverse-traversal model (when
    /// present); the reported score is the better of the two orientations.
    reverse_states: Vec<Option<ForwardState>>,
    t: usize,
    history: Vec<RecognitionReport>,
    extension_budget: u64,
}

impl RecognitionSession {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn history(&self) -> &[RecognitionReport] {
        &self.history
    }

    pub fn behaviors(&self) -> &[BehaviorModel] {
        &self.behaviors
    }

    /// Consumes one event, advancing every behavior's forward state and
    /// producing the report for this step. The session is untouched when the
    /// symbol is outside the shared alphabet.
    pub fn step(&mut self, time: f64, symbol: usize) -> Result<&RecognitionReport, RecognizerError> {
        let n_symbols = self.behaviors[0].hmm.n_symbols();
        if symbol >= n_symbols {
            return Err(HmmError::OutOfAlphabet { symbol, n_symbols }.into());
        }
        let next_t = self.t + 1;
        for behavior in self.behaviors.iter_mut() {
            behavior.ensure_normalizer(next_t, self.extension_budget)?;
        }
        let mut log_probs = Vec::with_capacity(self.behaviors.len());
        let mut likelihoods = Vec::with_capacity(self.behaviors.len());
        for (i, behavior) in self.behaviors.iter().enumerate() {
            let slot = &mut self.states[i];
            let state = match slot {
                None => slot.insert(behavior.hmm().forward_init(symbol)?),
                Some(state) => {
                    state.step(behavior.hmm(), symbol)?;
                    state
                }
            };
            let mut lp = state.log_prob();
            let mut l = behavior.likelihood(state)?;
            if let Some(rev_hmm) = behavior.reverse_hmm() {
                let slot = &mut self.reverse_states[i];
                let state = match slot {
                    None => slot.insert(rev_hmm.forward_init(symbol)?),
                    Some(state) => {
                        state.step(rev_hmm, symbol)?;
                        state
                    }
                };
                let l_rev = behavior.likelihood_reverse(state)?;
                // Keep the better orientation for this behavior.
                if l_rev > l || (l_rev == l && state.log_prob() > lp) {
                    lp = state.log_prob();
                    l = l_rev;
                }
            }
            log_probs.push(lp);
            likelihoods.push(l);
        }
        self.t = next_t;
        let posterior = exclusive_posterior(&log_probs).ok();
        let argmax_idx = argmax_lowest_index(&likelihoods);
        let report = RecognitionReport {
            t_event: self.t,
            time,
            names: self.behaviors.iter().map(|b| b.name.clone()).collect(),
            log_probs,
            likelihoods,
            posterior,
            argmax: self.behaviors[argmax_idx].name.clone(),
        };
        self.history.push(report);
        Ok(self.history.last().unwrap())
    }
}

/// Ties resolve to the lowest index.
fn argmax_lowest_index(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
