//! Per-length maxima of sequence probability: for each prefix length t the
//! table stores log max over all M^t observation sequences of P(O_1..t | lambda).
//!
//! The maximum is exact, computed by depth-first enumeration over symbol
//! prefixes carrying the forward vector. Because prefix probability is
//! nonincreasing in length, a prefix that cannot improve the current best at
//! any deeper level is discarded. A hard node budget bounds the search.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hmm::{ForwardState, HmmError, HmmModel};

/// Default node budget for table construction (10^7 nodes).
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum NormalizerError {
    #[error("node budget exceeded: up to {required} nodes may be required, {allowed} allowed")]
    BudgetExceeded { required: u64, allowed: u64 },
    #[error("t_max must be at least 1")]
    ZeroHorizon,
    #[error("new t_max {new_t_max} must exceed current table length {current}")]
    NotAnExtension { new_t_max: usize, current: usize },
    #[error(transparent)]
    Hmm(#[from] HmmError),
}

/// Precomputed normalizers for one model, indexed by prefix length
/// (entry 0 holds t = 1). `argmax_sequence` attains the last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerTable {
    pub model_name: String,
    pub max_log_prob: Vec<f64>,
    pub argmax_sequence: Vec<usize>,
}

impl NormalizerTable {
    pub fn t_max(&self) -> usize {
        self.max_log_prob.len()
    }

    /// Normalizer for prefix length `t` (1-based).
    pub fn at(&self, t: usize) -> Option<f64> {
        if t == 0 {
            None
        } else {
            self.max_log_prob.get(t - 1).copied()
        }
    }
}

struct Search<'m> {
    model: &'m HmmModel,
    t_max: usize,
    best: Vec<f64>,
    best_seq: Vec<usize>,
    prefix: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn run(&mut self) -> Result<(), NormalizerError> {
        for symbol in 0..self.model.n_symbols() {
            self.charge()?;
            let state = self.model.forward_init(symbol)?;
            self.prefix.push(symbol);
            self.visit(&state)?;
            self.prefix.pop();
        }
        Ok(())
    }

    fn visit(&mut self, state: &ForwardState) -> Result<(), NormalizerError> {
        let depth = state.t();
        let lp = state.log_prob();
        if lp > self.best[depth - 1] {
            self.best[depth - 1] = lp;
            if depth == self.t_max {
                self.best_seq.clear();
                self.best_seq.extend_from_slice(&self.prefix);
            }
        }
        if depth == self.t_max {
            return Ok(());
        }
        // Prefix probability only decays, so recurse only while some deeper
        // level could still be improved.
        if !self.best[depth..self.t_max].iter().any(|&b| b < lp) {
            return Ok(());
        }
        for symbol in 0..self.model.n_symbols() {
            self.charge()?;
            let mut child = state.clone();
            child.step(self.model, symbol)?;
            self.prefix.push(symbol);
            self.visit(&child)?;
            self.prefix.pop();
        }
        Ok(())
    }

    fn charge(&mut self) -> Result<(), NormalizerError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(NormalizerError::BudgetExceeded {
                required: unpruned_node_count(self.model.n_symbols(), self.t_max),
                allowed: self.budget,
            })
        } else {
            Ok(())
        }
    }
}

/// Worst-case node count for an unpruned enumeration: sum of M^t for t = 1..t_max.
fn unpruned_node_count(m: usize, t_max: usize) -> u64 {
    let mut total: u64 = 0;
    let mut level: u64 = 1;
    for _ in 0..t_max {
        level = level.saturating_mul(m as u64);
        total = total.saturating_add(level);
    }
    total
}

pub fn build_normalizer_table(
    name: &str,
    model: &HmmModel,
    t_max: usize,
    budget: u64,
) -> Result<NormalizerTable, NormalizerError> {
    if t_max == 0 {
        return Err(NormalizerError::ZeroHorizon);
    }
    let mut search = Search {
        model,
        t_max,
        best: vec![f64::NEG_INFINITY; t_max],
        best_seq: Vec::new(),
        prefix: Vec::with_capacity(t_max),
        nodes: 0,
        budget,
    };
    search.run()?;
    Ok(NormalizerTable {
        model_name: name.to_string(),
        max_log_prob: search.best,
        argmax_sequence: search.best_seq,
    })
}

/// Grows an existing table to a larger horizon. Existing entries are exact
/// maxima, so they seed the bound and are preserved verbatim.
pub fn extend_normalizer_table(
    table: &NormalizerTable,
    model: &HmmModel,
    new_t_max: usize,
    budget: u64,
) -> Result<NormalizerTable, NormalizerError> {
    let current = table.t_max();
    if new_t_max <= current {
        return Err(NormalizerError::NotAnExtension { new_t_max, current });
    }
    let mut best = table.max_log_prob.clone();
    best.resize(new_t_max, f64::NEG_INFINITY);
    let mut search = Search {
        model,
        t_max: new_t_max,
        best,
        best_seq: Vec::new(),
        prefix: Vec::with_capacity(new_t_max),
        nodes: 0,
        budget,
    };
    search.run()?;
    Ok(NormalizerTable {
        model_name: table.model_name.clone(),
        max_log_prob: search.best,
        argmax_sequence: search.best_seq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::{sequence_log_prob, ObservationSequence};

    fn deterministic_model() -> HmmModel {
        HmmModel::new(
            vec![1.0, 0.0],
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap()
    }

    fn two_state_model() -> HmmModel {
        HmmModel::new(
            vec![1.0, 0.0],
            vec![vec![0.5, 0.5], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap()
    }

    /// Max over every length-t sequence, with no pruning.
    fn exhaustive_max(model: &HmmModel, t: usize) -> (f64, Vec<usize>) {
        let m = model.n_symbols();
        let mut best = f64::NEG_INFINITY;
        let mut best_seq = Vec::new();
        let count = m.pow(t as u32);
        for code in 0..count {
            let mut rest = code;
            let symbols: Vec<usize> = (0..t)
                .map(|_| {
                    let s = rest % m;
                    rest /= m;
                    s
                })
                .collect();
            let lp =
                sequence_log_prob(model, &ObservationSequence::from_symbols(symbols.clone()))
                    .unwrap();
            if lp > best {
                best = lp;
                best_seq = symbols;
            }
        }
        (best, best_seq)
    }

    #[test]
    fn deterministic_model_has_unit_normalizers() {
        let table =
            build_normalizer_table("det", &deterministic_model(), 5, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(table.max_log_prob, vec![0.0; 5]);
        assert_eq!(table.argmax_sequence, vec![0, 1, 0, 1, 0]);
    }

    #[test]
    fn matches_exhaustive_enumeration_exactly() {
        let model = two_state_model();
        let table = build_normalizer_table("m", &model, 4, DEFAULT_NODE_BUDGET).unwrap();
        for t in 1..=4 {
            let (expected, _) = exhaustive_max(&model, t);
            assert_eq!(table.max_log_prob[t - 1], expected, "t = {t}");
        }
    }

    #[test]
    fn table_is_nonincreasing() {
        let model = two_state_model();
        let table = build_normalizer_table("m", &model, 6, DEFAULT_NODE_BUDGET).unwrap();
        for w in table.max_log_prob.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn witness_reproduces_final_entry() {
        let model = two_state_model();
        let table = build_normalizer_table("m", &model, 5, DEFAULT_NODE_BUDGET).unwrap();
        let lp = sequence_log_prob(
            &model,
            &ObservationSequence::from_symbols(table.argmax_sequence.clone()),
        )
        .unwrap();
        assert!((lp - table.max_log_prob[4]).abs() <= 1e-12);
    }

    #[test]
    fn extend_matches_fresh_build() {
        let model = two_state_model();
        let table = build_normalizer_table("m", &model, 4, DEFAULT_NODE_BUDGET).unwrap();
        let extended = extend_normalizer_table(&table, &model, 6, DEFAULT_NODE_BUDGET).unwrap();
        let fresh = build_normalizer_table("m", &model, 6, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(extended.max_log_prob, fresh.max_log_prob);
    }

    #[test]
    fn extend_deterministic_table() {
        let model = deterministic_model();
        let table = build_normalizer_table("det", &model, 4, DEFAULT_NODE_BUDGET).unwrap();
        let extended = extend_normalizer_table(&table, &model, 6, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(extended.max_log_prob[4], 0.0);
        assert_eq!(extended.max_log_prob[5], 0.0);
    }

    #[test]
    fn extend_rejects_smaller_horizon() {
        let model = deterministic_model();
        let table = build_normalizer_table("det", &model, 4, DEFAULT_NODE_BUDGET).unwrap();
        assert!(matches!(
            extend_normalizer_table(&table, &model, 4, DEFAULT_NODE_BUDGET),
            Err(NormalizerError::NotAnExtension { new_t_max: 4, current: 4 })
        ));
    }

    #[test]
    fn budget_exceeded_names_counts() {
        let model = two_state_model();
        match build_normalizer_table("m", &model, 6, 10) {
            Err(NormalizerError::BudgetExceeded { required, allowed }) => {
                assert_eq!(allowed, 10);
                assert_eq!(required, 2 + 4 + 8 + 16 + 32 + 64);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn dominates_sampled_sequences() {
        let model = HmmModel::new(
            vec![0.5, 0.5],
            vec![vec![0.6, 0.4], vec![0.3, 0.7]],
            vec![vec![0.7, 0.3], vec![0.2, 0.8]],
        )
        .unwrap();
        let table = build_normalizer_table("m", &model, 6, DEFAULT_NODE_BUDGET).unwrap();
        for seed in 0..200 {
            let seq = crate::hmm::sample_sequence(&model, 6, seed);
            let mut state = model.forward_init(seq.symbols[0]).unwrap();
            for &s in &seq.symbols[1..] {
                assert!(state.log_prob() <= table.at(state.t()).unwrap() + 1e-12);
                state.step(&model, s).unwrap();
            }
            assert!(state.log_prob() <= table.at(6).unwrap() + 1e-12);
        }
    }
}
