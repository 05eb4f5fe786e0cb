//! Shared helpers for the integration suites: random model generation and
//! an independent brute-force probability oracle.

use behavior_hmm::{HmmModel, ObservationSequence};
use rand::Rng;

/// A random stochastic row with every entry strictly positive.
pub fn random_row<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|e| *e /= sum);
    row
}

/// A fully random (dense) model with N states and M symbols.
pub fn random_model<R: Rng>(rng: &mut R, n: usize, m: usize) -> HmmModel {
    let pi = random_row(rng, n);
    let a = (0..n).map(|_| random_row(rng, n)).collect();
    let b = (0..n).map(|_| random_row(rng, m)).collect();
    HmmModel::new(pi, a, b).expect("rows are stochastic by construction")
}

pub fn random_symbols<R: Rng>(rng: &mut R, m: usize, t: usize) -> Vec<usize> {
    (0..t).map(|_| rng.gen_range(0..m)).collect()
}

/// Brute-force P(O|lambda) by summing over every hidden state path, in plain
/// probability space. Exponential in T; the independent oracle for the
/// scaled forward recursion.
pub fn brute_force_prob(model: &HmmModel, symbols: &[usize]) -> f64 {
    let n = model.n_states();
    let t_len = symbols.len();
    assert!(t_len >= 1);
    let mut total = 0.0;
    let n_paths = n.pow(t_len as u32);
    for code in 0..n_paths {
        let mut rest = code;
        let mut path = Vec::with_capacity(t_len);
        for _ in 0..t_len {
            path.push(rest % n);
            rest /= n;
        }
        let mut p = model.pi()[path[0]] * model.b()[path[0]][symbols[0]];
        for step in 1..t_len {
            p *= model.a()[path[step - 1]][path[step]] * model.b()[path[step]][symbols[step]];
        }
        total += p;
    }
    total
}

/// All M^T symbol sequences of length T, as ObservationSequences.
pub fn all_sequences(m: usize, t_len: usize) -> Vec<ObservationSequence> {
    let count = m.pow(t_len as u32);
    (0..count)
        .map(|code| {
            let mut rest = code;
            let symbols = (0..t_len)
                .map(|_| {
                    let s = rest % m;
                    rest /= m;
                    s
                })
                .collect();
            ObservationSequence::from_symbols(symbols)
        })
        .collect()
}
