//! Structural checks on finite-state channels.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::channels::FsMac;
use crate::error::{Error, Result};
use crate::prob::alphabet::check_cells;

/// Tolerance for deciding that state transitions ignore the inputs.
const INPUT_FREE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub holds: bool,
    pub max_violation: f64,
}

/// Tests whether `P(y, s' | x1, x2, s) = P(s' | s) P(y | x1, x2, s)` with
/// the state chain free of the inputs.
pub fn markov_factorization_check(ch: &FsMac, tol: f64) -> FactorizationReport {
    let ns = ch.states().size();
    let (a1, a2) = (ch.x1().size(), ch.x2().size());
    let mut worst: f64 = 0.0;
    for s in 0..ns {
        let reference = ch.state_transition(0, 0, s);
        for x1 in 0..a1 {
            for x2 in 0..a2 {
                let t = ch.state_transition(x1, x2, s);
                for (u, v) in t.iter().zip(&reference) {
                    worst = worst.max((u - v).abs());
                }
                let row = ch.row(x1, x2, s);
                for y in 0..ch.y().size() {
                    let py = ch.output_prob(x1, x2, s, y);
                    for (sn, &tv) in reference.iter().enumerate() {
                        worst = worst.max((row[y * ns + sn] - tv * py).abs());
                    }
                }
            }
        }
    }
    FactorizationReport {
        holds: worst <= tol,
        max_violation: worst,
    }
}

/// The input-free state transition matrix, if the channel has one.
pub fn state_chain(ch: &FsMac) -> Option<Vec<Vec<f64>>> {
    let ns = ch.states().size();
    let chain: Vec<Vec<f64>> = (0..ns).map(|s| ch.state_transition(0, 0, s)).collect();
    for (s, reference) in chain.iter().enumerate() {
        for x1 in 0..ch.x1().size() {
            for x2 in 0..ch.x2().size() {
                let t = ch.state_transition(x1, x2, s);
                if t.iter()
                    .zip(reference)
                    .any(|(u, v)| (u - v).abs() > INPUT_FREE_TOL)
                {
                    return None;
                }
            }
        }
    }
    Some(chain)
}

/// The unique stationary pmf of a stochastic matrix.
///
/// Accepts exactly the chains with a single recurrent class that is
/// aperiodic (transient states allowed); these are the chains for which
/// some power has a strictly positive column.
pub fn stationary_distribution(chain: &[Vec<f64>]) -> Result<Vec<f64>> {
    let ns = chain.len();
    if ns == 0 {
        return Err(Error::EmptyAlphabet);
    }
    for (s, row) in chain.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if row.len() != ns || (sum - 1.0).abs() > 1e-12 || row.iter().any(|v| *v < 0.0) {
            return Err(Error::NotNormalized {
                what: format!("state chain row {s}"),
                sum,
            });
        }
    }
    if !has_positive_column_power(chain) {
        return Err(Error::NoStationary(
            "state chain is reducible or periodic; no unique stationary distribution".into(),
        ));
    }
    // Solve pi (P - I) = 0 with one balance equation replaced by sum(pi) = 1.
    let mut a = DMatrix::<f64>::zeros(ns, ns);
    for i in 0..ns {
        for j in 0..ns {
            a[(j, i)] = chain[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for i in 0..ns {
        a[(ns - 1, i)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(ns);
    b[ns - 1] = 1.0;
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::NoStationary("singular balance equations".into()))?;
    let mut pi: Vec<f64> = sol.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    let residual = (0..ns)
        .map(|j| ((0..ns).map(|i| pi[i] * chain[i][j]).sum::<f64>() - pi[j]).abs())
        .fold(0.0, f64::max);
    if residual > 1e-12 {
        return Err(Error::NoStationary(format!(
            "balance residual {residual:e} above 1e-12"
        )));
    }
    Ok(pi)
}

fn has_positive_column_power(chain: &[Vec<f64>]) -> bool {
    let ns = chain.len();
    let support: Vec<Vec<bool>> = chain
        .iter()
        .map(|r| r.iter().map(|&v| v > 0.0).collect())
        .collect();
    let mut power = support.clone();
    for _ in 0..ns * ns + ns {
        if (0..ns).any(|j| (0..ns).all(|i| power[i][j])) {
            return true;
        }
        let mut next = vec![vec![false; ns]; ns];
        for i in 0..ns {
            for k in 0..ns {
                if power[i][k] {
                    for j in 0..ns {
                        next[i][j] |= support[k][j];
                    }
                }
            }
        }
        power = next;
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IndecomposabilityReport {
    pub n: usize,
    /// `max |P(s_n | x^n, s0) - P(s_n | x^n, s0')|` over inputs, states and
    /// pairs of initial states.
    pub spread: f64,
    pub indecomposable: bool,
}

/// Finite-horizon surrogate for indecomposability: how much the initial
/// state still matters for the state at time `n`.
pub fn indecomposability_diagnostic(
    ch: &FsMac,
    n: usize,
    eps: f64,
) -> Result<IndecomposabilityReport> {
    let ns = ch.states().size();
    let inputs = ch.x1().size() * ch.x2().size();
    check_cells((inputs as u128).saturating_pow(n as u32) * (ns * ns) as u128)?;
    let step: Vec<Vec<f64>> = (0..inputs)
        .map(|u| {
            let (x1, x2) = (u / ch.x2().size(), u % ch.x2().size());
            (0..ns)
                .flat_map(|s| ch.state_transition(x1, x2, s))
                .collect()
        })
        .collect();
    let identity: Vec<f64> = (0..ns * ns)
        .map(|k| if k / ns == k % ns { 1.0 } else { 0.0 })
        .collect();
    let mut spread: f64 = 0.0;
    let mut stack = vec![(identity, 0usize)];
    while let Some((m, depth)) = stack.pop() {
        if depth == n {
            for a in 0..ns {
                for b in a + 1..ns {
                    for j in 0..ns {
                        spread = spread.max((m[a * ns + j] - m[b * ns + j]).abs());
                    }
                }
            }
            continue;
        }
        for t in &step {
            let mut next = vec![0.0; ns * ns];
            for i in 0..ns {
                for k in 0..ns {
                    let v = m[i * ns + k];
                    if v != 0.0 {
                        for j in 0..ns {
                            next[i * ns + j] += v * t[k * ns + j];
                        }
                    }
                }
            }
            stack.push((next, depth + 1));
        }
    }
    Ok(IndecomposabilityReport {
        n,
        spread,
        indecomposable: spread <= eps,
    })
}
