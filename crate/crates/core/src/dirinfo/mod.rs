//! Directed information and related functionals, all in bits.
//!
//! Every directed information here is a difference of two causally
//! conditioned output entropies,
//! `H(Y^n || C^n) = sum_i H(Y_i | Y^{i-1}, C^i)`, each computed from prefix
//! marginals of the joint. The log-ratio expectation form is computed
//! separately from extracted causal conditionals and reported alongside.

mod entropy_rate;
pub(crate) mod fast;
mod zero;

pub use entropy_rate::{entropy_rate_bounds, ge_sumrate_identity_check, EntropyBounds, GeIdentity};
pub use zero::{zero_region_check, ZeroCheckOptions, ZeroVerdict};

use serde::{Deserialize, Serialize};

use crate::channels::FsMac;
use crate::error::{Error, Result};
use crate::prob::alphabet::decode_into;
use crate::prob::pmf::entropy_bits;
use crate::prob::{
    causal_conditional, channel_causal_law, joint_law, CausalChannelLaw, CausalRequest,
    InitialState, JointLaw, PolicyPair, Prefixes, Stream, User,
};

/// Terms in `(-TINY, 0)` are rounding noise and are reported as zero.
const TINY: f64 = 1e-12;

/// Which inputs a directed information is measured from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    X1,
    X2,
    Both,
}

/// A directed-information quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiKind {
    /// `I(X^n -> Y^n)` from the given inputs.
    Directed(Source),
    /// `I(X_u^n -> Y^n || X_other^n)`.
    Conditioned(User),
}

impl DiKind {
    /// The three pentagon quantities in the order `R1, R2, R1 + R2`.
    pub const PENTAGON: [DiKind; 3] = [
        DiKind::Conditioned(User::One),
        DiKind::Conditioned(User::Two),
        DiKind::Directed(Source::Both),
    ];

    /// (conditioning set without the source, conditioning set with it).
    fn sets(self) -> (Cond, Cond) {
        match self {
            DiKind::Directed(Source::X1) => (Cond::NONE, Cond::X1),
            DiKind::Directed(Source::X2) => (Cond::NONE, Cond::X2),
            DiKind::Directed(Source::Both) => (Cond::NONE, Cond::BOTH),
            DiKind::Conditioned(User::One) => (Cond::X2, Cond::BOTH),
            DiKind::Conditioned(User::Two) => (Cond::X1, Cond::BOTH),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Cond {
    pub x1: bool,
    pub x2: bool,
}

impl Cond {
    pub const NONE: Cond = Cond {
        x1: false,
        x2: false,
    };
    pub const X1: Cond = Cond {
        x1: true,
        x2: false,
    };
    pub const X2: Cond = Cond {
        x1: false,
        x2: true,
    };
    pub const BOTH: Cond = Cond { x1: true, x2: true };

    fn prefixes(self, i: usize, y: usize) -> Prefixes {
        Prefixes::new(if self.x1 { i } else { 0 }, if self.x2 { i } else { 0 }, y)
    }

    fn request(self) -> CausalRequest {
        let mut given = Vec::new();
        if self.x1 {
            given.push((Stream::X1, 0));
        }
        if self.x2 {
            given.push((Stream::X2, 0));
        }
        CausalRequest {
            target: Stream::Y,
            given,
        }
    }
}

/// Per-step terms of a directed information and its two computed totals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirInfoBreakdown {
    pub n: usize,
    /// `I(X^i; Y_i | Y^{i-1}, ...)` for `i = 1..n`, in bits.
    pub per_step: Vec<f64>,
    /// Sum of `per_step`.
    pub total: f64,
    /// `E[log P(Y^n || X^n, ...) / P(Y^n || ...)]`, computed independently.
    pub expectation_form: f64,
}

impl DirInfoBreakdown {
    /// `total / n`, the per-use value.
    pub fn rate(&self) -> f64 {
        self.total / self.n as f64
    }
}

/// `H(Y_i | Y^{i-1}, C^i)` for `i = 1..n`.
fn causal_entropy_steps(joint: &JointLaw, cond: Cond) -> Vec<f64> {
    (1..=joint.dims().n)
        .map(|i| joint.entropy(cond.prefixes(i, i)) - joint.entropy(cond.prefixes(i, i - 1)))
        .collect()
}

fn expectation_form(joint: &JointLaw, base: Cond, full: Cond) -> f64 {
    let num = causal_conditional(joint, &full.request()).expect("supported request");
    let den = causal_conditional(joint, &base.request()).expect("supported request");
    let d = *joint.dims();
    let (mut x1, mut x2, mut y) = (vec![0; d.n], vec![0; d.n], vec![0; d.n]);
    let mut acc = 0.0;
    for (cell, &p) in joint.as_slice().iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let yc = cell % d.n_y();
        let x2c = (cell / d.n_y()) % d.n_x2();
        let x1c = cell / (d.n_y() * d.n_x2());
        decode_into(x1c, d.x1.size(), &mut x1);
        decode_into(x2c, d.x2.size(), &mut x2);
        decode_into(yc, d.y.size(), &mut y);
        let a = num
            .eval(&x1, &x2, &y)
            .expect("positive-probability context");
        let b = den
            .eval(&x1, &x2, &y)
            .expect("positive-probability context");
        acc += p * (a / b).log2();
    }
    acc
}

fn breakdown(joint: &JointLaw, kind: DiKind) -> DirInfoBreakdown {
    let (base, full) = kind.sets();
    let hb = causal_entropy_steps(joint, base);
    let hf = causal_entropy_steps(joint, full);
    let per_step: Vec<f64> = hb
        .iter()
        .zip(&hf)
        .map(|(a, b)| {
            let v = a - b;
            if v < 0.0 && v > -TINY {
                0.0
            } else {
                v
            }
        })
        .collect();
    DirInfoBreakdown {
        n: joint.dims().n,
        total: per_step.iter().sum(),
        per_step,
        expectation_form: expectation_form(joint, base, full),
    }
}

/// `I(X^n -> Y^n)` with `X` the chosen inputs.
pub fn directed_info(joint: &JointLaw, source: Source) -> DirInfoBreakdown {
    breakdown(joint, DiKind::Directed(source))
}

/// `I(X_u^n -> Y^n || X_other^n)`.
pub fn directed_info_cc(joint: &JointLaw, source: User) -> DirInfoBreakdown {
    breakdown(joint, DiKind::Conditioned(source))
}

/// Any [`DiKind`].
pub fn directed_info_kind(joint: &JointLaw, kind: DiKind) -> DirInfoBreakdown {
    breakdown(joint, kind)
}

/// The value of a [`DiKind`] without the expectation-form cross-check.
pub fn directed_info_total(joint: &JointLaw, kind: DiKind) -> f64 {
    let (base, full) = kind.sets();
    let hb: f64 = causal_entropy_steps(joint, base).iter().sum();
    let hf: f64 = causal_entropy_steps(joint, full).iter().sum();
    hb - hf
}

/// Averaging over a distribution of initial states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateAverage {
    pub weights: Vec<f64>,
    /// The quantity under the mixture law (initial state unknown).
    pub mixture: f64,
    /// `sum_s w(s) I(... | s0 = s)`, the quantity conditioned on the state.
    pub conditioned: f64,
    /// `H(S_0)` in bits.
    pub state_entropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub kind: DiKind,
    pub n: usize,
    /// Total (not per-use) value for each initial state.
    pub per_state: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub argmin: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub averaged: Option<StateAverage>,
}

/// A directed information evaluated under each initial state, and
/// optionally averaged over `weights` (a convention resolving to a pmf).
pub fn directed_info_given_state(
    policy: &PolicyPair,
    ch: &FsMac,
    kind: DiKind,
    weights: Option<&InitialState>,
) -> Result<StateReport> {
    let n = policy.depth();
    let ns = ch.states().size();
    let mut per_state = Vec::with_capacity(ns);
    for s in 0..ns {
        let law = channel_causal_law(ch, &InitialState::Given(s), n)?;
        per_state.push(directed_info_total(&joint_law(policy, &law)?, kind));
    }
    let (argmin, min) =
        per_state
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
            );
    let max = per_state.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let averaged = match weights {
        None => None,
        Some(w) => {
            let pmf = w.resolve(ch)?;
            let law = channel_causal_law(ch, &InitialState::Distribution(pmf.clone()), n)?;
            let mixture = directed_info_total(&joint_law(policy, &law)?, kind);
            let conditioned = pmf.iter().zip(&per_state).map(|(w, v)| w * v).sum();
            Some(StateAverage {
                state_entropy: entropy_bits(&pmf),
                weights: pmf,
                mixture,
                conditioned,
            })
        }
    };
    Ok(StateReport {
        kind,
        n,
        per_state,
        min,
        max,
        argmin,
        averaged,
    })
}

/// `sum Q1 Q2 P log2(P / sum_x1' Q1(x1' || y) P(y || x1', x2))` evaluated
/// directly from the policy rows and the channel law.
pub fn functional_i(policy: &PolicyPair, law: &CausalChannelLaw) -> Result<f64> {
    let d = *law.dims();
    let t = policy.tables(&d)?;
    let (nx1, nx2, ny) = (d.n_x1(), d.n_x2(), d.n_y());
    let mut total = 0.0;
    for x2 in 0..nx2 {
        for y in 0..ny {
            let w2 = t.q2[x2 * ny + y];
            if w2 == 0.0 {
                continue;
            }
            let den: f64 = (0..nx1)
                .map(|x1| t.q1[x1 * ny + y] * law.get(x1, x2, y))
                .sum();
            for x1 in 0..nx1 {
                let p = law.get(x1, x2, y);
                let w = w2 * t.q1[x1 * ny + y] * p;
                if w > 0.0 {
                    total += w * (p / den).log2();
                }
            }
        }
    }
    Ok(total)
}

/// A set of whole sequences among `X1^n`, `X2^n`, `Y^n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarSet {
    pub x1: bool,
    pub x2: bool,
    pub y: bool,
}

impl VarSet {
    pub const EMPTY: VarSet = VarSet {
        x1: false,
        x2: false,
        y: false,
    };
    pub const X1: VarSet = VarSet {
        x1: true,
        x2: false,
        y: false,
    };
    pub const X2: VarSet = VarSet {
        x1: false,
        x2: true,
        y: false,
    };
    pub const Y: VarSet = VarSet {
        x1: false,
        x2: false,
        y: true,
    };

    pub fn union(self, o: VarSet) -> VarSet {
        VarSet {
            x1: self.x1 || o.x1,
            x2: self.x2 || o.x2,
            y: self.y || o.y,
        }
    }

    fn prefixes(self, n: usize) -> Prefixes {
        let f = |b: bool| if b { n } else { 0 };
        Prefixes::new(f(self.x1), f(self.x2), f(self.y))
    }
}

/// `I(A; B | C)` in bits.
pub fn mutual_info(joint: &JointLaw, a: VarSet, b: VarSet, given: VarSet) -> Result<f64> {
    if (a.x1 && b.x1) || (a.x2 && b.x2) || (a.y && b.y) {
        return Err(Error::InvalidParameter(
            "mutual information needs disjoint variable sets".into(),
        ));
    }
    let n = joint.dims().n;
    let h = |s: VarSet| joint.entropy(s.prefixes(n));
    Ok(h(a.union(given)) + h(b.union(given)) - h(a.union(b).union(given)) - h(given))
}

#[cfg(test)]
mod tests;
