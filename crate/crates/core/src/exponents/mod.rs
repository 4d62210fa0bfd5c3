//! Random-coding exponents for the three error events of a two-user code.
//!
//! For error type 1 (user 1 wrong, user 2 right)
//!
//! ```text
//! E_1(rho) = -(1/N) log2 sum_{y, x2} Q2(x2 || z2) [ sum_{x1} Q1(x1 || z1) P(y || x1, x2)^(1/(1+rho)) ]^(1+rho)
//! ```
//!
//! and types 2 and 3 swap or merge the inner and outer sums. Every power is
//! taken in the log domain, so long blocks do not underflow.

#[cfg(test)]
mod tests;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::FsMac;
use crate::dirinfo::{directed_info_given_state, DiKind, Source};
use crate::error::{Error, Result};
use crate::prob::pmf::fmt_sig;
use crate::prob::{channel_causal_law, CausalChannelLaw, Dims, InitialState, PolicyPair, User};

/// Which messages the decoder gets wrong.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorType {
    /// Only message 1.
    One,
    /// Only message 2.
    Two,
    /// Both.
    Three,
}

impl ErrorType {
    pub const ALL: [ErrorType; 3] = [ErrorType::One, ErrorType::Two, ErrorType::Three];

    /// The directed information that bounds the exponent slope.
    pub fn kind(self) -> DiKind {
        match self {
            ErrorType::One => DiKind::Conditioned(User::One),
            ErrorType::Two => DiKind::Conditioned(User::Two),
            ErrorType::Three => DiKind::Directed(Source::Both),
        }
    }

    pub fn index(self) -> usize {
        self as usize + 1
    }

    /// The rate the exponent trades against: `R1`, `R2` or `R1 + R2`.
    pub fn rate(self, r1: f64, r2: f64) -> f64 {
        match self {
            ErrorType::One => r1,
            ErrorType::Two => r2,
            ErrorType::Three => r1 + r2,
        }
    }
}

impl FromStr for ErrorType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(ErrorType::One),
            "2" => Ok(ErrorType::Two),
            "3" => Ok(ErrorType::Three),
            _ => Err(Error::InvalidParameter(format!(
                "error type must be 1, 2 or 3, got '{s}'"
            ))),
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "rho must lie in [0, 1], got {rho}"
        )))
    }
}

/// A causal law in natural-log form, `-inf` where the law vanishes.
pub(crate) struct LnLaw {
    dims: Dims,
    ln: Vec<f64>,
}

impl LnLaw {
    pub fn new(law: &CausalChannelLaw) -> Self {
        LnLaw {
            dims: *law.dims(),
            ln: law.as_slice().iter().map(|&p| p.ln()).collect(),
        }
    }
}

/// Policy path tables in natural-log form.
pub(crate) struct LnPolicy {
    q1: Vec<f64>,
    q2: Vec<f64>,
}

impl LnPolicy {
    pub fn new(policy: &PolicyPair, dims: &Dims) -> Result<Self> {
        let t = policy.tables(dims)?;
        Ok(LnPolicy {
            q1: t.q1.iter().map(|p| p.ln()).collect(),
            q2: t.q2.iter().map(|p| p.ln()).collect(),
        })
    }
}

/// Natural log of the sum inside an exponent, for `rho` in `[0, 1]`.
pub(crate) fn ln_gallager_sum(i: ErrorType, rho: f64, pol: &LnPolicy, law: &LnLaw) -> f64 {
    let d = &law.dims;
    let (nx1, nx2, ny) = (d.n_x1(), d.n_x2(), d.n_y());
    let s = 1.0 / (1.0 + rho);
    // bucket of the inner sum, and the inner weight, for a cell
    let buckets = match i {
        ErrorType::One => nx2 * ny,
        ErrorType::Two => nx1 * ny,
        ErrorType::Three => ny,
    };
    let inner = |x1: usize, x2: usize, y: usize, lp: f64| -> (usize, f64) {
        match i {
            ErrorType::One => (x2 * ny + y, pol.q1[x1 * ny + y] + s * lp),
            ErrorType::Two => (x1 * ny + y, pol.q2[x2 * ny + y] + s * lp),
            ErrorType::Three => (y, pol.q1[x1 * ny + y] + pol.q2[x2 * ny + y] + s * lp),
        }
    };
    let mut max = vec![f64::NEG_INFINITY; buckets];
    let mut sum = vec![0.0; buckets];
    for pass in 0..2 {
        let mut cell = 0;
        for x1 in 0..nx1 {
            for x2 in 0..nx2 {
                for y in 0..ny {
                    let lp = law.ln[cell];
                    cell += 1;
                    if lp == f64::NEG_INFINITY {
                        continue;
                    }
                    let (b, t) = inner(x1, x2, y, lp);
                    if t == f64::NEG_INFINITY {
                        continue;
                    }
                    if pass == 0 {
                        max[b] = max[b].max(t);
                    } else {
                        sum[b] += (t - max[b]).exp();
                    }
                }
            }
        }
    }
    // outer sum over buckets of w(b) * inner(b)^(1+rho)
    let outer: Vec<f64> = (0..buckets)
        .map(|b| {
            if max[b] == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            let w = match i {
                ErrorType::One => pol.q2[b],
                ErrorType::Two => pol.q1[b],
                ErrorType::Three => 0.0,
            };
            w + (1.0 + rho) * (max[b] + sum[b].ln())
        })
        .collect();
    crate::prob::pmf::log_sum_exp(&outer)
}

/// `E_{N,i}(rho)` in bits for one channel law (one initial-state
/// convention). Exactly zero at `rho = 0`, where the sum is a total
/// probability.
pub fn gallager_e(
    i: ErrorType,
    rho: f64,
    policy: &PolicyPair,
    law: &CausalChannelLaw,
) -> Result<f64> {
    check_rho(rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let ln_law = LnLaw::new(law);
    let pol = LnPolicy::new(policy, law.dims())?;
    Ok(e_from_ln(i, rho, &pol, &ln_law))
}

fn e_from_ln(i: ErrorType, rho: f64, pol: &LnPolicy, law: &LnLaw) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    -ln_gallager_sum(i, rho, pol, law) / (law.dims.n as f64 * std::f64::consts::LN_2)
}

/// Per-state laws of a channel at block length `n`, ready for exponent
/// sweeps.
pub struct StateLaws {
    n: usize,
    states: usize,
    laws: Vec<LnLaw>,
    raw: Vec<CausalChannelLaw>,
}

impl StateLaws {
    pub fn new(ch: &FsMac, n: usize) -> Result<Self> {
        let raw = (0..ch.states().size())
            .map(|s| channel_causal_law(ch, &InitialState::Given(s), n))
            .collect::<Result<Vec<_>>>()?;
        Ok(StateLaws {
            n,
            states: ch.states().size(),
            laws: raw.iter().map(LnLaw::new).collect(),
            raw,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn law(&self, s0: usize) -> &CausalChannelLaw {
        &self.raw[s0]
    }

    /// `E_{N,i}(rho, s0)` for every initial state.
    pub fn e_per_state(&self, i: ErrorType, rho: f64, policy: &PolicyPair) -> Result<Vec<f64>> {
        check_rho(rho)?;
        let pol = LnPolicy::new(policy, &self.laws[0].dims)?;
        Ok(self
            .laws
            .iter()
            .map(|l| e_from_ln(i, rho, &pol, l))
            .collect())
    }

    /// `F_{N,i}(rho) = min_{s0} E_{N,i}(rho, s0) - rho log2|S| / N`.
    pub fn f(&self, i: ErrorType, rho: f64, policy: &PolicyPair) -> Result<f64> {
        let e = self.e_per_state(i, rho, policy)?;
        Ok(f_from_e(&e, rho, self.states, self.n))
    }
}

fn f_from_e(e: &[f64], rho: f64, states: usize, n: usize) -> f64 {
    let min = e.iter().copied().fold(f64::INFINITY, f64::min);
    min - rho * (states as f64).log2() / n as f64
}

pub fn gallager_f(i: ErrorType, rho: f64, policy: &PolicyPair, ch: &FsMac) -> Result<f64> {
    StateLaws::new(ch, policy.depth())?.f(i, rho, policy)
}

/// `|S| 2^(-N (F - rho R))`, the ensemble bound on the type-`i` error
/// probability.
pub fn error_bound(n: usize, rate: f64, rho: f64, f_value: f64, states: usize) -> f64 {
    states as f64 * (-(n as f64) * (f_value - rho * rate)).exp2()
}

/// A list of `rho` values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoGrid(pub Vec<f64>);

impl Default for RhoGrid {
    /// `0, 0.05, ..., 1`.
    fn default() -> Self {
        RhoGrid::uniform(20)
    }
}

impl RhoGrid {
    /// `k / steps` for `k = 0..=steps`.
    pub fn uniform(steps: usize) -> Self {
        RhoGrid((0..=steps).map(|k| k as f64 / steps as f64).collect())
    }

    /// Steps of `1e-3` within `0.05` of `center`, clipped to `[0, 1]`.
    pub fn refine_around(center: f64) -> Self {
        let lo = (center - 0.05).max(0.0);
        let hi = (center + 0.05).min(1.0);
        let k = ((hi - lo) / 1e-3).round() as usize;
        RhoGrid((0..=k).map(|j| (lo + j as f64 * 1e-3).min(1.0)).collect())
    }

    fn check(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::InvalidParameter("empty rho grid".into()));
        }
        self.0.iter().try_for_each(|&r| check_rho(r))
    }
}

/// Exponent curves of one error type over a `rho` grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentEval {
    pub error_type: ErrorType,
    pub n: usize,
    pub rho: Vec<f64>,
    /// `e[k][s0]` at `rho[k]`.
    pub e: Vec<Vec<f64>>,
    pub f: Vec<f64>,
}

impl ExponentEval {
    /// Header `rho,E_s0,...,F`.
    pub fn to_csv(&self) -> String {
        let states = self.e.first().map_or(0, Vec::len);
        let mut s = String::from("rho");
        for k in 0..states {
            s.push_str(&format!(",E_s{k}"));
        }
        s.push_str(",F\n");
        for (k, rho) in self.rho.iter().enumerate() {
            s.push_str(&fmt_sig(*rho));
            for v in &self.e[k] {
                s.push(',');
                s.push_str(&fmt_sig(*v));
            }
            s.push(',');
            s.push_str(&fmt_sig(self.f[k]));
            s.push('\n');
        }
        s
    }
}

pub fn exponent_curve(
    i: ErrorType,
    policy: &PolicyPair,
    laws: &StateLaws,
    grid: &RhoGrid,
) -> Result<ExponentEval> {
    grid.check()?;
    let pol = LnPolicy::new(policy, &laws.laws[0].dims)?;
    let e: Vec<Vec<f64>> = grid
        .0
        .par_iter()
        .map(|&rho| {
            laws.laws
                .iter()
                .map(|l| e_from_ln(i, rho, &pol, l))
                .collect()
        })
        .collect();
    let f = e
        .iter()
        .zip(&grid.0)
        .map(|(e, &rho)| f_from_e(e, rho, laws.states, laws.n))
        .collect();
    Ok(ExponentEval {
        error_type: i,
        n: laws.n,
        rho: grid.0.clone(),
        e,
        f,
    })
}

/// Outcome of searching `rho` for positive margins on all three events.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Achievability {
    pub r1: f64,
    pub r2: f64,
    pub achievable: bool,
    /// The `rho` maximizing the smallest margin.
    pub rho_star: f64,
    /// `F_i(rho*) - rho* R_i` for `i = 1, 2, 3`.
    pub margins: [f64; 3],
}

/// Certifies `(r1, r2)` when some `rho` makes `F_{n,i}(rho) - rho R_i`
/// positive for all three error types. Since `F_{Kn}` of the repeated
/// policy is at least `F_n`, the margins carry over to every block length
/// `Kn`, and the error bound then vanishes as `K` grows.
pub fn exponent_achievability(
    r1: f64,
    r2: f64,
    policy: &PolicyPair,
    ch: &FsMac,
    grid: &RhoGrid,
) -> Result<Achievability> {
    if !(r1 >= 0.0 && r2 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rates must be nonnegative, got ({r1}, {r2})"
        )));
    }
    grid.check()?;
    let laws = StateLaws::new(ch, policy.depth())?;
    let margins_at = |rho: f64| -> Result<[f64; 3]> {
        let mut m = [0.0; 3];
        for (k, i) in ErrorType::ALL.iter().enumerate() {
            m[k] = laws.f(*i, rho, policy)? - rho * i.rate(r1, r2);
        }
        Ok(m)
    };
    let score = |m: &[f64; 3]| m.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best = (grid.0[0], margins_at(grid.0[0])?);
    for &rho in &grid.0[1..] {
        let m = margins_at(rho)?;
        if score(&m) > score(&best.1) {
            best = (rho, m);
        }
    }
    for &rho in &RhoGrid::refine_around(best.0).0 {
        let m = margins_at(rho)?;
        if score(&m) > score(&best.1) {
            best = (rho, m);
        }
    }
    Ok(Achievability {
        r1,
        r2,
        achievable: score(&best.1) > 0.0,
        rho_star: best.0,
        margins: best.1,
    })
}

/// Sign of the measured second difference of `E` along the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Convex,
    Concave,
    Flat,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentShapeReport {
    pub error_type: ErrorType,
    pub n: usize,
    /// `|E(0, s0)|` evaluated numerically, without the `rho = 0` shortcut.
    pub e_at_zero: Vec<f64>,
    /// Finite-difference slope at `rho = 0` per initial state.
    pub slope_at_zero: Vec<f64>,
    /// Matching directed information per use, per initial state.
    pub directed_info: Vec<f64>,
    pub max_slope_error: f64,
    /// `E` nondecreasing along the grid for every state, slack `1e-10`.
    pub monotone: bool,
    /// Slope bounded by the directed information along the grid.
    pub slope_bounded: bool,
    pub curvature: Vec<Curvature>,
}

/// Step of the one-sided second-order difference at `rho = 0`.
pub const SLOPE_STEP: f64 = 1e-3;

fn curvature_of(values: &[f64], rho: &[f64]) -> Curvature {
    let mut pos = false;
    let mut neg = false;
    for k in 1..values.len().saturating_sub(1) {
        let (h0, h1) = (rho[k] - rho[k - 1], rho[k + 1] - rho[k]);
        let d2 =
            ((values[k + 1] - values[k]) / h1 - (values[k] - values[k - 1]) / h0) * 2.0 / (h0 + h1);
        if d2 > 1e-9 {
            pos = true;
        } else if d2 < -1e-9 {
            neg = true;
        }
    }
    match (pos, neg) {
        (true, false) => Curvature::Convex,
        (false, true) => Curvature::Concave,
        (false, false) => Curvature::Flat,
        (true, true) => Curvature::Mixed,
    }
}

/// Measures `E(0) = 0`, the slope at zero against the directed
/// information, monotonicity along `grid`, and the curvature sign.
pub fn exponent_shape(
    i: ErrorType,
    policy: &PolicyPair,
    ch: &FsMac,
    grid: &RhoGrid,
) -> Result<ExponentShapeReport> {
    grid.check()?;
    let laws = StateLaws::new(ch, policy.depth())?;
    let n = laws.n as f64;
    let pol = LnPolicy::new(policy, &laws.laws[0].dims)?;
    let raw_e =
        |rho: f64, l: &LnLaw| -ln_gallager_sum(i, rho, &pol, l) / (n * std::f64::consts::LN_2);
    let mut e_at_zero = Vec::new();
    let mut slope = Vec::new();
    for l in &laws.laws {
        let e0 = raw_e(0.0, l);
        e_at_zero.push(e0.abs());
        let h = SLOPE_STEP;
        slope.push((-3.0 * e0 + 4.0 * raw_e(h, l) - raw_e(2.0 * h, l)) / (2.0 * h));
    }
    let report = directed_info_given_state(policy, ch, i.kind(), None)?;
    let di: Vec<f64> = report.per_state.iter().map(|v| v / n).collect();
    let max_slope_error = slope
        .iter()
        .zip(&di)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let curve = exponent_curve(i, policy, &laws, grid)?;
    let mut monotone = true;
    let mut slope_bounded = true;
    let mut curvature = Vec::new();
    for s in 0..laws.states {
        let col: Vec<f64> = curve.e.iter().map(|row| row[s]).collect();
        for k in 1..col.len() {
            let dr = grid.0[k] - grid.0[k - 1];
            if col[k] < col[k - 1] - 1e-10 {
                monotone = false;
            }
            if dr > 0.0 && (col[k] - col[k - 1]) / dr > di[s] + 1e-4 {
                slope_bounded = false;
            }
        }
        curvature.push(curvature_of(&col, &grid.0));
    }
    Ok(ExponentShapeReport {
        error_type: i,
        n: laws.n,
        e_at_zero,
        slope_at_zero: slope,
        directed_info: di,
        max_slope_error,
        monotone,
        slope_bounded,
        curvature,
    })
}

/// `F_{n+l}(Q_n Q_l) - [n F_n(Q_n) + l F_l(Q_l)] / (n + l)` for the
/// concatenated policy.
pub fn f_supadditivity_check(
    i: ErrorType,
    first: &PolicyPair,
    second: &PolicyPair,
    ch: &FsMac,
    rho: f64,
) -> Result<f64> {
    let (n, l) = (first.depth() as f64, second.depth() as f64);
    let joint = first.concat(second)?;
    let fnl = gallager_f(i, rho, &joint, ch)?;
    let fn_ = gallager_f(i, rho, first, ch)?;
    let fl = gallager_f(i, rho, second, ch)?;
    Ok(fnl - (n * fn_ + l * fl) / (n + l))
}
