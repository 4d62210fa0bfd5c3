//! The causally conditioned channel law `P(y^n || x1^n, x2^n, s0)`.
//!
//! The state is marginalised step by step: we carry the unnormalised
//! forward vector `alpha_t(s) = P(y^t, s_t | x1^t, x2^t, s0)` and the table
//! entry is `sum_s alpha_n(s)`.

use serde::{Deserialize, Serialize};

use crate::channels::{stationary_distribution, FsMac};
use crate::error::{Error, Result};
use crate::prob::pmf::{sanitize_row, NORMALIZATION_TOL};
use crate::prob::Dims;

/// How the initial state `s0` is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// A known initial state.
    Given(usize),
    /// The stationary distribution of the (input-independent) state chain.
    Stationary,
    /// The channel's own `initial_dist`.
    Declared,
    /// An explicit distribution over states.
    Distribution(Vec<f64>),
}

impl InitialState {
    /// The initial distribution this convention denotes for `ch`.
    pub fn resolve(&self, ch: &FsMac) -> Result<Vec<f64>> {
        let ns = ch.states().size();
        match self {
            InitialState::Given(s) => {
                ch.states().check(*s)?;
                let mut d = vec![0.0; ns];
                d[*s] = 1.0;
                Ok(d)
            }
            InitialState::Stationary => {
                if ns == 1 {
                    return Ok(vec![1.0]);
                }
                let chain = crate::channels::state_chain(ch).ok_or_else(|| {
                    Error::NoStationary(
                        "state transitions depend on the inputs; no input-free stationary law"
                            .into(),
                    )
                })?;
                stationary_distribution(&chain)
            }
            InitialState::Declared => ch
                .initial_dist()
                .map(<[f64]>::to_vec)
                .ok_or_else(|| Error::Spec("channel declares no initial_dist".into())),
            InitialState::Distribution(d) => {
                if d.len() != ns {
                    return Err(Error::Spec("initial distribution length mismatch".into()));
                }
                let mut d = d.clone();
                sanitize_row(&mut d, || "initial distribution".into())?;
                Ok(d)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            InitialState::Given(s) => format!("given:{s}"),
            InitialState::Stationary => "stationary".into(),
            InitialState::Declared => "declared".into(),
            InitialState::Distribution(_) => "distribution".into(),
        }
    }
}

/// One channel step of the forward recursion:
/// `out(s') = sum_s alpha(s) P(y, s' | x1, x2, s)`.
#[inline]
pub(crate) fn advance(ch: &FsMac, alpha: &[f64], x1: usize, x2: usize, y: usize, out: &mut [f64]) {
    let ns = alpha.len();
    out.fill(0.0);
    for (s, &a) in alpha.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let row = &ch.row(x1, x2, s)[y * ns..(y + 1) * ns];
        for (o, &k) in out.iter_mut().zip(row) {
            *o += a * k;
        }
    }
}

/// `P(y^n || x1^n, x2^n)` for one triple of sequences, by the same
/// arithmetic as [`channel_causal_law`].
pub fn sequence_likelihood(
    ch: &FsMac,
    initial: &[f64],
    x1: &[usize],
    x2: &[usize],
    y: &[usize],
) -> f64 {
    let mut alpha = initial.to_vec();
    let mut next = vec![0.0; alpha.len()];
    for t in 0..y.len() {
        advance(ch, &alpha, x1[t], x2[t], y[t], &mut next);
        std::mem::swap(&mut alpha, &mut next);
    }
    alpha.iter().sum()
}

/// Natural-log likelihood with per-step rescaling, safe for long blocks.
pub fn sequence_log_likelihood(
    ch: &FsMac,
    initial: &[f64],
    x1: &[usize],
    x2: &[usize],
    y: &[usize],
) -> f64 {
    let mut alpha = initial.to_vec();
    let mut next = vec![0.0; alpha.len()];
    let mut log = 0.0;
    for t in 0..y.len() {
        advance(ch, &alpha, x1[t], x2[t], y[t], &mut next);
        let scale: f64 = next.iter().sum();
        if scale == 0.0 {
            return f64::NEG_INFINITY;
        }
        log += scale.ln();
        for v in next.iter_mut() {
            *v /= scale;
        }
        std::mem::swap(&mut alpha, &mut next);
    }
    log
}

/// Anything that scores `P(y^N || x1^N, x2^N)` for explicit sequences.
pub trait SequenceLaw {
    /// Natural log of the causally conditioned likelihood.
    fn log_likelihood(&self, x1: &[usize], x2: &[usize], y: &[usize]) -> f64;

    /// The initial-state convention the law was built under.
    fn convention(&self) -> &InitialState;
}

/// A channel and initial distribution scored on demand, for blocks too long
/// for a dense table.
#[derive(Clone, Debug)]
pub struct StateSequenceLaw<'a> {
    channel: &'a FsMac,
    initial: Vec<f64>,
    convention: InitialState,
}

impl<'a> StateSequenceLaw<'a> {
    pub fn new(channel: &'a FsMac, convention: InitialState) -> Result<Self> {
        let initial = convention.resolve(channel)?;
        Ok(StateSequenceLaw {
            channel,
            initial,
            convention,
        })
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }
}

impl SequenceLaw for StateSequenceLaw<'_> {
    fn log_likelihood(&self, x1: &[usize], x2: &[usize], y: &[usize]) -> f64 {
        sequence_log_likelihood(self.channel, &self.initial, x1, x2, y)
    }

    fn convention(&self) -> &InitialState {
        &self.convention
    }
}

/// Dense `P(y^n || x1^n, x2^n)` under a fixed initial-state convention.
#[derive(Clone, Debug, PartialEq)]
pub struct CausalChannelLaw {
    dims: Dims,
    p: Vec<f64>,
    initial: Vec<f64>,
    convention: InitialState,
}

impl CausalChannelLaw {
    /// Wraps an explicit tensor, checking every `(x1^n, x2^n)` row is a pmf
    /// over `y^n` and the law is causal.
    pub fn from_tensor(dims: Dims, p: Vec<f64>, convention: InitialState) -> Result<Self> {
        if p.len() != dims.cells() {
            return Err(Error::Spec(format!(
                "law has {} cells, expected {}",
                p.len(),
                dims.cells()
            )));
        }
        let ny = dims.n_y();
        for (r, row) in p.chunks(ny).enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL
                || row.iter().any(|v| *v < 0.0 || !v.is_finite())
            {
                return Err(Error::NotNormalized {
                    what: format!("law row {r}"),
                    sum,
                });
            }
        }
        let law = CausalChannelLaw {
            dims,
            p,
            initial: Vec::new(),
            convention,
        };
        let violation = law.causality_violation();
        if violation > 1e-12 {
            return Err(Error::Spec(format!(
                "law is not causal: future inputs change past outputs by {violation:e}"
            )));
        }
        Ok(law)
    }

    #[inline]
    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    #[inline]
    pub fn get(&self, x1: usize, x2: usize, y: usize) -> f64 {
        self.p[self.dims.index(x1, x2, y)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// The resolved initial distribution (empty for explicit tensors).
    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn convention(&self) -> &InitialState {
        &self.convention
    }

    /// Largest change of `P(y^i || x^n)` (summed over `y_{i+1..n}`) when the
    /// inputs after time `i` vary.
    pub fn causality_violation(&self) -> f64 {
        let d = &self.dims;
        let n = d.n;
        let (a1, a2, b) = (d.x1.size(), d.x2.size(), d.y.size());
        let mut worst: f64 = 0.0;
        for i in 1..n {
            let tail_x1 = a1.pow((n - i) as u32);
            let tail_x2 = a2.pow((n - i) as u32);
            let tail_y = b.pow((n - i) as u32);
            let ny_i = d.y.count(i);
            for h1 in 0..d.x1.count(i) {
                for h2 in 0..d.x2.count(i) {
                    let mut reference: Option<Vec<f64>> = None;
                    for f1 in 0..tail_x1 {
                        for f2 in 0..tail_x2 {
                            let (x1, x2) = (h1 * tail_x1 + f1, h2 * tail_x2 + f2);
                            let marg: Vec<f64> = (0..ny_i)
                                .map(|yp| {
                                    (0..tail_y)
                                        .map(|ft| self.get(x1, x2, yp * tail_y + ft))
                                        .sum()
                                })
                                .collect();
                            match &reference {
                                None => reference = Some(marg),
                                Some(r) => {
                                    for (u, v) in r.iter().zip(&marg) {
                                        worst = worst.max((u - v).abs());
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        worst
    }
}

impl SequenceLaw for CausalChannelLaw {
    fn log_likelihood(&self, x1: &[usize], x2: &[usize], y: &[usize]) -> f64 {
        use crate::prob::alphabet::encode;
        let d = &self.dims;
        self.get(
            encode(x1, d.x1.size()),
            encode(x2, d.x2.size()),
            encode(y, d.y.size()),
        )
        .ln()
    }

    fn convention(&self) -> &InitialState {
        &self.convention
    }
}

/// Computes `P(y^n || x1^n, x2^n, s0)` for every sequence triple.
pub fn channel_causal_law(
    ch: &FsMac,
    initial: &InitialState,
    n: usize,
) -> Result<CausalChannelLaw> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "block length must be at least 1".into(),
        ));
    }
    let dims = Dims::for_channel(ch, n)?;
    let init = initial.resolve(ch)?;
    let mut p = vec![0.0; dims.cells()];
    let ns = ch.states().size();
    let mut alphas = vec![vec![0.0; ns]; n + 1];
    alphas[0].copy_from_slice(&init);
    fill(ch, &dims, 0, (0, 0, 0), &mut alphas, &mut p);
    Ok(CausalChannelLaw {
        dims,
        p,
        initial: init,
        convention: initial.clone(),
    })
}

fn fill(
    ch: &FsMac,
    dims: &Dims,
    t: usize,
    codes: (usize, usize, usize),
    alphas: &mut [Vec<f64>],
    out: &mut [f64],
) {
    let (a1, a2, b) = (dims.x1.size(), dims.x2.size(), dims.y.size());
    let (current, deeper) = alphas.split_at_mut(1);
    let alpha = &current[0];
    for x1 in 0..a1 {
        for x2 in 0..a2 {
            for y in 0..b {
                advance(ch, alpha, x1, x2, y, &mut deeper[0]);
                let c = (codes.0 * a1 + x1, codes.1 * a2 + x2, codes.2 * b + y);
                if t + 1 == dims.n {
                    out[dims.index(c.0, c.1, c.2)] = deeper[0].iter().sum();
                } else if deeper[0].iter().any(|&v| v != 0.0) {
                    fill(ch, dims, t + 1, c, deeper, out);
                }
                // a dead prefix leaves its continuations at zero
            }
        }
    }
}
