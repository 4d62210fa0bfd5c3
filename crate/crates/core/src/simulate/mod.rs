//! Monte Carlo over the random code-tree ensemble with ML decoding.
//!
//! A code tree maps each feedback history to the next input symbol. Trees
//! are never materialized: the symbol at a node is drawn from a
//! counter-based stream keyed by the tree's seed and the node, so every
//! node is a fixed, independent draw and only the visited ones are
//! computed.


use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{channel_hash, FeedbackFn, FsMac};
use crate::error::{Error, Result};
use crate::exponents::{ErrorType, RhoGrid};
use crate::prob::alphabet::encode;
use crate::prob::{
    channel_causal_law, CausalChannelLaw, CausalKernel, Dims, InitialState, PolicyPair,
    SequenceLaw, StateSequenceLaw,
};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// What every tree of one codebook shares.
#[derive(Debug)]
struct TreeLaw {
    kernel: CausalKernel,
    feedback: FeedbackFn,
    /// With a feedback-blind kernel the tree collapses to a codeword, and
    /// the node key drops the feedback history.
    uses_feedback: bool,
    /// First node key of each depth within a block.
    offsets: Vec<u64>,
}

impl TreeLaw {
    fn new(kernel: CausalKernel, feedback: FeedbackFn) -> Result<Self> {
        if kernel.feedback() != feedback.range() {
            return Err(Error::AlphabetMismatch(format!(
                "kernel expects feedback alphabet {} but the feedback map has range {}",
                kernel.feedback().size(),
                feedback.range().size()
            )));
        }
        let uses_feedback = !kernel.ignores_feedback();
        let zsize = if uses_feedback {
            kernel.feedback().size()
        } else {
            1
        };
        let mut offsets = Vec::with_capacity(kernel.depth());
        let mut acc = 0u64;
        for t in 0..kernel.depth() {
            offsets.push(acc);
            acc += (kernel.input().size() as u64).pow(t as u32) * (zsize as u64).pow(t as u32);
        }
        Ok(TreeLaw {
            kernel,
            feedback,
            uses_feedback,
            offsets,
        })
    }
}

/// A complete code tree of depth `n K`: `K` independent depth-`n` trees in
/// sequence, each seeing only its own block's history.
#[derive(Clone, Debug)]
pub struct CodeTree {
    law: Arc<TreeLaw>,
    block_seeds: Vec<u64>,
}

impl CodeTree {
    pub fn depth(&self) -> usize {
        self.law.kernel.depth() * self.block_seeds.len()
    }

    /// The input at zero-based time `t`, given the tree's own earlier
    /// inputs and the earlier feedback symbols (at least `t` of each).
    pub fn symbol(&self, t: usize, x_prev: &[usize], z_prev: &[usize]) -> usize {
        let law = &*self.law;
        let n = law.kernel.depth();
        let (block, tau) = (t / n, t % n);
        let start = block * n;
        let xh = encode(&x_prev[start..t], law.kernel.input().size());
        let zh = encode(&z_prev[start..t], law.kernel.feedback().size());
        let row = law.kernel.row(tau, xh, zh);
        let key_z = if law.uses_feedback { zh as u64 } else { 0 };
        let zcount = if law.uses_feedback {
            law.kernel.feedback().count(tau) as u64
        } else {
            1
        };
        let node = law.offsets[tau] + xh as u64 * zcount + key_z;
        let mut rng = ChaCha8Rng::seed_from_u64(self.block_seeds[block]);
        rng.set_stream(node);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (x, &p) in row.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = x;
                if u < acc {
                    return x;
                }
            }
        }
        last
    }

    /// The input sequence this tree sends when the channel outputs `y`.
    pub fn codeword(&self, y: &[usize]) -> Vec<usize> {
        let z: Vec<usize> = y.iter().map(|&v| self.law.feedback.apply(v)).collect();
        let mut x = Vec::with_capacity(self.depth());
        for t in 0..self.depth() {
            let s = self.symbol(t, &x, &z);
            x.push(s);
        }
        x
    }
}

#[derive(Clone, Debug)]
pub struct CodeBook {
    trees: Vec<CodeTree>,
}

impl CodeBook {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn tree(&self, m: usize) -> &CodeTree {
        &self.trees[m]
    }

    pub fn depth(&self) -> usize {
        self.trees[0].depth()
    }

    /// `log2(M) / N` bits per use.
    pub fn rate(&self) -> f64 {
        (self.len() as f64).log2() / self.depth() as f64
    }
}

fn book(law: Arc<TreeLaw>, k: usize, m: usize, rng: &mut impl Rng) -> CodeBook {
    CodeBook {
        trees: (0..m)
            .map(|_| CodeTree {
                law: law.clone(),
                block_seeds: (0..k).map(|_| rng.gen()).collect(),
            })
            .collect(),
    }
}

/// Draws `m` independent trees, each the concatenation of `k` independent
/// draws from the depth-`n` tree law `kernel`.
pub fn sample_code_trees(
    kernel: &CausalKernel,
    feedback: &FeedbackFn,
    k: usize,
    m: usize,
    rng: &mut impl Rng,
) -> Result<CodeBook> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidParameter(
            "need at least one message and one block".into(),
        ));
    }
    Ok(book(
        Arc::new(TreeLaw::new(kernel.clone(), feedback.clone())?),
        k,
        m,
        rng,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trajectory {
    pub s0: usize,
    pub x1: Vec<usize>,
    pub x2: Vec<usize>,
    pub y: Vec<usize>,
}

fn draw(pmf: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in pmf.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Runs both encoders through the channel for one block. Feedback reaches
/// each encoder one step late.
pub fn transmit(
    ch: &FsMac,
    initial: &[f64],
    t1: &CodeTree,
    t2: &CodeTree,
    rng: &mut impl Rng,
) -> Trajectory {
    let n = t1.depth().min(t2.depth());
    let ns = ch.states().size();
    let s0 = draw(initial, rng);
    let mut s = s0;
    let (mut x1, mut x2, mut y) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    let (mut z1, mut z2) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for t in 0..n {
        let a = t1.symbol(t, &x1, &z1);
        let b = t2.symbol(t, &x2, &z2);
        let k = draw(ch.row(a, b, s), rng);
        let (out, next) = (k / ns, k % ns);
        x1.push(a);
        x2.push(b);
        y.push(out);
        z1.push(t1.law.feedback.apply(out));
        z2.push(t2.law.feedback.apply(out));
        s = next;
    }
    Trajectory { s0, x1, x2, y }
}

/// Maximum-likelihood message pair, ties to the lowest indices (message 1
/// first).
pub fn ml_decode(
    y: &[usize],
    book1: &CodeBook,
    book2: &CodeBook,
    law: &impl SequenceLaw,
) -> (usize, usize) {
    let c1: Vec<Vec<usize>> = book1.trees.iter().map(|t| t.codeword(y)).collect();
    let c2: Vec<Vec<usize>> = book2.trees.iter().map(|t| t.codeword(y)).collect();
    let mut best = (0, 0);
    let mut score = f64::NEG_INFINITY;
    for (i, a) in c1.iter().enumerate() {
        for (j, b) in c2.iter().enumerate() {
            let v = law.log_likelihood(a, b, y);
            if v > score {
                score = v;
                best = (i, j);
            }
        }
    }
    best
}

/// The union bound on the ensemble's type-`i` error probability, summed
/// directly from its defining expression (no log-domain reshaping):
///
/// ```text
/// (M1 - 1)^rho sum_{y, x2} Q2 [ sum_{x1} Q1 P^(1/(1+rho)) ]^(1+rho)
/// ```
///
/// for type 1, the mirror image for type 2, and prefactor
/// `((M1 - 1)(M2 - 1))^rho` with a single outer sum over `y` for type 3.
pub fn ensemble_union_bound(
    i: ErrorType,
    m1: usize,
    m2: usize,
    rho: f64,
    policy: &PolicyPair,
    law: &CausalChannelLaw,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!(
            "rho must lie in [0, 1], got {rho}"
        )));
    }
    let d: Dims = *law.dims();
    let t = policy.tables(&d)?;
    let (nx1, nx2, ny) = (d.n_x1(), d.n_x2(), d.n_y());
    let s = 1.0 / (1.0 + rho);
    let p = law.as_slice();
    let mut inner = vec![
        0.0;
        match i {
            ErrorType::One => nx2 * ny,
            ErrorType::Two => nx1 * ny,
            ErrorType::Three => ny,
        }
    ];
    for x1 in 0..nx1 {
        for x2 in 0..nx2 {
            for y in 0..ny {
                let v = p[(x1 * nx2 + x2) * ny + y];
                if v == 0.0 {
                    continue;
                }
                let (q1, q2) = (t.q1[x1 * ny + y], t.q2[x2 * ny + y]);
                match i {
                    ErrorType::One => inner[x2 * ny + y] += q1 * v.powf(s),
                    ErrorType::Two => inner[x1 * ny + y] += q2 * v.powf(s),
                    ErrorType::Three => inner[y] += q1 * q2 * v.powf(s),
                }
            }
        }
    }
    let outer: f64 = match i {
        ErrorType::One => inner
            .iter()
            .enumerate()
            .map(|(b, v)| t.q2[b] * v.powf(1.0 + rho))
            .sum(),
        ErrorType::Two => inner
            .iter()
            .enumerate()
            .map(|(b, v)| t.q1[b] * v.powf(1.0 + rho))
            .sum(),
        ErrorType::Three => inner.iter().map(|v| v.powf(1.0 + rho)).sum(),
    };
    let pre = match i {
        ErrorType::One => (m1 as f64 - 1.0).powf(rho),
        ErrorType::Two => (m2 as f64 - 1.0).powf(rho),
        ErrorType::Three => ((m1 as f64 - 1.0) * (m2 as f64 - 1.0)).powf(rho),
    };
    Ok(pre * outer)
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lower = if k == 0.0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let upper = if k == n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lower, upper)
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub channel: FsMac,
    /// Depth-`n` tree law of each user, with its feedback map.
    pub policy: PolicyPair,
    /// Blocks per codeword; `N = n K`.
    pub k: usize,
    pub m1: usize,
    pub m2: usize,
    pub trials: u64,
    pub seed: u64,
    /// Draws the initial state and fixes the decoder's law.
    pub s0: InitialState,
    /// Attach the best exact bound over this grid when the `N`-block table
    /// fits the sizing limit.
    pub bound_grid: Option<RhoGrid>,
}

impl SimConfig {
    pub fn block_length(&self) -> usize {
        self.policy.depth() * self.k
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimEcho {
    pub n: usize,
    pub k: usize,
    pub block_length: usize,
    pub m1: usize,
    pub m2: usize,
    pub r1: f64,
    pub r2: f64,
    pub trials: u64,
    pub seed: u64,
    pub s0: String,
    pub feedback: [String; 2],
    pub channel: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ErrorCounts {
    pub trials: u64,
    pub correct: u64,
    pub e1: u64,
    pub e2: u64,
    pub e3: u64,
}

impl ErrorCounts {
    pub fn errors(&self) -> u64 {
        self.e1 + self.e2 + self.e3
    }

    fn add(self, o: ErrorCounts) -> ErrorCounts {
        ErrorCounts {
            trials: self.trials + o.trials,
            correct: self.correct + o.correct,
            e1: self.e1 + o.e1,
            e2: self.e2 + o.e2,
            e3: self.e3 + o.e3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Estimate {
    fn new(k: u64, n: u64) -> Self {
        let (lower, upper) = wilson_interval(k, n, Z95);
        Estimate {
            rate: k as f64 / n as f64,
            lower,
            upper,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundAtRho {
    pub rho: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub config: SimEcho,
    pub counts: ErrorCounts,
    /// Type 1, 2, 3 and total, with 95% Wilson intervals.
    pub p_e1: Estimate,
    pub p_e2: Estimate,
    pub p_e3: Estimate,
    pub p_e: Estimate,
    /// Best exact bound per error type, when computed.
    pub bounds: Option<[BoundAtRho; 3]>,
}

impl SimResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Minimizes [`ensemble_union_bound`] over a `rho` grid, for each error type.
pub fn best_bounds(
    m1: usize,
    m2: usize,
    policy: &PolicyPair,
    law: &CausalChannelLaw,
    grid: &RhoGrid,
) -> Result<[BoundAtRho; 3]> {
    let mut out = [BoundAtRho {
        rho: 0.0,
        value: f64::INFINITY,
    }; 3];
    for (k, i) in ErrorType::ALL.iter().enumerate() {
        for &rho in &grid.0 {
            let v = ensemble_union_bound(*i, m1, m2, rho, policy, law)?;
            if v < out[k].value {
                out[k] = BoundAtRho { rho, value: v };
            }
        }
    }
    Ok(out)
}

/// Fresh codebooks, uniform messages, one transmission and one decision per
/// trial. Trial `t` draws from stream `t` of the seed, so results do not
/// depend on scheduling.
pub fn run_ensemble(cfg: &SimConfig) -> Result<SimResult> {
    if cfg.trials == 0 || cfg.m1 == 0 || cfg.m2 == 0 || cfg.k == 0 {
        return Err(Error::InvalidParameter(
            "trials, k, m1 and m2 must all be positive".into(),
        ));
    }
    let ch = &cfg.channel;
    let pol = &cfg.policy;
    if pol.q1.input() != ch.x1() || pol.q2.input() != ch.x2() || pol.f1.domain() != ch.y().size() {
        return Err(Error::AlphabetMismatch(
            "policy alphabets do not match the channel".into(),
        ));
    }
    let law1 = Arc::new(TreeLaw::new(pol.q1.clone(), pol.f1.clone())?);
    let law2 = Arc::new(TreeLaw::new(pol.q2.clone(), pol.f2.clone())?);
    let decoder = StateSequenceLaw::new(ch, cfg.s0.clone())?;
    let initial = decoder.initial().to_vec();
    let big_n = cfg.block_length();

    let counts = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial);
            let b1 = book(law1.clone(), cfg.k, cfg.m1, &mut rng);
            let b2 = book(law2.clone(), cfg.k, cfg.m2, &mut rng);
            let m1 = rng.gen_range(0..cfg.m1);
            let m2 = rng.gen_range(0..cfg.m2);
            let tr = transmit(ch, &initial, b1.tree(m1), b2.tree(m2), &mut rng);
            let (h1, h2) = ml_decode(&tr.y, &b1, &b2, &decoder);
            let mut c = ErrorCounts {
                trials: 1,
                correct: 0,
                e1: 0,
                e2: 0,
                e3: 0,
            };
            match (h1 == m1, h2 == m2) {
                (true, true) => c.correct = 1,
                (false, true) => c.e1 = 1,
                (true, false) => c.e2 = 1,
                (false, false) => c.e3 = 1,
            }
            c
        })
        .reduce(
            || ErrorCounts {
                trials: 0,
                correct: 0,
                e1: 0,
                e2: 0,
                e3: 0,
            },
            ErrorCounts::add,
        );

    let bounds = match &cfg.bound_grid {
        Some(grid) if Dims::new(big_n, ch.x1(), ch.x2(), ch.y()).is_ok() => {
            let law = channel_causal_law(ch, &cfg.s0, big_n)?;
            Some(best_bounds(
                cfg.m1,
                cfg.m2,
                &pol.repeat(cfg.k)?,
                &law,
                grid,
            )?)
        }
        _ => None,
    };
    let n = counts.trials;
    Ok(SimResult {
        config: SimEcho {
            n: pol.depth(),
            k: cfg.k,
            block_length: big_n,
            m1: cfg.m1,
            m2: cfg.m2,
            r1: (cfg.m1 as f64).log2() / big_n as f64,
            r2: (cfg.m2 as f64).log2() / big_n as f64,
            trials: cfg.trials,
            seed: cfg.seed,
            s0: cfg.s0.label(),
            feedback: [pol.f1.label(), pol.f2.label()],
            channel: channel_hash(ch),
        },
        counts,
        p_e1: Estimate::new(counts.e1, n),
        p_e2: Estimate::new(counts.e2, n),
        p_e3: Estimate::new(counts.e3, n),
        p_e: Estimate::new(counts.errors(), n),
        bounds,
    })
}
