use serde::Serialize;

use crate::channels::{FeedbackFn, FsMac};
use crate::dirinfo::fast::{FastEval, LawTerms};
use crate::error::Result;
use crate::grid::{PolicyForm, PolicyGrid};
use crate::prob::{channel_causal_law, Dims, InitialState, PolicyPair};

/// Settings for [`zero_region_check`].
#[derive(Clone, Debug)]
pub struct ZeroCheckOptions {
    pub grid: PolicyGrid,
    pub f1: FeedbackFn,
    pub f2: FeedbackFn,
    pub initial: InitialState,
    /// Values at or below this count as zero.
    pub tol: f64,
    /// Stop the grid sweep at the first value above `tol`. The reported
    /// `grid_max` is then a witness, not the maximum.
    pub stop_at_positive: bool,
}

impl ZeroCheckOptions {
    /// Perfect feedback to both users, code-tree grid at resolution 1/8,
    /// initial state 0.
    pub fn perfect_feedback(ch: &FsMac) -> Self {
        ZeroCheckOptions {
            grid: PolicyGrid::new(8, PolicyForm::Feedback).expect("nonzero resolution"),
            f1: FeedbackFn::perfect(ch.y()),
            f2: FeedbackFn::perfect(ch.y()),
            initial: InitialState::Given(0),
            tol: 1e-12,
            stop_at_positive: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroVerdict {
    pub n: usize,
    /// `I((X1, X2)^n -> Y^n)` at uniform i.i.d. inputs, in bits.
    pub uniform_value: f64,
    pub uniform_zero: bool,
    /// `max |P(y^n || x1^n, x2^n) - P(y^n)|` with `P(y^n)` taken under
    /// uniform inputs.
    pub max_deviation: f64,
    pub grid_max: f64,
    pub grid_zero: bool,
    pub pairs_evaluated: u64,
    /// Whether the two zero tests agree.
    pub consistent: bool,
}

/// Tests whether a channel carries no information at block length `n`, at
/// uniform inputs and over a grid of feedback policies.
pub fn zero_region_check(ch: &FsMac, n: usize, opts: &ZeroCheckOptions) -> Result<ZeroVerdict> {
    let law = channel_causal_law(ch, &opts.initial, n)?;
    let dims: Dims = *law.dims();
    let terms = LawTerms::new(law);
    let mut eval = FastEval::new(&dims, false);

    let uniform = PolicyPair::uniform(n, ch.x1(), ch.x2(), opts.f1.clone(), opts.f2.clone())?;
    eval.load_tables(&uniform.tables(&dims)?, &terms);
    let uniform_value = eval.sum_rate(&terms);

    let ny = dims.n_y();
    let mut py = vec![0.0; ny];
    for (cell, &p) in eval.joint().iter().enumerate() {
        py[cell % ny] += p;
    }
    let max_deviation = terms
        .law
        .as_slice()
        .iter()
        .enumerate()
        .map(|(cell, &l)| (l - py[cell % ny]).abs())
        .fold(0.0, f64::max);

    let (k1, k2) = opts
        .grid
        .kernel_lists(n, ch.x1(), ch.x2(), &opts.f1, &opts.f2)?;
    let t1: Vec<Vec<f64>> = k1.iter().map(|k| k.path_table(&opts.f1, dims.y)).collect();
    let t2: Vec<Vec<f64>> = k2.iter().map(|k| k.path_table(&opts.f2, dims.y)).collect();
    let mut grid_max = f64::NEG_INFINITY;
    let mut pairs = 0u64;
    'outer: for a in &t1 {
        for b in &t2 {
            eval.load(a, b, &terms);
            let v = eval.sum_rate(&terms);
            pairs += 1;
            grid_max = grid_max.max(v);
            if opts.stop_at_positive && grid_max > opts.tol {
                break 'outer;
            }
        }
    }
    let uniform_zero = uniform_value <= opts.tol;
    let grid_zero = grid_max <= opts.tol;
    Ok(ZeroVerdict {
        n,
        uniform_value,
        uniform_zero,
        max_deviation,
        grid_max,
        grid_zero,
        pairs_evaluated: pairs,
        consistent: uniform_zero == grid_zero,
    })
}
