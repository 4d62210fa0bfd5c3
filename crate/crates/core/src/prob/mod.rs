//! Exact finite-alphabet probability engine.
//!
//! Everything here is a dense table over sequences of length `n`. A cell of
//! the joint table is addressed by the radix codes of `(x1^n, x2^n, y^n)`
//! laid out as `(x1 * |X2|^n + x2) * |Y|^n + y`.

pub mod alphabet;
pub mod causal;
pub mod joint;
pub mod kernel;
pub mod law;
pub mod pmf;

pub use alphabet::{seq_decode, seq_encode, Alphabet, SeqIndex};
pub use causal::{causal_conditional, CausalRequest, CausalTable, Stream};
pub use joint::{joint_law, JointLaw, Prefixes};
pub use kernel::{CausalKernel, PolicyPair, User};
pub use law::{
    channel_causal_law, sequence_likelihood, sequence_log_likelihood, CausalChannelLaw,
    InitialState, SequenceLaw, StateSequenceLaw,
};

use crate::error::Result;

/// Shape of a depth-`n` joint table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub x1: Alphabet,
    pub x2: Alphabet,
    pub y: Alphabet,
}

impl Dims {
    /// Enforces `(|X1| |X2| |Y|)^n <= max_cells()`.
    pub fn new(n: usize, x1: Alphabet, x2: Alphabet, y: Alphabet) -> Result<Self> {
        let per_step = (x1.size() * x2.size() * y.size()) as u128;
        alphabet::check_cells(per_step.saturating_pow(n as u32))?;
        Ok(Dims { n, x1, x2, y })
    }

    pub fn for_channel(ch: &crate::channels::FsMac, n: usize) -> Result<Self> {
        Dims::new(n, ch.x1(), ch.x2(), ch.y())
    }

    #[inline]
    pub fn n_x1(&self) -> usize {
        self.x1.count(self.n)
    }
    #[inline]
    pub fn n_x2(&self) -> usize {
        self.x2.count(self.n)
    }
    #[inline]
    pub fn n_y(&self) -> usize {
        self.y.count(self.n)
    }
    #[inline]
    pub fn cells(&self) -> usize {
        self.n_x1() * self.n_x2() * self.n_y()
    }
    #[inline]
    pub fn index(&self, x1: usize, x2: usize, y: usize) -> usize {
        (x1 * self.n_x2() + x2) * self.n_y() + y
    }
}
