//! Finite grids of causal input policies.
//!
//! Every row of a kernel is drawn from the simplex lattice
//! `{k / resolution}`; the grid is the product over all rows the chosen
//! [`PolicyForm`] lets vary.

use serde::{Deserialize, Serialize};

use crate::channels::FeedbackFn;
use crate::error::{Error, Result};
use crate::prob::{Alphabet, CausalKernel, User};

/// Default cap on the number of policy pairs a sweep may visit.
pub const DEFAULT_PAIR_BUDGET: u128 = 1 << 22;

/// Which histories a policy row may depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyForm {
    /// One pmf used at every time step.
    Iid,
    /// A row per time and feedback history `z^{t-1}`: a code-tree law.
    /// With null feedback this is a time-varying product law.
    Feedback,
    /// A row per time and own-input history `x^{t-1}`: an arbitrary
    /// `Q(x^n)` without feedback.
    OpenLoop,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyGrid {
    pub resolution: usize,
    pub form: PolicyForm,
    pub budget: u128,
}

impl PolicyGrid {
    pub fn new(resolution: usize, form: PolicyForm) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidParameter(
                "grid resolution must be at least 1".into(),
            ));
        }
        Ok(PolicyGrid {
            resolution,
            form,
            budget: DEFAULT_PAIR_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    /// All pmfs of length `len` with entries in `{0, 1/r, ..., 1}`.
    pub fn simplex_points(&self, len: usize) -> Vec<Vec<f64>> {
        let r = self.resolution;
        let mut out = Vec::new();
        let mut counts = vec![0usize; len];
        fn rec(i: usize, left: usize, r: usize, counts: &mut [usize], out: &mut Vec<Vec<f64>>) {
            if i + 1 == counts.len() {
                counts[i] = left;
                out.push(counts.iter().map(|&c| c as f64 / r as f64).collect());
                return;
            }
            for c in (0..=left).rev() {
                counts[i] = c;
                rec(i + 1, left - c, r, counts, out);
            }
        }
        rec(0, r, r, &mut counts, &mut out);
        out
    }

    /// Number of free rows of one user's kernel.
    fn free_rows(&self, depth: usize, input: Alphabet, feedback: Alphabet) -> u128 {
        match self.form {
            PolicyForm::Iid => 1,
            PolicyForm::Feedback => (0..depth).map(|t| feedback.count_wide(t)).sum(),
            PolicyForm::OpenLoop => (0..depth).map(|t| input.count_wide(t)).sum(),
        }
    }

    /// Number of kernels the grid holds for one user.
    pub fn kernel_count(&self, depth: usize, input: Alphabet, feedback: Alphabet) -> u128 {
        let points = self.simplex_points(input.size()).len() as u128;
        let rows = self.free_rows(depth, input, feedback);
        points
            .checked_pow(rows.min(u32::MAX as u128) as u32)
            .unwrap_or(u128::MAX)
    }

    pub fn pair_count(
        &self,
        depth: usize,
        x1: Alphabet,
        x2: Alphabet,
        f1: &FeedbackFn,
        f2: &FeedbackFn,
    ) -> u128 {
        self.kernel_count(depth, x1, f1.range())
            .saturating_mul(self.kernel_count(depth, x2, f2.range()))
    }

    /// Enumerates one user's kernels.
    pub fn kernels(
        &self,
        user: User,
        depth: usize,
        input: Alphabet,
        feedback: Alphabet,
    ) -> Result<Vec<CausalKernel>> {
        let count = self.kernel_count(depth, input, feedback);
        if count > self.budget {
            return Err(Error::Budget {
                requested: count,
                budget: self.budget,
            });
        }
        let points = self.simplex_points(input.size());
        let rows = self.free_rows(depth, input, feedback) as usize;
        // offsets of the first free row at each time step
        let offsets: Vec<usize> = (0..depth)
            .scan(0usize, |acc, t| {
                let here = *acc;
                *acc += match self.form {
                    PolicyForm::Iid => 0,
                    PolicyForm::Feedback => feedback.count(t),
                    PolicyForm::OpenLoop => input.count(t),
                };
                Some(here)
            })
            .collect();
        let mut choice = vec![0usize; rows];
        let mut out = Vec::with_capacity(count as usize);
        loop {
            let kernel = CausalKernel::from_fn(user, depth, input, feedback, |t, x, z| {
                let slot = match self.form {
                    PolicyForm::Iid => 0,
                    PolicyForm::Feedback => {
                        offsets[t] + crate::prob::alphabet::encode(z, feedback.size())
                    }
                    PolicyForm::OpenLoop => {
                        offsets[t] + crate::prob::alphabet::encode(x, input.size())
                    }
                };
                points[choice[slot]].clone()
            })?;
            out.push(kernel);
            // odometer
            let mut k = 0;
            loop {
                if k == rows {
                    return Ok(out);
                }
                choice[k] += 1;
                if choice[k] < points.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }

    /// Both users' kernel lists, checked against the pair budget.
    pub fn kernel_lists(
        &self,
        depth: usize,
        x1: Alphabet,
        x2: Alphabet,
        f1: &FeedbackFn,
        f2: &FeedbackFn,
    ) -> Result<(Vec<CausalKernel>, Vec<CausalKernel>)> {
        let pairs = self.pair_count(depth, x1, x2, f1, f2);
        if pairs > self.budget {
            return Err(Error::Budget {
                requested: pairs,
                budget: self.budget,
            });
        }
        Ok((
            self.kernels(User::One, depth, x1, f1.range())?,
            self.kernels(User::Two, depth, x2, f2.range())?,
        ))
    }
}
