//! Causal input policies (code-tree distributions).
//!
//! A [`CausalKernel`] assigns, at every time `t` and for every past of the
//! user's own inputs and received feedback, a pmf over the next input
//! symbol. The probability of a whole input sequence causally conditioned on
//! the feedback sequence is the product of these rows along the path.

use serde::{Deserialize, Serialize};

use crate::channels::FeedbackFn;
use crate::error::{Error, Result};
use crate::prob::alphabet::{check_cells, decode_into, encode};
use crate::prob::pmf::sanitize_row;
use crate::prob::{Alphabet, Dims};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum User {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl User {
    pub fn other(self) -> User {
        match self {
            User::One => User::Two,
            User::Two => User::One,
        }
    }
}

/// `Q(x^n || z^{n-1})` as per-step rows `Q(x_t | x^{t-1}, z^{t-1})`.
///
/// `rows[t]` holds `|X|^t * |Z|^t` pmfs of length `|X|`, indexed by
/// `(x_hist * |Z|^t + z_hist) * |X| + x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalKernel {
    user: User,
    input: Alphabet,
    feedback: Alphabet,
    rows: Vec<Vec<f64>>,
}

impl CausalKernel {
    pub fn new(
        user: User,
        input: Alphabet,
        feedback: Alphabet,
        mut rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter(
                "kernel depth must be at least 1".into(),
            ));
        }
        let a = input.size();
        let mut cells: u128 = 0;
        for t in 0..rows.len() {
            cells += input.count_wide(t) * feedback.count_wide(t) * a as u128;
        }
        check_cells(cells)?;
        for (t, table) in rows.iter_mut().enumerate() {
            let expected = input.count(t) * feedback.count(t) * a;
            if table.len() != expected {
                return Err(Error::Spec(format!(
                    "kernel time {t} has {} entries, expected {expected}",
                    table.len()
                )));
            }
            for (h, row) in table.chunks_mut(a).enumerate() {
                sanitize_row(row, || format!("kernel row (t={t}, history={h})"))?;
            }
        }
        Ok(CausalKernel {
            user,
            input,
            feedback,
            rows,
        })
    }

    /// Builds from `(t, x_hist, z_hist) -> pmf`, with `t` zero-based.
    pub fn from_fn(
        user: User,
        depth: usize,
        input: Alphabet,
        feedback: Alphabet,
        mut f: impl FnMut(usize, &[usize], &[usize]) -> Vec<f64>,
    ) -> Result<Self> {
        let a = input.size();
        let mut rows = Vec::with_capacity(depth);
        let mut xh = vec![0; depth];
        let mut zh = vec![0; depth];
        for t in 0..depth {
            let (nx, nz) = (input.count(t), feedback.count(t));
            check_cells(nx as u128 * nz as u128 * a as u128)?;
            let mut table = Vec::with_capacity(nx * nz * a);
            for xc in 0..nx {
                decode_into(xc, a, &mut xh[..t]);
                for zc in 0..nz {
                    decode_into(zc, feedback.size(), &mut zh[..t]);
                    let row = f(t, &xh[..t], &zh[..t]);
                    if row.len() != a {
                        return Err(Error::Spec("kernel row length mismatch".into()));
                    }
                    table.extend(row);
                }
            }
            rows.push(table);
        }
        CausalKernel::new(user, input, feedback, rows)
    }

    /// A code-tree law that depends on the feedback history only:
    /// `by_time[t][z_hist]` is the pmf at time `t`.
    pub fn from_feedback_rows(
        user: User,
        input: Alphabet,
        feedback: Alphabet,
        by_time: &[Vec<Vec<f64>>],
    ) -> Result<Self> {
        for (t, rows) in by_time.iter().enumerate() {
            if rows.len() != feedback.count(t) {
                return Err(Error::Spec(format!(
                    "time {t} needs {} feedback rows, got {}",
                    feedback.count(t),
                    rows.len()
                )));
            }
        }
        let fb = feedback.size();
        CausalKernel::from_fn(user, by_time.len(), input, feedback, |t, _, z| {
            by_time[t][encode(z, fb)].clone()
        })
    }

    /// Inputs drawn i.i.d. from `pmf`, ignoring feedback.
    pub fn iid(
        user: User,
        depth: usize,
        input: Alphabet,
        feedback: Alphabet,
        pmf: &[f64],
    ) -> Result<Self> {
        CausalKernel::from_fn(user, depth, input, feedback, |_, _, _| pmf.to_vec())
    }

    pub fn uniform(user: User, depth: usize, input: Alphabet, feedback: Alphabet) -> Result<Self> {
        let p = vec![1.0 / input.size() as f64; input.size()];
        CausalKernel::iid(user, depth, input, feedback, &p)
    }

    pub fn user(&self) -> User {
        self.user
    }
    pub fn depth(&self) -> usize {
        self.rows.len()
    }
    pub fn input(&self) -> Alphabet {
        self.input
    }
    pub fn feedback(&self) -> Alphabet {
        self.feedback
    }

    /// `Q(. | x_hist, z_hist)` at zero-based time `t`, histories as codes of
    /// length `t`.
    #[inline]
    pub fn row(&self, t: usize, x_hist: usize, z_hist: usize) -> &[f64] {
        let a = self.input.size();
        let h = x_hist * self.feedback.count(t) + z_hist;
        &self.rows[t][h * a..(h + 1) * a]
    }

    /// `Q(x^n || z^{n-1})` for full sequences; `z` needs at least `n - 1`
    /// symbols and extra ones are ignored.
    pub fn seq_prob(&self, x: &[usize], z: &[usize]) -> f64 {
        let (a, fb) = (self.input.size(), self.feedback.size());
        let mut p = 1.0;
        let (mut xc, mut zc) = (0usize, 0usize);
        for (t, &xt) in x.iter().enumerate() {
            p *= self.row(t, xc, zc)[xt];
            if p == 0.0 {
                return 0.0;
            }
            xc = xc * a + xt;
            if t + 1 < x.len() {
                zc = zc * fb + z[t];
            }
        }
        p
    }

    /// True if no row depends on the feedback history.
    pub fn ignores_feedback(&self) -> bool {
        (0..self.depth()).all(|t| {
            let nz = self.feedback.count(t);
            (0..self.input.count(t)).all(|xh| {
                let first = self.row(t, xh, 0);
                (1..nz).all(|zh| self.row(t, xh, zh) == first)
            })
        })
    }

    /// Concatenation of two code-tree laws: the second block only sees its
    /// own inputs and feedback.
    pub fn concat(&self, other: &CausalKernel) -> Result<CausalKernel> {
        if self.input != other.input || self.feedback != other.feedback || self.user != other.user {
            return Err(Error::AlphabetMismatch(
                "concatenated kernels must share user and alphabets".into(),
            ));
        }
        let n = self.depth();
        let (a, fb) = (self.input.size(), self.feedback.size());
        CausalKernel::from_fn(
            self.user,
            n + other.depth(),
            self.input,
            self.feedback,
            |t, x, z| {
                if t < n {
                    self.row(t, encode(x, a), encode(z, fb)).to_vec()
                } else {
                    let u = t - n;
                    other
                        .row(u, encode(&x[n..], a), encode(&z[n..], fb))
                        .to_vec()
                }
            },
        )
    }

    /// `K` independent copies concatenated.
    pub fn repeat(&self, k: usize) -> Result<CausalKernel> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "repeat count must be at least 1".into(),
            ));
        }
        let mut out = self.clone();
        for _ in 1..k {
            out = out.concat(self)?;
        }
        Ok(out)
    }

    /// `Q(x^n || z^{n-1}(y))` for every `(x^n, y^n)`, indexed `x * |Y|^n + y`.
    pub fn path_table(&self, feedback: &FeedbackFn, y: Alphabet) -> Vec<f64> {
        let n = self.depth();
        let (nx, ny) = (self.input.count(n), y.count(n));
        let mut out = vec![0.0; nx * ny];
        let mut xs = vec![0; n];
        let mut ys = vec![0; n];
        let mut zs = vec![0; n];
        for yc in 0..ny {
            decode_into(yc, y.size(), &mut ys);
            for (z, &v) in zs.iter_mut().zip(&ys) {
                *z = feedback.apply(v);
            }
            for xc in 0..nx {
                decode_into(xc, self.input.size(), &mut xs);
                out[xc * ny + yc] = self.seq_prob(&xs, &zs);
            }
        }
        out
    }
}

/// Two input policies together with the feedback maps they observe.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyPair {
    pub q1: CausalKernel,
    pub q2: CausalKernel,
    pub f1: FeedbackFn,
    pub f2: FeedbackFn,
}

impl PolicyPair {
    pub fn new(q1: CausalKernel, q2: CausalKernel, f1: FeedbackFn, f2: FeedbackFn) -> Result<Self> {
        if q1.depth() != q2.depth() {
            return Err(Error::AlphabetMismatch(format!(
                "kernel depths differ: {} vs {}",
                q1.depth(),
                q2.depth()
            )));
        }
        if q1.feedback() != f1.range() || q2.feedback() != f2.range() {
            return Err(Error::AlphabetMismatch(
                "kernel feedback alphabets must match the feedback map ranges".into(),
            ));
        }
        if f1.domain() != f2.domain() {
            return Err(Error::AlphabetMismatch(
                "feedback maps have different domains".into(),
            ));
        }
        Ok(PolicyPair { q1, q2, f1, f2 })
    }

    /// Uniform i.i.d. inputs for both users, with the given feedback maps.
    pub fn uniform(
        depth: usize,
        x1: Alphabet,
        x2: Alphabet,
        f1: FeedbackFn,
        f2: FeedbackFn,
    ) -> Result<Self> {
        let q1 = CausalKernel::uniform(User::One, depth, x1, f1.range())?;
        let q2 = CausalKernel::uniform(User::Two, depth, x2, f2.range())?;
        PolicyPair::new(q1, q2, f1, f2)
    }

    pub fn depth(&self) -> usize {
        self.q1.depth()
    }

    pub fn concat(&self, other: &PolicyPair) -> Result<PolicyPair> {
        if self.f1 != other.f1 || self.f2 != other.f2 {
            return Err(Error::AlphabetMismatch(
                "concatenated policies must share feedback maps".into(),
            ));
        }
        PolicyPair::new(
            self.q1.concat(&other.q1)?,
            self.q2.concat(&other.q2)?,
            self.f1.clone(),
            self.f2.clone(),
        )
    }

    pub fn repeat(&self, k: usize) -> Result<PolicyPair> {
        PolicyPair::new(
            self.q1.repeat(k)?,
            self.q2.repeat(k)?,
            self.f1.clone(),
            self.f2.clone(),
        )
    }

    pub(crate) fn check_dims(&self, dims: &Dims) -> Result<()> {
        if self.depth() != dims.n {
            return Err(Error::AlphabetMismatch(format!(
                "policy depth {} but law depth {}",
                self.depth(),
                dims.n
            )));
        }
        if self.q1.input() != dims.x1 || self.q2.input() != dims.x2 {
            return Err(Error::AlphabetMismatch(
                "policy input alphabets differ from the channel's".into(),
            ));
        }
        if self.f1.domain() != dims.y.size() {
            return Err(Error::AlphabetMismatch(
                "feedback maps are not defined on the output alphabet".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn tables(&self, dims: &Dims) -> Result<PathTables> {
        self.check_dims(dims)?;
        Ok(PathTables {
            q1: self.q1.path_table(&self.f1, dims.y),
            q2: self.q2.path_table(&self.f2, dims.y),
        })
    }
}

/// Policy path probabilities against every output sequence.
pub(crate) struct PathTables {
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Alphabet {
        Alphabet::binary()
    }

    #[test]
    fn seq_prob_multiplies_rows() {
        // Q(x1) = (0.3, 0.7); Q(x2 | x1, z1) = z1 ? (0.9, 0.1) : (0.2, 0.8)
        let k = CausalKernel::from_fn(User::One, 2, b(), b(), |t, _, z| match (t, z.first()) {
            (0, _) => vec![0.3, 0.7],
            (_, Some(1)) => vec![0.9, 0.1],
            _ => vec![0.2, 0.8],
        })
        .unwrap();
        assert!((k.seq_prob(&[1, 0], &[1]) - 0.7 * 0.9).abs() < 1e-15);
        assert!((k.seq_prob(&[0, 1], &[0]) - 0.3 * 0.8).abs() < 1e-15);
        assert!(!k.ignores_feedback());
        let total: f64 = (0..4).map(|c| k.seq_prob(&[c >> 1, c & 1], &[1])).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn concat_restarts_histories() {
        let k = CausalKernel::from_fn(User::One, 2, b(), b(), |t, x, z| match t {
            0 => vec![0.5, 0.5],
            _ => {
                if x[0] == z[0] {
                    vec![1.0, 0.0]
                } else {
                    vec![0.0, 1.0]
                }
            }
        })
        .unwrap();
        let kk = k.concat(&k).unwrap();
        assert_eq!(kk.depth(), 4);
        let lhs = kk.seq_prob(&[1, 1, 0, 1], &[0, 0, 1]);
        let rhs = k.seq_prob(&[1, 1], &[0]) * k.seq_prob(&[0, 1], &[1]);
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, 0.25);
    }

    #[test]
    fn policy_pair_checks_alphabets() {
        let q1 = CausalKernel::uniform(User::One, 2, b(), b()).unwrap();
        let q2 = CausalKernel::uniform(User::Two, 1, b(), b()).unwrap();
        let f = FeedbackFn::perfect(b());
        assert!(PolicyPair::new(q1.clone(), q2, f.clone(), f.clone()).is_err());
        let q2 = CausalKernel::uniform(User::Two, 2, b(), b()).unwrap();
        assert!(PolicyPair::new(q1, q2, f, FeedbackFn::none(b())).is_err());
    }
}
