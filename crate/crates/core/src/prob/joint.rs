use crate::error::{Error, Result};
use crate::prob::kernel::PathTables;
use crate::prob::pmf::plogp;
use crate::prob::{CausalChannelLaw, Dims, InitialState, PolicyPair};

/// How many leading symbols of each stream a marginal keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Prefixes {
    pub x1: usize,
    pub x2: usize,
    pub y: usize,
}

impl Prefixes {
    pub const fn new(x1: usize, x2: usize, y: usize) -> Self {
        Prefixes { x1, x2, y }
    }
}

/// The exact joint pmf `P(x1^n, x2^n, y^n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointLaw {
    dims: Dims,
    p: Vec<f64>,
    convention: InitialState,
}

impl JointLaw {
    /// Wraps an explicit tensor laid out as described in [`crate::prob`].
    pub fn from_tensor(dims: Dims, p: Vec<f64>) -> Result<Self> {
        if p.len() != dims.cells() {
            return Err(Error::Spec(format!(
                "joint has {} cells, expected {}",
                p.len(),
                dims.cells()
            )));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 || p.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::NotNormalized {
                what: "joint law".into(),
                sum: total,
            });
        }
        Ok(JointLaw {
            dims,
            p,
            convention: InitialState::Distribution(Vec::new()),
        })
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

    /// Initial-state convention of the channel law this joint came from.
    pub fn convention(&self) -> &InitialState {
        &self.convention
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Number of keys of the marginal with the given prefixes.
    pub fn marginal_len(&self, pre: Prefixes) -> usize {
        marginal_len(&self.dims, pre)
    }

    /// Marginal over prefixes, keyed `(x1p * |X2|^b + x2p) * |Y|^c + yp`.
    pub fn marginal(&self, pre: Prefixes) -> Vec<f64> {
        let mut out = vec![0.0; self.marginal_len(pre)];
        self.for_each_key(pre, |cell, key| out[key] += self.p[cell]);
        out
    }

    /// Entropy in bits of the prefix marginal.
    pub fn entropy(&self, pre: Prefixes) -> f64 {
        self.marginal(pre).iter().map(|&p| plogp(p)).sum()
    }

    /// Visits every cell with its marginal key under `pre`.
    pub fn for_each_key(&self, pre: Prefixes, f: impl FnMut(usize, usize)) {
        for_each_key(&self.dims, pre, f)
    }
}

/// Visits every cell of a `dims`-shaped table with its marginal key under
/// `pre`, in cell order.
pub(crate) fn for_each_key(d: &Dims, pre: Prefixes, mut f: impl FnMut(usize, usize)) {
    let n = d.n;
    let (nx1, nx2, ny) = (d.n_x1(), d.n_x2(), d.n_y());
    let div1 = d.x1.count(n - pre.x1);
    let div2 = d.x2.count(n - pre.x2);
    let div3 = d.y.count(n - pre.y);
    let k2 = d.x2.count(pre.x2);
    let k3 = d.y.count(pre.y);
    let mut cell = 0;
    for x1 in 0..nx1 {
        let a = (x1 / div1) * k2;
        for x2 in 0..nx2 {
            let b = (a + x2 / div2) * k3;
            for y in 0..ny {
                f(cell, b + y / div3);
                cell += 1;
            }
        }
    }
}

/// Number of keys of a marginal with the given prefixes.
pub(crate) fn marginal_len(d: &Dims, pre: Prefixes) -> usize {
    d.x1.count(pre.x1) * d.x2.count(pre.x2) * d.y.count(pre.y)
}

/// Builds `Q1(x1^n || z1^{n-1}) Q2(x2^n || z2^{n-1}) P(y^n || x1^n, x2^n)`
/// with `z_l = f_l(y)`.
pub fn joint_law(policy: &PolicyPair, law: &CausalChannelLaw) -> Result<JointLaw> {
    let tables = policy.tables(law.dims())?;
    Ok(joint_from_tables(&tables, law))
}

pub(crate) fn joint_from_tables(tables: &PathTables, law: &CausalChannelLaw) -> JointLaw {
    let d = *law.dims();
    let (nx1, nx2, ny) = (d.n_x1(), d.n_x2(), d.n_y());
    let lp = law.as_slice();
    let mut p = vec![0.0; d.cells()];
    let mut cell = 0;
    for x1 in 0..nx1 {
        let q1 = &tables.q1[x1 * ny..(x1 + 1) * ny];
        for x2 in 0..nx2 {
            let q2 = &tables.q2[x2 * ny..(x2 + 1) * ny];
            for y in 0..ny {
                p[cell] = q1[y] * q2[y] * lp[cell];
                cell += 1;
            }
        }
    }
    JointLaw {
        dims: d,
        p,
        convention: law.convention().clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::FeedbackFn;
    use crate::prob::{Alphabet, CausalKernel, User};

    fn b() -> Alphabet {
        Alphabet::binary()
    }

    #[test]
    fn uniform_everything_gives_uniform_joint() {
        let dims = Dims::new(2, b(), b(), b()).unwrap();
        let law =
            CausalChannelLaw::from_tensor(dims, vec![0.25; dims.cells()], InitialState::Given(0))
                .unwrap();
        let pol = PolicyPair::uniform(
            2,
            b(),
            b(),
            FeedbackFn::perfect(b()),
            FeedbackFn::perfect(b()),
        )
        .unwrap();
        let j = joint_law(&pol, &law).unwrap();
        assert!(j.as_slice().iter().all(|&v| (v - 1.0 / 64.0).abs() < 1e-15));
    }

    #[test]
    fn marginal_keys_follow_prefixes() {
        let dims = Dims::new(2, b(), b(), b()).unwrap();
        let p: Vec<f64> = (0..64).map(|i| i as f64 / 2016.0).collect();
        let j = JointLaw::from_tensor(dims, p.clone()).unwrap();
        let m = j.marginal(Prefixes::new(1, 0, 2));
        // x1_1 = 1, y^2 = (1, 0) collects x1_2, x2^2 free
        let expected: f64 = (0..64)
            .filter(|&c| {
                let x1 = c / 16;
                let y = c % 4;
                x1 / 2 == 1 && y == 2
            })
            .map(|c| p[c])
            .sum();
        assert!((m[1 * 4 + 2] - expected).abs() < 1e-15);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn null_feedback_joint_factorizes() {
        let dims = Dims::new(2, b(), b(), b()).unwrap();
        // P(y^2 || x^2): y_t = x1_t with prob 0.8, else flipped
        let mut lp = vec![0.0; 64];
        for c in 0..64 {
            let (x1, y) = (c / 16, c % 4);
            let mut v = 1.0;
            for t in 0..2 {
                let shift = 1 - t;
                v *= if (x1 >> shift) & 1 == (y >> shift) & 1 {
                    0.8
                } else {
                    0.2
                };
            }
            lp[c] = v;
        }
        let law = CausalChannelLaw::from_tensor(dims, lp.clone(), InitialState::Given(0)).unwrap();
        let q1 = CausalKernel::from_fn(User::One, 2, b(), Alphabet::unit(), |t, x, _| {
            if t == 0 {
                vec![0.3, 0.7]
            } else if x[0] == 0 {
                vec![0.6, 0.4]
            } else {
                vec![0.1, 0.9]
            }
        })
        .unwrap();
        let q2 = CausalKernel::iid(User::Two, 2, b(), Alphabet::unit(), &[0.45, 0.55]).unwrap();
        let pol = PolicyPair::new(
            q1.clone(),
            q2.clone(),
            FeedbackFn::none(b()),
            FeedbackFn::none(b()),
        )
        .unwrap();
        let j = joint_law(&pol, &law).unwrap();
        for c in 0..64 {
            let (x1, x2) = (c / 16, (c / 4) % 4);
            let expect = q1.seq_prob(&[x1 >> 1, x1 & 1], &[0])
                * q2.seq_prob(&[x2 >> 1, x2 & 1], &[0])
                * lp[c];
            assert!((j.as_slice()[c] - expect).abs() < 1e-16);
        }
        assert!((j.total() - 1.0).abs() < 1e-12);
    }
}
