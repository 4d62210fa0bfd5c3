//! Extraction of causally conditioned pmfs from a joint law.
//!
//! For a target stream `T` and conditioning streams `G_k` with delays
//! `d_k in {0, 1}`, the causally conditioned pmf is
//! `prod_i P(t_i | t^{i-1}, g_1^{i-d_1}, ...)`. Each factor is the ratio of
//! two prefix marginals of the joint.

use crate::error::{Error, Result};
use crate::prob::alphabet::encode;
use crate::prob::{JointLaw, Prefixes};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    X1,
    X2,
    Y,
}

/// Which causally conditioned pmf to extract.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalRequest {
    pub target: Stream,
    pub given: Vec<(Stream, usize)>,
}

impl CausalRequest {
    /// `P(y^n)`.
    pub fn output() -> Self {
        CausalRequest {
            target: Stream::Y,
            given: vec![],
        }
    }

    /// `P(y^n || x1^n, x2^n)`.
    pub fn channel() -> Self {
        CausalRequest {
            target: Stream::Y,
            given: vec![(Stream::X1, 0), (Stream::X2, 0)],
        }
    }

    /// `P(y^n || x^n)` for one input stream.
    pub fn output_given(x: Stream) -> Self {
        CausalRequest {
            target: Stream::Y,
            given: vec![(x, 0)],
        }
    }

    /// `Q(x^n || y^{n-1})`.
    pub fn input(x: Stream) -> Self {
        CausalRequest {
            target: x,
            given: vec![(Stream::Y, 1)],
        }
    }

    /// `Q(x^n || y^{n-1}, other^n)`.
    pub fn input_given_other(x: Stream) -> Self {
        let other = if x == Stream::X1 {
            Stream::X2
        } else {
            Stream::X1
        };
        CausalRequest {
            target: x,
            given: vec![(Stream::Y, 1), (other, 0)],
        }
    }

    fn validate(&self) -> Result<()> {
        for (i, &(s, d)) in self.given.iter().enumerate() {
            if s == self.target {
                return Err(Error::UnsupportedRequest(
                    "target cannot condition on itself".into(),
                ));
            }
            if d > 1 {
                return Err(Error::UnsupportedRequest(format!(
                    "delay {d} (only 0 or 1)"
                )));
            }
            if self.given[..i].iter().any(|&(o, _)| o == s) {
                return Err(Error::UnsupportedRequest("stream listed twice".into()));
            }
        }
        Ok(())
    }

    fn lens(&self, i: usize, with_target: bool) -> Prefixes {
        let mut pre = Prefixes::new(0, 0, 0);
        let slot = |pre: &mut Prefixes, s: Stream, v: usize| match s {
            Stream::X1 => pre.x1 = v,
            Stream::X2 => pre.x2 = v,
            Stream::Y => pre.y = v,
        };
        for &(s, d) in &self.given {
            slot(&mut pre, s, i.saturating_sub(d));
        }
        slot(&mut pre, self.target, if with_target { i } else { i - 1 });
        pre
    }
}

/// The conditionals at one time step, keyed by context.
#[derive(Clone, Debug)]
pub struct StepTable {
    pub context: Prefixes,
    /// `None` marks a context of probability zero.
    pub rows: Vec<Option<Vec<f64>>>,
}

/// Per-step conditional pmfs of a causally conditioned law.
#[derive(Clone, Debug)]
pub struct CausalTable {
    request: CausalRequest,
    steps: Vec<StepTable>,
    sizes: [usize; 3],
}

impl CausalTable {
    pub fn request(&self) -> &CausalRequest {
        &self.request
    }

    /// Tables for times `1..=n` (index 0 is time 1).
    pub fn steps(&self) -> &[StepTable] {
        &self.steps
    }

    /// The causally conditioned probability of a full cell, or `None` if a
    /// conditioning history along it has probability zero.
    pub fn eval(&self, x1: &[usize], x2: &[usize], y: &[usize]) -> Option<f64> {
        let mut p = 1.0;
        for (t, step) in self.steps.iter().enumerate() {
            let c = step.context;
            let k1 = encode(&x1[..c.x1], self.sizes[0]);
            let k2 = encode(&x2[..c.x2], self.sizes[1]);
            let k3 = encode(&y[..c.y], self.sizes[2]);
            let key =
                (k1 * self.sizes[1].pow(c.x2 as u32) + k2) * self.sizes[2].pow(c.y as u32) + k3;
            let row = step.rows[key].as_ref()?;
            let sym = match self.request.target {
                Stream::X1 => x1[t],
                Stream::X2 => x2[t],
                Stream::Y => y[t],
            };
            p *= row[sym];
        }
        Some(p)
    }
}

/// Extracts `P(target^n || given^{n-d})` from a joint law.
pub fn causal_conditional(joint: &JointLaw, request: &CausalRequest) -> Result<CausalTable> {
    request.validate()?;
    let d = joint.dims();
    let sizes = [d.x1.size(), d.x2.size(), d.y.size()];
    let target_size = match request.target {
        Stream::X1 => sizes[0],
        Stream::X2 => sizes[1],
        Stream::Y => sizes[2],
    };
    let mut steps = Vec::with_capacity(d.n);
    for i in 1..=d.n {
        let num_pre = request.lens(i, true);
        let ctx_pre = request.lens(i, false);
        let num = joint.marginal(num_pre);
        let ctx = joint.marginal(ctx_pre);
        let mut rows: Vec<Option<Vec<f64>>> = ctx
            .iter()
            .map(|&m| {
                if m > 0.0 {
                    Some(vec![0.0; target_size])
                } else {
                    None
                }
            })
            .collect();
        let k2 = sizes[1].pow(num_pre.x2 as u32);
        let k3 = sizes[2].pow(num_pre.y as u32);
        let c2 = sizes[1].pow(ctx_pre.x2 as u32);
        let c3 = sizes[2].pow(ctx_pre.y as u32);
        for (key, &m) in num.iter().enumerate() {
            let yp = key % k3;
            let x2p = (key / k3) % k2;
            let x1p = key / (k3 * k2);
            let (mut a, mut b, mut c) = (x1p, x2p, yp);
            let sym = match request.target {
                Stream::X1 => {
                    a = x1p / sizes[0];
                    x1p % sizes[0]
                }
                Stream::X2 => {
                    b = x2p / sizes[1];
                    x2p % sizes[1]
                }
                Stream::Y => {
                    c = yp / sizes[2];
                    yp % sizes[2]
                }
            };
            let ckey = (a * c2 + b) * c3 + c;
            if let Some(row) = rows[ckey].as_mut() {
                row[sym] = m / ctx[ckey];
            }
        }
        steps.push(StepTable {
            context: ctx_pre,
            rows,
        });
    }
    Ok(CausalTable {
        request: request.clone(),
        steps,
        sizes,
    })
}
