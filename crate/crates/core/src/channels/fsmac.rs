use serde::{Deserialize, Serialize};

use crate::channels::spec_file::Builder;
use crate::error::{Error, Result};
use crate::prob::pmf::sanitize_row;
use crate::prob::Alphabet;

/// A finite-state multiple-access channel `P(y, s' | x1, x2, s)`.
///
/// The kernel is stored flat in row-major order over
/// `(x1, x2, s_prev, y, s_next)`; each `(x1, x2, s_prev)` row is a pmf over
/// `(y, s_next)`. A single-user channel is an `FsMac` whose second input
/// alphabet has one symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct FsMac {
    states: Alphabet,
    x1: Alphabet,
    x2: Alphabet,
    y: Alphabet,
    kernel: Vec<f64>,
    initial_dist: Option<Vec<f64>>,
    builder: Option<Builder>,
}

impl FsMac {
    pub fn new(
        states: Alphabet,
        x1: Alphabet,
        x2: Alphabet,
        y: Alphabet,
        mut kernel: Vec<f64>,
        initial_dist: Option<Vec<f64>>,
    ) -> Result<Self> {
        let row_len = y.size() * states.size();
        let rows = x1.size() * x2.size() * states.size();
        if kernel.len() != rows * row_len {
            return Err(Error::Spec(format!(
                "kernel has {} entries, expected {}",
                kernel.len(),
                rows * row_len
            )));
        }
        for (r, row) in kernel.chunks_mut(row_len).enumerate() {
            sanitize_row(row, || {
                let s = r % states.size();
                let x2v = (r / states.size()) % x2.size();
                let x1v = r / (states.size() * x2.size());
                format!("kernel row (x1={x1v}, x2={x2v}, s={s})")
            })?;
        }
        let initial_dist = match initial_dist {
            Some(mut d) => {
                if d.len() != states.size() {
                    return Err(Error::Spec(format!(
                        "initial_dist has {} entries, expected {}",
                        d.len(),
                        states.size()
                    )));
                }
                sanitize_row(&mut d, || "initial_dist".into())?;
                Some(d)
            }
            None => None,
        };
        Ok(FsMac {
            states,
            x1,
            x2,
            y,
            kernel,
            initial_dist,
            builder: None,
        })
    }

    /// Builds from a function `(x1, x2, s) -> pmf over (y, s')`.
    pub fn from_fn(
        states: Alphabet,
        x1: Alphabet,
        x2: Alphabet,
        y: Alphabet,
        mut row: impl FnMut(usize, usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        let mut kernel =
            Vec::with_capacity(x1.size() * x2.size() * states.size() * y.size() * states.size());
        for a in 0..x1.size() {
            for b in 0..x2.size() {
                for s in 0..states.size() {
                    let r = row(a, b, s);
                    if r.len() != y.size() * states.size() {
                        return Err(Error::Spec("row length mismatch".into()));
                    }
                    kernel.extend(r);
                }
            }
        }
        FsMac::new(states, x1, x2, y, kernel, None)
    }

    /// A memoryless MAC `P(y | x1, x2)`.
    pub fn memoryless(
        x1: Alphabet,
        x2: Alphabet,
        y: Alphabet,
        law: impl Fn(usize, usize) -> Vec<f64>,
    ) -> Result<Self> {
        FsMac::from_fn(Alphabet::unit(), x1, x2, y, |a, b, _| law(a, b))
    }

    /// A single-user channel `P(y, s' | x, s)`; the second input is absent.
    pub fn single_user(
        states: Alphabet,
        x: Alphabet,
        y: Alphabet,
        kernel: Vec<f64>,
    ) -> Result<Self> {
        FsMac::new(states, x, Alphabet::unit(), y, kernel, None)
    }

    pub fn with_initial_dist(mut self, dist: Vec<f64>) -> Result<Self> {
        let mut d = dist;
        if d.len() != self.states.size() {
            return Err(Error::Spec("initial_dist length mismatch".into()));
        }
        sanitize_row(&mut d, || "initial_dist".into())?;
        self.initial_dist = Some(d);
        Ok(self)
    }

    pub(crate) fn with_builder(mut self, builder: Builder) -> Self {
        self.builder = Some(builder);
        self
    }

    pub fn states(&self) -> Alphabet {
        self.states
    }
    pub fn x1(&self) -> Alphabet {
        self.x1
    }
    pub fn x2(&self) -> Alphabet {
        self.x2
    }
    pub fn y(&self) -> Alphabet {
        self.y
    }
    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }
    pub fn initial_dist(&self) -> Option<&[f64]> {
        self.initial_dist.as_deref()
    }
    pub fn builder(&self) -> Option<&Builder> {
        self.builder.as_ref()
    }

    pub fn is_single_user(&self) -> bool {
        self.x2.size() == 1
    }

    /// The pmf over `(y, s')`, laid out as `y * |S| + s'`.
    #[inline]
    pub fn row(&self, x1: usize, x2: usize, s: usize) -> &[f64] {
        let len = self.y.size() * self.states.size();
        let r = (x1 * self.x2.size() + x2) * self.states.size() + s;
        &self.kernel[r * len..(r + 1) * len]
    }

    #[inline]
    pub fn prob(&self, x1: usize, x2: usize, s: usize, y: usize, s_next: usize) -> f64 {
        self.row(x1, x2, s)[y * self.states.size() + s_next]
    }

    /// `P(y | x1, x2, s)` with the next state summed out.
    pub fn output_prob(&self, x1: usize, x2: usize, s: usize, y: usize) -> f64 {
        let ns = self.states.size();
        self.row(x1, x2, s)[y * ns..(y + 1) * ns].iter().sum()
    }

    /// `P(s' | x1, x2, s)` with the output summed out.
    pub fn state_transition(&self, x1: usize, x2: usize, s: usize) -> Vec<f64> {
        let ns = self.states.size();
        let row = self.row(x1, x2, s);
        let mut out = vec![0.0; ns];
        for y in 0..self.y.size() {
            for (t, o) in out.iter_mut().enumerate() {
                *o += row[y * ns + t];
            }
        }
        out
    }
}

/// A deterministic, time-invariant feedback map `z = f(y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackFn {
    map: Vec<usize>,
    range: Alphabet,
}

impl FeedbackFn {
    pub fn new(map: Vec<usize>, range: Alphabet) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        for &z in &map {
            range.check(z)?;
        }
        Ok(FeedbackFn { map, range })
    }

    /// `z = y`.
    pub fn perfect(y: Alphabet) -> Self {
        FeedbackFn {
            map: (0..y.size()).collect(),
            range: y,
        }
    }

    /// A constant map onto a single symbol.
    pub fn none(y: Alphabet) -> Self {
        FeedbackFn {
            map: vec![0; y.size()],
            range: Alphabet::unit(),
        }
    }

    /// Uniform quantiser onto `levels` symbols: `z = floor(y * levels / |Y|)`.
    pub fn quantized(y: Alphabet, levels: usize) -> Result<Self> {
        if levels == 0 || levels > y.size() {
            return Err(Error::InvalidParameter(format!(
                "quantizer needs 1..={} levels, got {levels}",
                y.size()
            )));
        }
        let map = (0..y.size()).map(|v| v * levels / y.size()).collect();
        FeedbackFn::new(map, Alphabet::new(levels)?)
    }

    #[inline]
    pub fn apply(&self, y: usize) -> usize {
        self.map[y]
    }

    pub fn domain(&self) -> usize {
        self.map.len()
    }

    pub fn range(&self) -> Alphabet {
        self.range
    }

    pub fn is_null(&self) -> bool {
        self.range.size() == 1
    }

    /// `none`, `perfect`, or the explicit map.
    pub fn label(&self) -> String {
        if self.is_null() {
            "none".into()
        } else if self.range.size() == self.map.len()
            && self.map.iter().enumerate().all(|(y, &z)| y == z)
        {
            "perfect".into()
        } else {
            format!("map:{:?}", self.map)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized_kernel() {
        let b = Alphabet::binary();
        let err = FsMac::memoryless(b, b, b, |_, _| vec![0.5, 0.6]).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }

    #[test]
    fn kernel_layout() {
        let b = Alphabet::binary();
        let ch = FsMac::memoryless(b, b, b, |a, c| {
            let y = a ^ c;
            let mut r = vec![0.0; 2];
            r[y] = 1.0;
            r
        })
        .unwrap();
        assert_eq!(ch.prob(1, 0, 0, 1, 0), 1.0);
        assert_eq!(ch.output_prob(1, 1, 0, 0), 1.0);
        assert_eq!(ch.state_transition(0, 1, 0), vec![1.0]);
    }

    #[test]
    fn feedback_maps() {
        let y = Alphabet::new(4).unwrap();
        let q = FeedbackFn::quantized(y, 2).unwrap();
        assert_eq!(
            (0..4).map(|v| q.apply(v)).collect::<Vec<_>>(),
            vec![0, 0, 1, 1]
        );
        assert!(FeedbackFn::none(y).is_null());
        assert_eq!(FeedbackFn::perfect(y).apply(3), 3);
        assert!(FeedbackFn::quantized(y, 5).is_err());
        assert!(FeedbackFn::new(vec![0, 2], Alphabet::binary()).is_err());
    }
}
