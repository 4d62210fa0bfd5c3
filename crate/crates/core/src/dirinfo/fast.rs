//! Pentagon quantities for many policy pairs against a fixed channel law.
//!
//! When the joint is built from a causal law `L = P(y^n || x1^n, x2^n)`,
//! `H(Y^n || X1^n, X2^n) = -E[log2 L]`, so the fully conditioned entropy
//! needs no marginals. The remaining causal entropies use precomputed
//! marginal key maps.

use crate::prob::joint::{for_each_key, marginal_len};
use crate::prob::kernel::PathTables;
use crate::prob::pmf::plogp;
use crate::prob::{CausalChannelLaw, Dims, Prefixes};

/// A channel law with its entrywise `log2`.
pub(crate) struct LawTerms {
    pub law: CausalChannelLaw,
    log2: Vec<f64>,
}

impl LawTerms {
    pub fn new(law: CausalChannelLaw) -> Self {
        let log2 = law
            .as_slice()
            .iter()
            .map(|&v| if v > 0.0 { v.log2() } else { 0.0 })
            .collect();
        LawTerms { law, log2 }
    }
}

struct KeyMap {
    keys: Vec<u32>,
    len: usize,
}

impl KeyMap {
    fn new(d: &Dims, pre: Prefixes) -> Self {
        let mut keys = vec![0u32; d.cells()];
        for_each_key(d, pre, |cell, key| keys[cell] = key as u32);
        KeyMap {
            keys,
            len: marginal_len(d, pre),
        }
    }
}

pub(crate) struct FastEval {
    y: KeyMap,
    /// For each step `i`: keys of `(X^i, Y^i)` and `(X^i, Y^{i-1})`, per user.
    x1: Vec<(KeyMap, KeyMap)>,
    x2: Vec<(KeyMap, KeyMap)>,
    buf: Vec<f64>,
    joint: Vec<f64>,
}

impl FastEval {
    /// `with_conditioned` precomputes what the two single-user bounds need.
    pub fn new(d: &Dims, with_conditioned: bool) -> Self {
        let n = d.n;
        let steps = |user_one: bool| -> Vec<(KeyMap, KeyMap)> {
            if !with_conditioned {
                return Vec::new();
            }
            (1..=n)
                .map(|i| {
                    let pre = |y| {
                        if user_one {
                            Prefixes::new(i, 0, y)
                        } else {
                            Prefixes::new(0, i, y)
                        }
                    };
                    (KeyMap::new(d, pre(i)), KeyMap::new(d, pre(i - 1)))
                })
                .collect()
        };
        let x1 = steps(true);
        let x2 = steps(false);
        let y = KeyMap::new(d, Prefixes::new(0, 0, n));
        let max_len = x1
            .iter()
            .chain(&x2)
            .flat_map(|(a, b)| [a.len, b.len])
            .chain([y.len])
            .max()
            .unwrap_or(1);
        FastEval {
            y,
            x1,
            x2,
            buf: vec![0.0; max_len],
            joint: vec![0.0; d.cells()],
        }
    }

    /// Fills the joint for one pair of policy path tables.
    pub fn load(&mut self, q1: &[f64], q2: &[f64], law: &LawTerms) {
        let d = law.law.dims();
        let (nx1, nx2, ny) = (d.n_x1(), d.n_x2(), d.n_y());
        let lp = law.law.as_slice();
        let mut cell = 0;
        for x1 in 0..nx1 {
            let a = &q1[x1 * ny..(x1 + 1) * ny];
            for x2 in 0..nx2 {
                let b = &q2[x2 * ny..(x2 + 1) * ny];
                for y in 0..ny {
                    self.joint[cell] = a[y] * b[y] * lp[cell];
                    cell += 1;
                }
            }
        }
    }

    pub fn load_tables(&mut self, t: &PathTables, law: &LawTerms) {
        self.load(&t.q1, &t.q2, law)
    }

    fn entropy(joint: &[f64], buf: &mut [f64], map: &KeyMap) -> f64 {
        let buf = &mut buf[..map.len];
        for (&p, &k) in joint.iter().zip(&map.keys) {
            buf[k as usize] += p;
        }
        let mut h = 0.0;
        for v in buf.iter_mut() {
            h += plogp(*v);
            *v = 0.0;
        }
        h
    }

    /// `-E[log2 L]` for the loaded joint.
    fn full_entropy(&self, law: &LawTerms) -> f64 {
        let mut acc = 0.0;
        for (&p, &l) in self.joint.iter().zip(&law.log2) {
            if p > 0.0 {
                acc -= p * l;
            }
        }
        acc
    }

    fn causal_entropy(&mut self, user_one: bool) -> f64 {
        let maps = if user_one { &self.x1 } else { &self.x2 };
        let mut h = 0.0;
        for (with, without) in maps {
            h += Self::entropy(&self.joint, &mut self.buf, with)
                - Self::entropy(&self.joint, &mut self.buf, without);
        }
        h
    }

    /// `I((X1, X2)^n -> Y^n)` in bits (total, not per use).
    pub fn sum_rate(&mut self, law: &LawTerms) -> f64 {
        Self::entropy(&self.joint, &mut self.buf, &self.y) - self.full_entropy(law)
    }

    /// `[I(X1 -> Y || X2), I(X2 -> Y || X1), I((X1, X2) -> Y)]`, totals in bits.
    pub fn triple(&mut self, law: &LawTerms) -> [f64; 3] {
        let full = self.full_entropy(law);
        let hy = Self::entropy(&self.joint, &mut self.buf, &self.y);
        let given2 = self.causal_entropy(false);
        let given1 = self.causal_entropy(true);
        [given2 - full, given1 - full, hy - full]
    }

    pub fn joint(&self) -> &[f64] {
        &self.joint
    }
}
