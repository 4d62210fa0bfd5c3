//! Constructors for the standard example channels.

use serde::{Deserialize, Serialize};

use crate::channels::spec_file::{Builder, ChannelSpec};
use crate::channels::{stationary_distribution, FsMac};
use crate::error::{Error, Result};
use crate::prob::alphabet::check_cells;
use crate::prob::pmf::{check_probability, sanitize_row};
use crate::prob::Alphabet;

/// Largest composite state space [`limited_isi_to_fsmac`] will build.
pub const MAX_ISI_STATES: usize = 4096;

/// A hidden-Markov noise source: a state chain and a per-state emission pmf
/// over noise symbols `0..arity`.
///
/// The noise symbol at time `i` is emitted by the state at time `i - 1`,
/// matching the channel convention that the output depends on `s_{i-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNoise", into = "RawNoise")]
pub struct NoiseChain {
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawNoise {
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<f64>>,
}

impl TryFrom<RawNoise> for NoiseChain {
    type Error = Error;
    fn try_from(r: RawNoise) -> Result<Self> {
        NoiseChain::new(r.transition, r.emission)
    }
}

impl From<NoiseChain> for RawNoise {
    fn from(n: NoiseChain) -> Self {
        RawNoise {
            transition: n.transition,
            emission: n.emission,
        }
    }
}

impl NoiseChain {
    pub fn new(mut transition: Vec<Vec<f64>>, mut emission: Vec<Vec<f64>>) -> Result<Self> {
        let ns = transition.len();
        if ns == 0 || emission.len() != ns {
            return Err(Error::Spec(
                "noise chain needs one emission row per state".into(),
            ));
        }
        for (s, row) in transition.iter_mut().enumerate() {
            if row.len() != ns {
                return Err(Error::Spec("noise transition matrix must be square".into()));
            }
            sanitize_row(row, || format!("noise transition row {s}"))?;
        }
        let arity = emission[0].len();
        for (s, row) in emission.iter_mut().enumerate() {
            if row.len() != arity || arity == 0 {
                return Err(Error::Spec(
                    "emission rows must share one nonzero length".into(),
                ));
            }
            sanitize_row(row, || format!("noise emission row {s}"))?;
        }
        Ok(NoiseChain {
            transition,
            emission,
        })
    }

    /// Memoryless noise with the given pmf.
    pub fn iid(pmf: Vec<f64>) -> Result<Self> {
        NoiseChain::new(vec![vec![1.0]], vec![pmf])
    }

    /// Memoryless binary noise, `P(v = 1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        check_probability(p, "bernoulli parameter")?;
        NoiseChain::iid(vec![1.0 - p, p])
    }

    /// Two-state good/bad binary noise. State 0 is good; `alpha` is the
    /// probability of leaving the good state and `beta` of leaving the bad.
    pub fn gilbert_elliott(alpha: f64, beta: f64, p_good: f64, p_bad: f64) -> Result<Self> {
        for (v, name) in [
            (alpha, "alpha"),
            (beta, "beta"),
            (p_good, "p_good"),
            (p_bad, "p_bad"),
        ] {
            check_probability(v, name)?;
        }
        NoiseChain::new(
            vec![vec![1.0 - alpha, alpha], vec![beta, 1.0 - beta]],
            vec![vec![1.0 - p_good, p_good], vec![1.0 - p_bad, p_bad]],
        )
    }

    pub fn states(&self) -> usize {
        self.transition.len()
    }

    pub fn arity(&self) -> usize {
        self.emission[0].len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn emission(&self) -> &[Vec<f64>] {
        &self.emission
    }

    pub fn stationary(&self) -> Result<Vec<f64>> {
        stationary_distribution(&self.transition)
    }

    /// `P(v^n)` for every noise sequence of length `n`, hidden state started
    /// from `initial`, indexed by the sequence code.
    pub fn sequence_pmf(&self, initial: &[f64], n: usize) -> Result<Vec<f64>> {
        let q = self.arity();
        let total = Alphabet::new(q)?.count_wide(n);
        check_cells(total)?;
        let mut out = vec![0.0; total as usize];
        let mut alphas = vec![vec![0.0; self.states()]; n + 1];
        alphas[0].copy_from_slice(initial);
        self.fill(0, 0, n, &mut alphas, &mut out);
        Ok(out)
    }

    fn fill(&self, t: usize, code: usize, n: usize, alphas: &mut [Vec<f64>], out: &mut [f64]) {
        if t == n {
            out[code] = alphas[0].iter().sum();
            return;
        }
        let (current, deeper) = alphas.split_at_mut(1);
        for v in 0..self.arity() {
            deeper[0].fill(0.0);
            for (s, &a) in current[0].iter().enumerate() {
                let w = a * self.emission[s][v];
                if w == 0.0 {
                    continue;
                }
                for (o, &p) in deeper[0].iter_mut().zip(&self.transition[s]) {
                    *o += w * p;
                }
            }
            self.fill(t + 1, code * self.arity() + v, n, deeper, out);
        }
    }
}

fn additive_kernel(q: usize, noise: &NoiseChain) -> Result<FsMac> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!(
            "additive MAC needs q >= 2, got {q}"
        )));
    }
    if noise.arity() != q {
        return Err(Error::AlphabetMismatch(format!(
            "noise arity {} does not match q = {q}",
            noise.arity()
        )));
    }
    let a = Alphabet::new(q)?;
    let states = Alphabet::new(noise.states())?;
    let ns = noise.states();
    FsMac::from_fn(states, a, a, a, |x1, x2, s| {
        let mut row = vec![0.0; q * ns];
        for v in 0..q {
            let y = (x1 + x2 + v) % q;
            for (t, &p) in noise.transition[s].iter().enumerate() {
                row[y * ns + t] += noise.emission[s][v] * p;
            }
        }
        row
    })
}

/// `y = x1 + x2 + v (mod q)` with hidden-Markov noise `v`. The channel
/// state is the noise state and the initial distribution is left undeclared.
pub fn additive_modq_mac(q: usize, noise: &NoiseChain) -> Result<FsMac> {
    Ok(
        additive_kernel(q, noise)?.with_builder(Builder::AdditiveModq {
            q,
            noise: noise.clone(),
        }),
    )
}

/// The binary Gilbert-Elliott MAC: additive noise whose crossover is `p_good`
/// in state 0 and `p_bad` in state 1.
pub fn gilbert_elliott_mac(alpha: f64, beta: f64, p_good: f64, p_bad: f64) -> Result<FsMac> {
    let noise = NoiseChain::gilbert_elliott(alpha, beta, p_good, p_bad)?;
    Ok(
        additive_kernel(2, &noise)?.with_builder(Builder::GilbertElliott {
            alpha,
            beta,
            p_good,
            p_bad,
        }),
    )
}

/// A deterministic map `(x1, x2) -> x0` on a common alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct MuxTable {
    size: usize,
    map: Vec<usize>,
}

impl TryFrom<Vec<Vec<usize>>> for MuxTable {
    type Error = Error;
    fn try_from(rows: Vec<Vec<usize>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 || rows.iter().any(|r| r.len() != size) {
            return Err(Error::Spec("mux table must be square and non-empty".into()));
        }
        let map: Vec<usize> = rows.into_iter().flatten().collect();
        if let Some(&bad) = map.iter().find(|&&v| v >= size) {
            return Err(Error::SymbolOutOfRange { symbol: bad, size });
        }
        Ok(MuxTable { size, map })
    }
}

impl From<MuxTable> for Vec<Vec<usize>> {
    fn from(m: MuxTable) -> Self {
        m.map.chunks(m.size).map(<[usize]>::to_vec).collect()
    }
}

impl MuxTable {
    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let rows = (0..size)
            .map(|a| (0..size).map(|b| f(a, b)).collect())
            .collect::<Vec<Vec<usize>>>();
        MuxTable::try_from(rows)
    }

    /// Addition mod `q`.
    pub fn modq(q: usize) -> Result<Self> {
        MuxTable::from_fn(q, |a, b| (a + b) % q)
    }

    pub fn xor() -> Self {
        MuxTable::modq(2).expect("binary table")
    }

    pub fn and() -> Self {
        MuxTable::from_fn(2, |a, b| a & b).expect("binary table")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn apply(&self, x1: usize, x2: usize) -> usize {
        self.map[x1 * self.size + x2]
    }

    /// Checks that each user can, by a fixing of the other input, see its
    /// own input passed straight through.
    pub fn check_multiplexer(&self) -> Result<()> {
        for user in [1u8, 2] {
            let passes = |fix: usize, v: usize| {
                if user == 1 {
                    self.apply(v, fix) == v
                } else {
                    self.apply(fix, v) == v
                }
            };
            if !(0..self.size).any(|fix| (0..self.size).all(|v| passes(fix, v))) {
                let witness = (0..self.size)
                    .map(|fix| {
                        let v = (0..self.size).find(|&v| !passes(fix, v)).unwrap_or(0);
                        let (a, b) = if user == 1 { (v, fix) } else { (fix, v) };
                        format!("mux({a},{b})={}", self.apply(a, b))
                    })
                    .collect::<Vec<_>>()
                    .join(", ");
                return Err(Error::MuxProperty { user, witness });
            }
        }
        Ok(())
    }
}

/// Composes a multiplexer front end with a single-user finite-state channel:
/// `P(y, s' | x1, x2, s) = P_p2p(y, s' | mux(x1, x2), s)`.
pub fn mux_p2p_compose(mux: &MuxTable, p2p: &FsMac) -> Result<FsMac> {
    if !p2p.is_single_user() {
        return Err(Error::AlphabetMismatch(
            "point-to-point channel must have a unit second input".into(),
        ));
    }
    if p2p.x1().size() != mux.size() {
        return Err(Error::AlphabetMismatch(format!(
            "mux alphabet {} differs from the channel input alphabet {}",
            mux.size(),
            p2p.x1().size()
        )));
    }
    mux.check_multiplexer()?;
    let a = p2p.x1();
    let mut ch = FsMac::from_fn(p2p.states(), a, a, p2p.y(), |x1, x2, s| {
        p2p.row(mux.apply(x1, x2), 0, s).to_vec()
    })?;
    if let Some(d) = p2p.initial_dist() {
        ch = ch.with_initial_dist(d.to_vec())?;
    }
    Ok(ch.with_builder(Builder::MuxP2p {
        mux: mux.clone(),
        p2p: Box::new(ChannelSpec::from_channel(p2p)),
    }))
}

/// A `q`-ary erasure channel driven by a two-state chain `z`: `z = 0` passes
/// the input and `z = 1` outputs the erasure symbol `q`.
///
/// The channel state `s_{i-1}` holds `z_i`, so the output at time `i` is
/// decided by the previous state like every other channel here. The declared
/// initial distribution is the stationary law of `z` when it exists.
pub fn erasure_p2p(q: usize, z_transition: &[Vec<f64>]) -> Result<FsMac> {
    if q < 1 {
        return Err(Error::EmptyAlphabet);
    }
    if z_transition.len() != 2 || z_transition.iter().any(|r| r.len() != 2) {
        return Err(Error::Spec("erasure chain must be 2x2".into()));
    }
    let mut zt = z_transition.to_vec();
    for (s, row) in zt.iter_mut().enumerate() {
        sanitize_row(row, || format!("erasure chain row {s}"))?;
    }
    let x = Alphabet::new(q)?;
    let y = Alphabet::new(q + 1)?;
    let mut ch = FsMac::from_fn(Alphabet::binary(), x, Alphabet::unit(), y, |x, _, s| {
        let out = if s == 0 { x } else { q };
        let mut row = vec![0.0; (q + 1) * 2];
        row[out * 2] = zt[s][0];
        row[out * 2 + 1] = zt[s][1];
        row
    })?;
    if let Ok(pi) = stationary_distribution(&zt) {
        ch = ch.with_initial_dist(pi)?;
    }
    Ok(ch.with_builder(Builder::Erasure {
        q,
        z_transition: zt,
    }))
}

/// Parameters of a Markov channel with limited intersymbol interference:
/// the output depends on the previous exogenous state and the last `m + 1`
/// inputs of each user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitedIsiSpec {
    /// ISI order `m`.
    pub m: usize,
    pub x1: Alphabet,
    pub x2: Alphabet,
    pub y: Alphabet,
    /// `P(z_i | z_{i-1})`.
    pub z_transition: Vec<Vec<f64>>,
    /// `P(y_i | z_{i-1}, x1_{i-m..i}, x2_{i-m..i})`, flat over
    /// `(z, window1, window2, y)` with windows oldest symbol first.
    pub output: Vec<f64>,
    /// Pmf of the inputs before time 1, indexed `window1 * |X2|^m + window2`
    /// over windows of length `m`.
    pub initial_window: Vec<f64>,
    /// Law of `z_0`; the stationary law of the chain when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_initial: Option<Vec<f64>>,
}

/// Builds the finite-state channel whose state is `(z_{i-1}, x1 window,
/// x2 window)`, packed as `(z * |X1|^m + w1) * |X2|^m + w2`.
pub fn limited_isi_to_fsmac(spec: &LimitedIsiSpec) -> Result<FsMac> {
    let (a1, a2, b) = (spec.x1.size(), spec.x2.size(), spec.y.size());
    let nz = spec.z_transition.len();
    if nz == 0 {
        return Err(Error::EmptyAlphabet);
    }
    let m = spec.m;
    let (w1n, w2n) = (spec.x1.count_wide(m), spec.x2.count_wide(m));
    let states = nz as u128 * w1n * w2n;
    if states > MAX_ISI_STATES as u128 {
        return Err(Error::Sizing {
            cells: states,
            limit: MAX_ISI_STATES as u128,
        });
    }
    let (w1n, w2n) = (w1n as usize, w2n as usize);
    let (f1n, f2n) = (w1n * a1, w2n * a2);
    if spec.output.len() != nz * f1n * f2n * b {
        return Err(Error::Spec(format!(
            "output kernel has {} entries, expected {}",
            spec.output.len(),
            nz * f1n * f2n * b
        )));
    }
    if spec.initial_window.len() != w1n * w2n {
        return Err(Error::Spec(
            "initial window pmf has the wrong length".into(),
        ));
    }
    let mut zt = spec.z_transition.clone();
    for (s, row) in zt.iter_mut().enumerate() {
        if row.len() != nz {
            return Err(Error::Spec("z transition must be square".into()));
        }
        sanitize_row(row, || format!("z transition row {s}"))?;
    }
    let mut out = spec.output.clone();
    for (r, row) in out.chunks_mut(b).enumerate() {
        sanitize_row(row, || format!("ISI output row {r}"))?;
    }
    let mut window = spec.initial_window.clone();
    sanitize_row(&mut window, || "initial window".into())?;
    let z0 = match &spec.z_initial {
        Some(d) => {
            let mut d = d.clone();
            if d.len() != nz {
                return Err(Error::Spec("z_initial has the wrong length".into()));
            }
            sanitize_row(&mut d, || "z_initial".into())?;
            d
        }
        None => stationary_distribution(&zt)?,
    };

    let ns = states as usize;
    let pack = |z: usize, w1: usize, w2: usize| (z * w1n + w1) * w2n + w2;
    let ch = FsMac::from_fn(Alphabet::new(ns)?, spec.x1, spec.x2, spec.y, |x1, x2, s| {
        let w2 = s % w2n;
        let w1 = (s / w2n) % w1n;
        let z = s / (w1n * w2n);
        let (full1, full2) = (w1 * a1 + x1, w2 * a2 + x2);
        let (next1, next2) = (full1 % w1n, full2 % w2n);
        let y_row = &out[((z * f1n + full1) * f2n + full2) * b..][..b];
        let mut row = vec![0.0; b * ns];
        for (y, &py) in y_row.iter().enumerate() {
            for (zn, &pz) in zt[z].iter().enumerate() {
                row[y * ns + pack(zn, next1, next2)] += py * pz;
            }
        }
        row
    })?;
    let mut init = vec![0.0; ns];
    for (z, &pz) in z0.iter().enumerate() {
        for w in 0..w1n * w2n {
            init[z * w1n * w2n + w] = pz * window[w];
        }
    }
    Ok(ch
        .with_initial_dist(init)?
        .with_builder(Builder::LimitedIsi(spec.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{channel_causal_law, InitialState};

    #[test]
    fn additive_mod2_noiseless_and_useless() {
        let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.0).unwrap()).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(ch.output_prob(a, b, 0, a ^ b), 1.0);
            }
        }
        let ch = additive_modq_mac(2, &NoiseChain::bernoulli(0.5).unwrap()).unwrap();
        assert_eq!(ch.output_prob(1, 0, 0, 0), 0.5);
        assert!(additive_modq_mac(3, &NoiseChain::bernoulli(0.1).unwrap()).is_err());
    }

    #[test]
    fn ge_with_equal_crossovers_is_iid_additive() {
        let p = 0.13;
        let iid = additive_modq_mac(2, &NoiseChain::bernoulli(p).unwrap()).unwrap();
        let iid_law = channel_causal_law(&iid, &InitialState::Given(0), 4).unwrap();
        for (alpha, beta) in [(0.1, 0.3), (0.0, 1.0), (0.5, 0.5)] {
            let ge = gilbert_elliott_mac(alpha, beta, p, p).unwrap();
            for s0 in 0..2 {
                let law = channel_causal_law(&ge, &InitialState::Given(s0), 4).unwrap();
                for (u, v) in law.as_slice().iter().zip(iid_law.as_slice()) {
                    assert!((u - v).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn mux_examples() {
        let bsc = FsMac::single_user(
            Alphabet::unit(),
            Alphabet::binary(),
            Alphabet::binary(),
            vec![0.8, 0.2, 0.2, 0.8],
        )
        .unwrap();
        let ch = mux_p2p_compose(&MuxTable::xor(), &bsc).unwrap();
        let additive = additive_modq_mac(2, &NoiseChain::bernoulli(0.2).unwrap()).unwrap();
        assert_eq!(ch.kernel(), additive.kernel());

        assert!(mux_p2p_compose(&MuxTable::and(), &bsc).is_ok());
        let constant = MuxTable::from_fn(2, |_, _| 0).unwrap();
        match mux_p2p_compose(&constant, &bsc) {
            Err(Error::MuxProperty { user: 1, witness }) => assert!(witness.contains("mux(1,0)=0")),
            other => panic!("expected a mux error, got {other:?}"),
        }
    }

    #[test]
    fn erasure_extremes() {
        let id = erasure_p2p(2, &[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(id.initial_dist(), Some(&[1.0, 0.0][..]));
        assert_eq!(id.output_prob(1, 0, 0, 1), 1.0);
        let dead = erasure_p2p(2, &[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(dead.initial_dist(), Some(&[0.0, 1.0][..]));
        assert_eq!(dead.output_prob(0, 0, 1, 2), 1.0);
    }

    #[test]
    fn isi_order_zero_is_the_direct_construction() {
        let b = Alphabet::binary();
        let zt = vec![vec![0.7, 0.3], vec![0.4, 0.6]];
        // y = x1 xor x2 xor z
        let mut output = Vec::new();
        for z in 0..2 {
            for x1 in 0..2 {
                for x2 in 0..2 {
                    let y = x1 ^ x2 ^ z;
                    output.extend(if y == 0 { [1.0, 0.0] } else { [0.0, 1.0] });
                }
            }
        }
        let spec = LimitedIsiSpec {
            m: 0,
            x1: b,
            x2: b,
            y: b,
            z_transition: zt.clone(),
            output,
            initial_window: vec![1.0],
            z_initial: None,
        };
        let ch = limited_isi_to_fsmac(&spec).unwrap();
        let direct = FsMac::from_fn(b, b, b, b, |x1, x2, z| {
            let y = x1 ^ x2 ^ z;
            let mut r = vec![0.0; 4];
            r[y * 2] = zt[z][0];
            r[y * 2 + 1] = zt[z][1];
            r
        })
        .unwrap();
        assert_eq!(ch.kernel(), direct.kernel());
        let pi = ch.initial_dist().unwrap();
        assert!((pi[0] - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn noise_sequence_pmf_sums_to_one() {
        let n = NoiseChain::gilbert_elliott(0.1, 0.2, 0.05, 0.4).unwrap();
        let pi = n.stationary().unwrap();
        let p = n.sequence_pmf(&pi, 5).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
