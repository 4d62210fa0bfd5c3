use serde::Serialize;

use crate::channels::{Builder, FsMac, NoiseChain};
use crate::dirinfo::{directed_info, Source};
use crate::error::{Error, Result};
use crate::prob::pmf::entropy_bits;
use crate::prob::{channel_causal_law, joint_law, InitialState, PolicyPair};

/// A bracket on the entropy rate of hidden-Markov noise, bits per symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyBounds {
    pub n: usize,
    /// `H(V_n | V^{n-1}, S_0)`.
    pub lower: f64,
    /// `H(V_n | V^{n-1})`.
    pub upper: f64,
}

impl EntropyBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `H(V^k)` and `H(V^{k-1})` for noise started from `initial`.
fn last_two(noise: &NoiseChain, initial: &[f64], n: usize) -> Result<(f64, f64)> {
    let hn = entropy_bits(&noise.sequence_pmf(initial, n)?);
    let hp = if n > 1 {
        entropy_bits(&noise.sequence_pmf(initial, n - 1)?)
    } else {
        0.0
    };
    Ok((hn, hp))
}

/// Lower and upper bounds on the noise entropy rate at horizon `n`, with the
/// hidden chain started from its stationary law.
pub fn entropy_rate_bounds(noise: &NoiseChain, n: usize) -> Result<EntropyBounds> {
    if n == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let pi = noise.stationary()?;
    let (hn, hp) = last_two(noise, &pi, n)?;
    let mut lower = 0.0;
    for (s, &w) in pi.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut point = vec![0.0; pi.len()];
        point[s] = 1.0;
        let (a, b) = last_two(noise, &point, n)?;
        lower += w * (a - b);
    }
    Ok(EntropyBounds {
        n,
        lower,
        upper: hn - hp,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeIdentity {
    pub n: usize,
    /// `I((X1, X2)^n -> Y^n)` at uniform i.i.d. inputs, bits.
    pub directed_info: f64,
    /// `H(V^n)`, bits.
    pub noise_entropy: f64,
    /// `|I - (n log2 q - H(V^n))|`.
    pub residual: f64,
}

/// Compares the sum-rate directed information of an additive channel at
/// uniform inputs with `n log2 q - H(V^n)`, both under the stationary state.
pub fn ge_sumrate_identity_check(ch: &FsMac, n: usize) -> Result<GeIdentity> {
    let (q, noise) = match ch.builder() {
        Some(Builder::GilbertElliott {
            alpha,
            beta,
            p_good,
            p_bad,
        }) => (
            2,
            NoiseChain::gilbert_elliott(*alpha, *beta, *p_good, *p_bad)?,
        ),
        Some(Builder::AdditiveModq { q, noise }) => (*q, noise.clone()),
        _ => {
            return Err(Error::InvalidParameter(
                "identity check needs a channel built as Gilbert-Elliott or additive".into(),
            ))
        }
    };
    let law = channel_causal_law(ch, &InitialState::Stationary, n)?;
    let policy = PolicyPair::uniform(
        n,
        ch.x1(),
        ch.x2(),
        crate::channels::FeedbackFn::none(ch.y()),
        crate::channels::FeedbackFn::none(ch.y()),
    )?;
    let di = directed_info(&joint_law(&policy, &law)?, Source::Both).total;
    let hv = entropy_bits(&noise.sequence_pmf(&noise.stationary()?, n)?);
    Ok(GeIdentity {
        n,
        directed_info: di,
        noise_entropy: hv,
        residual: (di - (n as f64 * (q as f64).log2() - hv)).abs(),
    })
}
