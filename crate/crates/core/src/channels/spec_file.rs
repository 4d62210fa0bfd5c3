//! JSON channel-spec files.
//!
//! A spec either lists the kernel explicitly or names a builder with its
//! parameters. When both are present the kernel wins and the builder is kept
//! as a description. Saving always writes the explicit kernel, so a load,
//! save, load cycle reproduces the tensor bit for bit.
//!
//! ```json
//! {
//!   "alphabets": { "s": 1, "x1": 2, "x2": 2, "y": 2 },
//!   "kernel": [1, 0, 0, 1, 0, 1, 1, 0]
//! }
//! ```
//!
//! The kernel is flat in row-major order over `(x1, x2, s_prev, y, s_next)`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channels::builders::{
    additive_modq_mac, erasure_p2p, gilbert_elliott_mac, limited_isi_to_fsmac, mux_p2p_compose,
    LimitedIsiSpec, MuxTable, NoiseChain,
};
use crate::channels::FsMac;
use crate::error::{Error, Result};
use crate::prob::Alphabet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabets {
    pub s: usize,
    pub x1: usize,
    pub x2: usize,
    pub y: usize,
}

/// A named construction with its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builder {
    GilbertElliott {
        alpha: f64,
        beta: f64,
        p_good: f64,
        p_bad: f64,
    },
    AdditiveModq {
        q: usize,
        noise: NoiseChain,
    },
    MuxP2p {
        mux: MuxTable,
        p2p: Box<ChannelSpec>,
    },
    Erasure {
        q: usize,
        z_transition: Vec<Vec<f64>>,
    },
    LimitedIsi(LimitedIsiSpec),
}

impl Builder {
    pub fn build(&self) -> Result<FsMac> {
        match self {
            Builder::GilbertElliott {
                alpha,
                beta,
                p_good,
                p_bad,
            } => gilbert_elliott_mac(*alpha, *beta, *p_good, *p_bad),
            Builder::AdditiveModq { q, noise } => additive_modq_mac(*q, noise),
            Builder::MuxP2p { mux, p2p } => mux_p2p_compose(mux, &p2p.to_channel()?),
            Builder::Erasure { q, z_transition } => erasure_p2p(*q, z_transition),
            Builder::LimitedIsi(spec) => limited_isi_to_fsmac(spec),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builder::GilbertElliott { .. } => "gilbert_elliott",
            Builder::AdditiveModq { .. } => "additive_modq",
            Builder::MuxP2p { .. } => "mux_p2p",
            Builder::Erasure { .. } => "erasure",
            Builder::LimitedIsi(_) => "limited_isi",
        }
    }
}

/// The on-disk form of a channel.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabets: Option<Alphabets>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_dist: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builder: Option<Builder>,
}

impl ChannelSpec {
    pub fn to_channel(&self) -> Result<FsMac> {
        let mut ch = match (&self.kernel, &self.builder) {
            (Some(kernel), builder) => {
                let a = self
                    .alphabets
                    .ok_or_else(|| Error::Spec("an explicit kernel needs `alphabets`".into()))?;
                let ch = FsMac::new(
                    Alphabet::new(a.s)?,
                    Alphabet::new(a.x1)?,
                    Alphabet::new(a.x2)?,
                    Alphabet::new(a.y)?,
                    kernel.clone(),
                    None,
                )?;
                match builder {
                    Some(b) => ch.with_builder(b.clone()),
                    None => ch,
                }
            }
            (None, Some(b)) => {
                let ch = b.build()?;
                if let Some(a) = self.alphabets {
                    let got = (
                        ch.states().size(),
                        ch.x1().size(),
                        ch.x2().size(),
                        ch.y().size(),
                    );
                    if got != (a.s, a.x1, a.x2, a.y) {
                        return Err(Error::AlphabetMismatch(format!(
                            "declared alphabets {a:?} differ from the {} builder's {got:?}",
                            b.name()
                        )));
                    }
                }
                ch
            }
            (None, None) => {
                return Err(Error::Spec(
                    "spec has neither `kernel` nor `builder`".into(),
                ))
            }
        };
        if let Some(d) = &self.initial_dist {
            ch = ch.with_initial_dist(d.clone())?;
        }
        Ok(ch)
    }

    pub fn from_channel(ch: &FsMac) -> Self {
        ChannelSpec {
            alphabets: Some(Alphabets {
                s: ch.states().size(),
                x1: ch.x1().size(),
                x2: ch.x2().size(),
                y: ch.y().size(),
            }),
            kernel: Some(ch.kernel().to_vec()),
            initial_dist: ch.initial_dist().map(<[f64]>::to_vec),
            builder: ch.builder().cloned(),
        }
    }
}

pub fn from_json(text: &str) -> Result<FsMac> {
    let spec: ChannelSpec = serde_json::from_str(text)?;
    spec.to_channel()
}

pub fn to_json(ch: &FsMac) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ChannelSpec::from_channel(
        ch,
    ))?)
}

/// SHA-256 of the canonical (compact) spec JSON, hex encoded.
pub fn channel_hash(ch: &FsMac) -> String {
    let text = serde_json::to_string(&ChannelSpec::from_channel(ch)).expect("spec serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn load(path: impl AsRef<Path>) -> Result<FsMac> {
    from_json(&std::fs::read_to_string(path)?)
}

pub fn save(ch: &FsMac, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json(ch)?)?;
    Ok(())
}
