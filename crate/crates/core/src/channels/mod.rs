//! Finite-state multiple-access channels: the kernel type, the standard
//! constructions, structural diagnostics and the JSON spec format.

mod builders;
mod diagnostics;
mod fsmac;
pub mod spec_file;

pub use builders::{
    additive_modq_mac, erasure_p2p, gilbert_elliott_mac, limited_isi_to_fsmac, mux_p2p_compose,
    LimitedIsiSpec, MuxTable, NoiseChain, MAX_ISI_STATES,
};
pub use diagnostics::{
    indecomposability_diagnostic, markov_factorization_check, state_chain, stationary_distribution,
    FactorizationReport, IndecomposabilityReport,
};
pub use fsmac::{FeedbackFn, FsMac};
pub use spec_file::{channel_hash, Builder, ChannelSpec};
