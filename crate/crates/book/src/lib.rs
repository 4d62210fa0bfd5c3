//! The chapters of the guide in `book/`, compiled as doc-tests so their
//! snippets keep working.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/channels.md")]
pub mod channels {}
#[doc = include_str!("../../../book/src/policies.md")]
pub mod policies {}
#[doc = include_str!("../../../book/src/directed-information.md")]
pub mod directed_information {}
#[doc = include_str!("../../../book/src/regions.md")]
pub mod regions {}
#[doc = include_str!("../../../book/src/exponents.md")]
pub mod exponents {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
