pub mod channels;
pub mod dirinfo;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod prob;
pub mod random;
pub mod regions;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
