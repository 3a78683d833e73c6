//! Steady-state entanglement of levitated nanoparticles cooled through
//! collective Bogoliubov modes.

// `!(x > 0.0)` is deliberate throughout: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entanglement;
pub mod error;
pub mod gaussian;
pub mod optimizer;
pub mod sweep;
pub mod system;

pub use error::{Error, Result};
