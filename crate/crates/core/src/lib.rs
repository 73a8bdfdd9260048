//! Finite-alphabet channel resolvability, identification and wire-tap toolkit.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod exponents;
pub mod identification;
pub mod numeric;
pub mod resolvability;
pub mod rng;
pub(crate) mod simplex;
pub mod spectrum;
pub mod wiretap;

pub use channel::{Channel, Distribution, EnumerationBudget, Memoryless};
pub use error::{Error, Result};
