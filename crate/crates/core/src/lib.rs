//! Concurrence, concurrence of assistance and entanglement of formation for
//! small multi-qubit states, with the exponent thresholds at which powered
//! versions of these measures switch between polygamy and monogamy.

pub mod error;
pub mod exponents;
pub mod linalg;
pub mod measures;
pub mod roof;
pub mod states;

pub use error::{Error, Result};
