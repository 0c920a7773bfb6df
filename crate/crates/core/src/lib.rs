//! Poisson-Exponential family distributions with Stein's-method bounds.

pub mod bounds;
pub mod cli;
pub mod distance;
pub mod distributions;
pub mod error;
pub mod fit;
pub mod numeric;
pub mod patterns;
pub mod stats;
pub mod stein;
pub mod tables;
pub mod verify;

pub use error::{Error, Result};
