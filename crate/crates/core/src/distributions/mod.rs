//! PE, GPE, PG and zero-truncated Poisson laws.
//!
//! All densities vanish off the support and cdfs clamp to 0 there. Quantities
//! such as `1 - e^{-θ}` and `e^{-θe^{-λx}}` go through `expm1`/`ln_1p` so that
//! both tiny and large θ keep full precision.

mod gpe;
mod pe;
mod pg;
mod ztp;

use serde::{Deserialize, Serialize};

pub use gpe::GPEParams;
pub use pe::{PEParams, PeSampler};
pub use pg::{PGParams, PgSampler};
pub use ztp::{ZTPParams, ZtpSampler};

/// How a sampler produces draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Closed-form inverse cdf applied to a uniform draw.
    #[default]
    Inverse,
    /// Maximum of a zero-truncated Poisson number of base lifetimes.
    MaxConstruction,
}
