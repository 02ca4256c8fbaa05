//! Minimum S-divergence functionals under contamination and their
//! asymptotic breakdown bounds.

pub mod breakdown;
pub mod density;
pub mod divergence;
pub mod error;
pub mod estimate;
pub mod integrate;
pub mod models;

pub use density::{DensityModel, Sampler, Support};
pub use divergence::{derive_exponents, Branch, DivergenceParams};
pub use error::{Error, Result};
pub use integrate::{Integral, IntegratorHandle, Method};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/divergence.md")]
    mod divergence {}
    #[doc = include_str!("../../../book/src/breakdown.md")]
    mod breakdown {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
