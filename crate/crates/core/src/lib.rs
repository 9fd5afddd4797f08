//! Kakeya and Nikodym type maximal operators, anisotropic Littlewood–Paley
//! multipliers and their numerical audits on discretized tori.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: sampled fields on the n-torus, spectral transforms, norms.
//! * [`filters`]: the bump profile, dyadic and `δ^ε`-scaled families, their
//!   tube-adapted (anisotropic) variants, the `η` kernels and the
//!   reconstruction identity.
//! * [`maximal`]: tube geometry, direction sampling and the seven maximal
//!   operators.
//! * [`testsets`]: deterministic input generators.
//! * [`verify`]: kernel decay tables, Bernstein and domination checks,
//!   operator-norm sweeps with log-log exponent fits.

pub mod error;
pub mod filters;
pub mod geometry;
pub mod grid;
pub mod maximal;
pub mod quad;
pub mod testsets;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Field, Grid, SpectralField};
