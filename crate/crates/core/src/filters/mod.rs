//! The bump `φ`, dyadic and `δ^ε`-scaled Littlewood–Paley families, their
//! anisotropic variants, the `η` kernels and the reconstruction identities.

mod bank;
mod dictionary;
mod profile;

pub use bank::{EtaKernel, EtaKind, Family, FilterBank, Kernel, PartitionReport, ReconstructionReport};
pub use dictionary::{estimation_grid, Shape, TestDictionary, TestFunction};
pub use profile::{psi, BumpProfile};
