//! Kernel decay tables, the Bernstein inequality, pointwise domination
//! chains and operator-norm sweeps.

pub mod decay;

pub use decay::{
    eta_weighted_integral, kernel_grid, lemma31_table, lemma32_table, profile_weighted_integral,
    profile_k_max, ratio_spread, refinement_changes, weighted_kernel_integral, DecayRow, Lemma32Row, WeightedIntegral,
};
pub mod bernstein;

pub use bernstein::{bernstein_check, gradient_magnitude, node_index, quasi_random_points, BernsteinReport};
pub mod domination;

pub use domination::{chain_terms, domination_check, Chain, ChainTerm, DominationReport, Violation};
pub mod sweep;

pub use sweep::{
    default_deltas, fit_exponent, norm_ratio_sweep, smoothed_sweep_pairs, DictChoice, Fit, FrozenScale, SweepConfig, SweepOp, SweepReport,
    SweepRow,
};
pub mod suite;
