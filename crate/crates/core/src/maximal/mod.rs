//! Tube geometry, direction sampling and the maximal operators.

pub mod dilation;
pub mod directions;
pub mod hl;
pub mod kakeya;
pub mod shiftmax;
pub mod smoothed;
pub mod tube;

pub use directions::{direction_lq_norm, sphere_measure, DirectionSet, RotationSet};
pub use hl::{hl_maximal, hl_radii};
pub use kakeya::{kakeya_maximal, kakeya_maximal_many, nikodym_maximal, nikodym_maximal_many, tube_average};
pub use smoothed::{
    default_t_grid, geometric_t_grid, nontangential_maximal, nontangential_maximal_scaled, smoothed_frozen_t,
    smoothed_kakeya, tangential_maximal, tangential_maximal_scaled, SmoothedKakeya,
};
pub use tube::{tube_core_offsets, tube_indicator, tube_profile, TubeSpec};
