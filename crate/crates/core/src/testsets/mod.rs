//! Deterministic input generators.

pub mod perron;
pub mod rng;
pub mod shapes;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Field, Grid};

pub use perron::{perron_tree, PerronTree};
pub use shapes::{
    ball_indicator, bandlimited_random, bump_sum, draw_bumps, rotated_tube_union, tube_set, tube_union_directions,
    Bump,
};

/// A reproducible input: the same spec on the same grid gives a bitwise
/// identical field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestSpec {
    Ball {
        radius: f64,
        #[serde(default)]
        center: [f64; 3],
    },
    Tube {
        delta: f64,
        direction: [f64; 3],
    },
    TubeUnion {
        count: usize,
        delta: f64,
        #[serde(default)]
        seed: u64,
    },
    PerronTree {
        levels: usize,
        delta: f64,
    },
    BandlimitedRandom {
        seed: u64,
        cutoff: f64,
    },
    BumpSum {
        seed: u64,
        count: usize,
    },
    Constant {
        value: f64,
    },
}

impl TestSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TestSpec::Ball { .. } => "ball",
            TestSpec::Tube { .. } => "tube",
            TestSpec::TubeUnion { .. } => "tube_union",
            TestSpec::PerronTree { .. } => "perron_tree",
            TestSpec::BandlimitedRandom { .. } => "bandlimited_random",
            TestSpec::BumpSum { .. } => "bump_sum",
            TestSpec::Constant { .. } => "constant",
        }
    }

    pub fn generate(&self, grid: &Grid) -> Result<Field> {
        match *self {
            TestSpec::Ball { radius, center } => ball_indicator(radius, center, grid),
            TestSpec::Tube { delta, direction } => tube_set(&direction, delta, grid),
            TestSpec::TubeUnion { count, delta, seed } => rotated_tube_union(count, delta, grid, seed),
            TestSpec::PerronTree { levels, delta } => perron_tree(levels, delta, grid),
            TestSpec::BandlimitedRandom { seed, cutoff } => bandlimited_random(seed, cutoff, grid),
            TestSpec::BumpSum { seed, count } => bump_sum(seed, count, grid),
            TestSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(invalid("constant must be finite"));
                }
                Ok(Field::constant(*grid, value))
            }
        }
    }
}

/// A family of inputs indexed by `δ` (and a seed), for exponent sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Constant,
    /// Perron tree with `log₂(1/δ)` levels.
    Perron,
    /// `⌈π/δ⌉` tubes of width `δ` through the center.
    TubeUnion,
    /// Unit ball.
    Ball,
    BandlimitedRandom { cutoff: f64 },
    BumpSum { count: usize },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::Perron => "perron",
            Family::TubeUnion => "tube_union",
            Family::Ball => "ball",
            Family::BandlimitedRandom { .. } => "bandlimited_random",
            Family::BumpSum { .. } => "bump_sum",
        }
    }

    pub fn spec(&self, delta: f64, seed: u64) -> TestSpec {
        match *self {
            Family::Constant => TestSpec::Constant { value: 1.0 },
            Family::Perron => TestSpec::PerronTree { levels: (1.0 / delta).log2().round().max(1.0) as usize, delta },
            Family::TubeUnion => {
                TestSpec::TubeUnion { count: (std::f64::consts::PI / delta).ceil() as usize, delta, seed }
            }
            Family::Ball => TestSpec::Ball { radius: 0.5, center: [0.0; 3] },
            Family::BandlimitedRandom { cutoff } => TestSpec::BandlimitedRandom { seed, cutoff },
            Family::BumpSum { count } => TestSpec::BumpSum { seed, count },
        }
    }
}

/// Summary written next to a generated field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub spec: TestSpec,
    pub grid: Grid,
    /// `∫|f|`, the measure for indicator-type inputs.
    pub measure: f64,
    pub l2_norm: f64,
    pub sup_norm: f64,
}

impl Manifest {
    pub fn of(spec: &TestSpec, field: &Field) -> Result<Self> {
        Ok(Manifest {
            spec: spec.clone(),
            grid: *field.grid(),
            measure: field.lp_norm(1.0)?,
            l2_norm: field.lp_norm(2.0)?,
            sup_norm: field.sup_norm(),
        })
    }
}
