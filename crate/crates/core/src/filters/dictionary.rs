//! A finite, normalized family of Schwartz test functions standing in for
//! the class the smoothed operator takes its supremum over.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::profile::psi;
use crate::error::{invalid, Result};
use crate::grid::{norm, Field, Grid, SpectralField};
use crate::quad::phi_spatial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `φ` itself.
    Phi,
    /// `e^{−π|x|²}`.
    Gaussian,
    /// `(2πxₙ² − 1)e^{−π|x|²}`, transform `−2πξₙ²e^{−π|ξ|²}`.
    Hermite,
    /// `cos(2πxₙ)φ(x)`, transform `½(φ̂(ξ − eₙ) + φ̂(ξ + eₙ))`.
    CosineBump,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Phi, Shape::Gaussian, Shape::Hermite, Shape::CosineBump];

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Phi => "phi",
            Shape::Gaussian => "gaussian",
            Shape::Hermite => "hermite2",
            Shape::CosineBump => "cosine_bump",
        }
    }

    fn raw_symbol(&self, dim: usize, xi: &[f64; 3]) -> f64 {
        let last = dim - 1;
        match self {
            Shape::Phi => psi(norm(xi)),
            Shape::Gaussian => (-PI * dot(xi)).exp(),
            Shape::Hermite => -2.0 * PI * xi[last] * xi[last] * (-PI * dot(xi)).exp(),
            Shape::CosineBump => {
                let mut lo = *xi;
                let mut hi = *xi;
                lo[last] -= 1.0;
                hi[last] += 1.0;
                0.5 * (psi(norm(&lo)) + psi(norm(&hi)))
            }
        }
    }

    fn raw_spatial(&self, dim: usize, x: &[f64; 3]) -> f64 {
        let last = dim - 1;
        match self {
            Shape::Phi => phi_spatial(norm(x), dim),
            Shape::Gaussian => (-PI * dot(x)).exp(),
            Shape::Hermite => (2.0 * PI * x[last] * x[last] - 1.0) * (-PI * dot(x)).exp(),
            Shape::CosineBump => (2.0 * PI * x[last]).cos() * phi_spatial(norm(x), dim),
        }
    }
}

fn dot(x: &[f64; 3]) -> f64 {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
}

/// A real, even test function `c·Υ` with real transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    shape: Shape,
    dim: usize,
    scale: f64,
    l1_mass: f64,
}

/// Grid on which seminorms and masses are estimated.
pub fn estimation_grid(dim: usize) -> Grid {
    if dim == 2 {
        Grid::new(2, 256, 16.0).expect("valid grid")
    } else {
        Grid::new(3, 64, 8.0).expect("valid grid")
    }
}

fn cache() -> &'static Mutex<HashMap<(Shape, usize, usize), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(Shape, usize, usize), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl TestFunction {
    /// Unnormalized entry (`c = 1`).
    pub fn raw(shape: Shape, dim: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(invalid(format!("dimension {dim}")));
        }
        let mut tf = TestFunction { shape, dim, scale: 1.0, l1_mass: 0.0 };
        tf.l1_mass = tf.sampled(&estimation_grid(dim)).lp_norm(1.0)?;
        Ok(tf)
    }

    /// Rescaled so that every estimated seminorm `sup|x^α ∂^β Υ|` with
    /// `|α|, |β| ≤ order` is at most 1. Entries already below 1 are kept.
    pub fn normalized(shape: Shape, dim: usize, order: usize) -> Result<Self> {
        let raw = TestFunction::raw(shape, dim)?;
        let top = raw.max_seminorm(order);
        Ok(if top > 1.0 { raw.rescaled(1.0 / top) } else { raw })
    }

    pub fn rescaled(&self, c: f64) -> Self {
        TestFunction { scale: self.scale * c, l1_mass: self.l1_mass * c.abs(), ..*self }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn name(&self) -> &'static str {
        self.shape.name()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `‖Υ‖₁` estimated on [`estimation_grid`].
    pub fn l1_mass(&self) -> f64 {
        self.l1_mass
    }

    /// `∫Υ = Υ̂(0)`.
    pub fn integral(&self) -> f64 {
        self.symbol(&[0.0; 3])
    }

    pub fn symbol(&self, xi: &[f64; 3]) -> f64 {
        self.scale * self.shape.raw_symbol(self.dim, xi)
    }

    pub fn spatial(&self, x: &[f64; 3]) -> f64 {
        self.scale * self.shape.raw_spatial(self.dim, x)
    }

    /// Periodized samples on `grid`, synthesized from the transform.
    pub fn sampled(&self, grid: &Grid) -> Field {
        Field::from_even_symbol(*grid, |xi| self.symbol(xi))
    }

    /// `max_{|α|,|β| ≤ order} sup_x |x^α ∂^β Υ(x)|` on the estimation grid,
    /// using `max_{|α| ≤ m} |x^α| = max(1, ‖x‖_∞)^m` and spectral derivatives.
    pub fn max_seminorm(&self, order: usize) -> f64 {
        let key = (self.shape, self.dim, order);
        let raw = {
            let cached = cache().lock().expect("cache lock").get(&key).copied();
            match cached {
                Some(v) => v,
                None => {
                    let v = raw_max_seminorm(self.shape, self.dim, order);
                    cache().lock().expect("cache lock").insert(key, v);
                    v
                }
            }
        };
        raw * self.scale.abs()
    }
}

fn multi_indices(dim: usize, order: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 0..=order as u32 {
        for b in 0..=order as u32 - a {
            if dim == 2 {
                out.push([a, b, 0]);
            } else {
                for c in 0..=order as u32 - a - b {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

fn raw_max_seminorm(shape: Shape, dim: usize, order: usize) -> f64 {
    let grid = estimation_grid(dim);
    let weight: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.coord(i);
            let sup = x[..dim].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            sup.max(1.0).powi(order as i32)
        })
        .collect();
    let base: Vec<f64> = (0..grid.len()).map(|i| shape.raw_symbol(dim, &grid.frequency(i))).collect();
    let mut best: f64 = 0.0;
    for beta in multi_indices(dim, order) {
        let total: u32 = beta.iter().sum();
        let unit = Complex64::new(0.0, 2.0 * PI).powu(total);
        let coeffs = (0..grid.len())
            .map(|i| {
                let xi = grid.frequency(i);
                let mono: f64 = (0..dim).map(|a| xi[a].powi(beta[a] as i32)).product();
                unit * (mono * base[i])
            })
            .collect();
        let deriv = SpectralField::new(grid, coeffs).expect("shape").inverse_transform();
        for (v, w) in deriv.values().iter().zip(&weight) {
            best = best.max(v.abs() * w);
        }
    }
    best
}

/// The finite family the smoothed operators maximize over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestDictionary {
    entries: Vec<TestFunction>,
}

impl TestDictionary {
    pub fn new(entries: Vec<TestFunction>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("empty test dictionary"));
        }
        let dim = entries[0].dim;
        if entries.iter().any(|e| e.dim != dim) {
            return Err(invalid("test dictionary mixes dimensions"));
        }
        Ok(TestDictionary { entries })
    }

    /// All four shapes, normalized at seminorm order `order`.
    pub fn standard(dim: usize, order: usize) -> Result<Self> {
        let entries =
            Shape::ALL.iter().map(|&s| TestFunction::normalized(s, dim, order)).collect::<Result<_>>()?;
        TestDictionary::new(entries)
    }

    /// Default seminorm order `2n + 2`.
    pub fn default_order(dim: usize) -> usize {
        2 * dim + 2
    }

    /// `{φ}` with unit mass, unnormalized.
    pub fn phi_only(dim: usize) -> Result<Self> {
        TestDictionary::new(vec![TestFunction::raw(Shape::Phi, dim)?])
    }

    pub fn entries(&self) -> &[TestFunction] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries[0].dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_l1_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.l1_mass).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_match_spatial_samples() {
        let grid = Grid::new(2, 128, 8.0).unwrap();
        for shape in [Shape::Gaussian, Shape::Hermite] {
            let tf = TestFunction::raw(shape, 2).unwrap();
            let synth = tf.sampled(&grid);
            let direct = Field::from_fn(grid, |x| tf.spatial(x));
            assert!(synth.sup_distance(&direct).unwrap() < 1e-10, "{shape:?}");
        }
        // φ and the cosine bump have slowly decaying tails; compare near the
        // origin on a larger torus
        let grid = Grid::new(2, 256, 16.0).unwrap();
        for shape in [Shape::Phi, Shape::CosineBump] {
            let tf = TestFunction::raw(shape, 2).unwrap();
            let synth = tf.sampled(&grid);
            for &x in &[[0.0, 0.0, 0.0], [0.25, -0.5, 0.0], [1.0, 0.75, 0.0]] {
                let i = grid.ravel(&[grid.wrap((x[0] * 16.0) as i64), grid.wrap((x[1] * 16.0) as i64)]);
                let err = (synth.values()[i] - tf.spatial(&x)).abs();
                assert!(err < 1e-6, "{shape:?} at {x:?}: {err}");
            }
        }
    }

    #[test]
    fn normalized_entries_have_unit_seminorms() {
        let dict = TestDictionary::standard(2, 6).unwrap();
        assert_eq!(dict.len(), 4);
        for e in dict.entries() {
            assert!(e.max_seminorm(6) <= 1.0 + 1e-6, "{}", e.name());
            assert!(e.scale() > 0.0 && e.l1_mass() > 0.0);
        }
    }

    #[test]
    fn raw_phi_has_unit_mass() {
        let phi = TestFunction::raw(Shape::Phi, 2).unwrap();
        assert_eq!(phi.integral(), 1.0);
        assert!(phi.l1_mass() >= 1.0);
    }

    #[test]
    fn multi_index_count() {
        assert_eq!(multi_indices(2, 6).len(), 28);
        assert_eq!(multi_indices(3, 2).len(), 10);
    }
}
