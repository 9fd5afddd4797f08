//! Sampled scalar fields on the torus `[0, L)ⁿ`, `n ∈ {2, 3}`.
//!
//! Samples sit at `x = i·h` with `h = L/N`; operators interpret indices in
//! their torus-minimal (centered) form, so index `i ≥ N/2` stands for the
//! coordinate `(i − N)·h`. The transform convention is
//! `f̂(ξ) = ∫ f(t) e^{−2πi⟨ξ,t⟩} dt` at the physical frequencies `ξ = m/L`,
//! approximated by `hⁿ` times the discrete transform.

mod fft;
pub mod io;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use fft::{half_frequencies, HalfSpectrum};

/// Shape metadata shared by every field on the same torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    side: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, side: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedGrid(format!("dimension {dim} (expected 2 or 3)")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::UnsupportedGrid(format!("N = {n} is not a power of two ≥ 2")));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::UnsupportedGrid(format!("side length {side}")));
        }
        Ok(Grid { dim, n, side })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Samples per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest representable frequency per axis, `N/(2L)`.
    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (2.0 * self.side)
    }

    /// Largest `|ξ|_e` over the grid frequencies.
    pub fn max_frequency(&self) -> f64 {
        self.nyquist() * (self.dim as f64).sqrt()
    }

    /// Same torus, twice the samples per axis.
    pub fn refined(&self) -> Grid {
        Grid { n: 2 * self.n, ..*self }
    }

    /// Torus-minimal signed form of an axis index.
    pub fn signed(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn wrap(&self, i: i64) -> usize {
        i.rem_euclid(self.n as i64) as usize
    }

    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Flat index of `idx + offset` on the torus.
    pub fn offset(&self, flat: usize, offset: &[i64]) -> usize {
        let idx = self.unravel(flat);
        let mut out = 0;
        for axis in 0..self.dim {
            out = out * self.n + self.wrap(idx[axis] as i64 + offset[axis]);
        }
        out
    }

    /// Centered coordinate of a sample.
    pub fn coord(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.signed(idx[axis]) as f64 * h;
        }
        x
    }

    /// Physical frequency `m/L` of a full-spectrum bin.
    pub fn frequency(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut xi = [0.0; 3];
        for axis in 0..self.dim {
            xi[axis] = self.signed(idx[axis]) as f64 / self.side;
        }
        xi
    }

    pub fn coords(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|i| self.coord(i)).collect()
    }

    /// Torus-minimal Euclidean length of the cell offset `flat` (as seen from
    /// the origin).
    pub fn radius(&self, flat: usize) -> f64 {
        norm(&self.coord(flat))
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

pub(crate) fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// A real field sampled on a [`Grid`]. Values are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a grid of {} samples",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at sample {i}")));
        }
        Ok(Field { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Field { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f` at the centered coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coord(i))).collect();
        Field { grid, values }
    }

    /// Mass-1 discrete delta at the origin.
    pub fn delta(grid: Grid) -> Self {
        let mut f = Field::zeros(grid);
        f.values[0] = 1.0 / grid.cell_volume();
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn abs(&self) -> Field {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field { grid: self.grid, values })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Pointwise maximum, in place.
    pub fn max_assign(&mut self, other: &Field) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            if b > *a {
                *a = b;
            }
        }
    }

    /// `∫ f` as the Riemann sum `hⁿ Σ f`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(hⁿ Σ |f|^p)^{1/p}`; `p = ∞` gives `max |f|`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p <= 0.0 {
            return Err(invalid(format!("L^p exponent must be positive, got {p}")));
        }
        if p.is_infinite() {
            return Ok(self.sup_norm());
        }
        let sum: f64 = if p == 1.0 {
            self.values.iter().map(|v| v.abs()).sum()
        } else if p == 2.0 {
            self.values.iter().map(|v| v * v).sum()
        } else {
            self.values.iter().map(|v| v.abs().powf(p)).sum()
        };
        Ok((self.grid.cell_volume() * sum).powf(1.0 / p))
    }

    pub fn sup_distance(&self, other: &Field) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `g(x) = f(x − offset·h)`, i.e. the field moved by `offset` cells.
    pub fn cyclic_shift(&self, offset: &[i64]) -> Field {
        let mut values = vec![0.0; self.grid.len()];
        for (i, &v) in self.values.iter().enumerate() {
            values[self.grid.offset(i, offset)] = v;
        }
        Field { grid: self.grid, values }
    }

    /// `g(x) = f(A⁻¹x)` for a signed axis permutation `A`, which maps grid
    /// points to grid points exactly: output axis `a` takes input axis
    /// `perm[a]` with sign `signs[a]`.
    pub fn signed_permutation(&self, perm: &[usize], signs: &[i64]) -> Field {
        let d = self.grid.dim;
        let mut values = vec![0.0; self.grid.len()];
        for (i, v) in values.iter_mut().enumerate() {
            let idx = self.grid.unravel(i);
            let mut src = [0usize; 3];
            for a in 0..d {
                src[perm[a]] = self.grid.wrap(signs[a] * idx[a] as i64);
            }
            *v = self.values[self.grid.ravel(&src)];
        }
        Field { grid: self.grid, values }
    }

    pub fn forward_transform(&self) -> SpectralField {
        let mut coeffs: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::fft_nd(&mut coeffs, &self.grid, false);
        let h = self.grid.cell_volume();
        for c in &mut coeffs {
            *c *= h;
        }
        SpectralField { grid: self.grid, coeffs }
    }

    /// Circular convolution `(f ∗ g)(x) = ∫ f(x − y) g(y) dy`.
    pub fn convolve(&self, other: &Field) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        let a = HalfSpectrum::of(self);
        let b = HalfSpectrum::of(other);
        let h = self.grid.cell_volume();
        let symbol: Vec<Complex64> = b.bins().iter().map(|c| c * h).collect();
        Ok(a.apply_complex(&symbol))
    }

    /// Convolution with the kernel whose transform is the real `symbol`.
    pub fn filter(&self, symbol: impl Fn(&[f64; 3]) -> f64) -> Field {
        let freqs = half_frequencies(&self.grid);
        let s: Vec<f64> = freqs.iter().map(|xi| symbol(xi)).collect();
        HalfSpectrum::of(self).apply_real(&s)
    }
}

impl Field {
    /// Kernel whose transform is the real, even `symbol`: samples of the
    /// periodization `L⁻ⁿ Σ_m S(m/L) e^{2πi⟨m,x⟩/L}`. The result is made
    /// exactly even on the grid.
    pub fn from_even_symbol(grid: Grid, symbol: impl Fn(&[f64; 3]) -> f64) -> Field {
        let freqs = half_frequencies(&grid);
        let inv_h = 1.0 / grid.cell_volume();
        let data = freqs.iter().map(|xi| Complex64::new(symbol(xi) * inv_h, 0.0)).collect();
        let mut f = fft::inverse_half(data, &grid);
        f.symmetrize();
        f
    }

    /// Replaces `f` by `(f(x) + f(−x))/2`.
    pub fn symmetrize(&mut self) {
        let g = self.grid;
        for i in 0..g.len() {
            let idx = g.unravel(i);
            let mut neg = [0usize; 3];
            for a in 0..g.dim {
                neg[a] = g.wrap(-(idx[a] as i64));
            }
            let j = g.ravel(&neg);
            if j > i {
                let m = 0.5 * (self.values[i] + self.values[j]);
                self.values[i] = m;
                self.values[j] = m;
            }
        }
    }
}

/// Transform coefficients of a field, indexed like the field (FFT order) and
/// scaled so that the coefficient at `m` approximates `f̂(m/L)`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a grid of {} samples",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Coefficients sampled from a symbol at the physical frequencies.
    pub fn from_symbol(grid: Grid, symbol: impl Fn(&[f64; 3]) -> Complex64) -> Self {
        let coeffs = (0..grid.len()).map(|i| symbol(&grid.frequency(i))).collect();
        SpectralField { grid, coeffs }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at the integer frequency vector `m`.
    pub fn at(&self, m: &[i64]) -> Complex64 {
        let mut idx = [0usize; 3];
        for axis in 0..self.grid.dim {
            idx[axis] = self.grid.wrap(m[axis]);
        }
        self.coeffs[self.grid.ravel(&idx)]
    }

    /// `(L⁻ⁿ Σ |F|²)^{1/2}`, equal to the spatial L² norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (sum / self.grid.side.powi(self.grid.dim as i32)).sqrt()
    }

    /// Largest `|F(m) − conj F(−m)|`; zero for transforms of real fields.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .map(|i| {
                let idx = g.unravel(i);
                let mut neg = [0usize; 3];
                for a in 0..g.dim {
                    neg[a] = g.wrap(-(idx[a] as i64));
                }
                (self.coeffs[i] - self.coeffs[g.ravel(&neg)].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn inverse_complex(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        fft::fft_nd(&mut data, &self.grid, true);
        let scale = 1.0 / self.grid.side.powi(self.grid.dim as i32);
        for c in &mut data {
            *c *= scale;
        }
        data
    }

    /// Real part of the inverse transform.
    pub fn inverse_transform(&self) -> Field {
        let values = self.inverse_complex().into_iter().map(|c| c.re).collect();
        Field { grid: self.grid, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{RngCore, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn rand_field(grid: Grid, seed: u64) -> Field {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
            .collect();
        Field::new(grid, values).unwrap()
    }

    #[test]
    fn rejects_unsupported_grids() {
        assert!(matches!(Grid::new(2, 100, 1.0), Err(Error::UnsupportedGrid(_))));
        assert!(matches!(Grid::new(4, 16, 1.0), Err(Error::UnsupportedGrid(_))));
        assert!(Grid::new(2, 64, 0.0).is_err());
    }

    #[test]
    fn constant_transforms_to_spike() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let s = Field::constant(g, 1.0).forward_transform();
        assert!((s.at(&[0, 0]) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let rest = s.coeffs().iter().skip(1).fold(0.0f64, |m, c| m.max(c.norm()));
        assert!(rest < 1e-12);
    }

    #[test]
    fn real_field_is_hermitian() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        let s = rand_field(g, 3).forward_transform();
        assert!(s.hermitian_defect() < 1e-12);
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        // periodized e^{-π|x|²} on [0,8)², N = 256
        let g = Grid::new(2, 256, 8.0).unwrap();
        let f = Field::from_fn(g, |x| (-std::f64::consts::PI * (x[0] * x[0] + x[1] * x[1])).exp());
        let s = f.forward_transform();
        let mut err: f64 = 0.0;
        for i in 0..g.len() {
            let xi = g.frequency(i);
            let exact = (-std::f64::consts::PI * (xi[0] * xi[0] + xi[1] * xi[1])).exp();
            err = err.max((s.coeffs()[i] - Complex64::new(exact, 0.0)).norm());
        }
        assert!(err < 1e-6, "err = {err}");
    }

    #[test]
    fn spike_inverts_to_constant() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let s = SpectralField::from_symbol(g, |xi| {
            if xi[0] == 0.0 && xi[1] == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let f = s.inverse_transform();
        assert!(f.sup_distance(&Field::constant(g, 1.0)).unwrap() < 1e-14);
    }

    #[test]
    fn round_trip_and_parseval_on_many_fields() {
        for (seed, dim, n) in (0..100u64).map(|s| (s, if s % 10 == 0 { 3 } else { 2 }, 16)) {
            let g = Grid::new(dim, n, 1.0 + seed as f64 * 0.1).unwrap();
            let f = rand_field(g, seed);
            let s = f.forward_transform();
            let back = s.inverse_transform();
            assert!(f.sup_distance(&back).unwrap() < 1e-10);
            let im = s.inverse_complex().iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
            assert!(im < 1e-10);
            let l2 = f.lp_norm(2.0).unwrap();
            assert!((s.l2_norm() - l2).abs() <= 1e-10 * l2);
        }
    }

    #[test]
    fn lp_norm_examples() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let one = Field::constant(g, 1.0);
        for p in [0.5, 1.0, 2.0, 3.7, f64::INFINITY] {
            assert!((one.lp_norm(p).unwrap() - 1.0).abs() < 1e-12);
        }
        let half = Field::from_fn(g, |x| if x[0] < 0.0 { 1.0 } else { 0.0 });
        assert!((half.lp_norm(2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(one.lp_norm(0.0).is_err());
        assert!(one.lp_norm(-1.0).is_err());

        let f = rand_field(g, 9);
        let shifted = f.cyclic_shift(&[5, -3]);
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let (a, b) = (f.lp_norm(p).unwrap(), shifted.lp_norm(p).unwrap());
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn convolution_examples() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        let f = rand_field(g, 1);
        let delta = Field::delta(g);
        assert!(f.convolve(&delta).unwrap().sup_distance(&f).unwrap() < 1e-10);

        let kernel = rand_field(g, 2).map(|v| v + 0.7);
        let w = kernel.integral();
        let c = Field::constant(g, 3.0).convolve(&kernel).unwrap();
        assert!(c.sup_distance(&Field::constant(g, 3.0 * w)).unwrap() < 1e-10);

        let fg = f.convolve(&kernel).unwrap();
        let gf = kernel.convolve(&f).unwrap();
        assert!(fg.sup_distance(&gf).unwrap() < 1e-10);
    }

    #[test]
    fn convolution_theorem() {
        let g = Grid::new(2, 32, 1.5).unwrap();
        let f = rand_field(g, 1);
        let k = rand_field(g, 11);
        let lhs = f.convolve(&k).unwrap().forward_transform();
        let (a, b) = (f.forward_transform(), k.forward_transform());
        let err = (0..g.len())
            .map(|i| (lhs.coeffs()[i] - a.coeffs()[i] * b.coeffs()[i]).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "err = {err}");
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let a = Field::zeros(Grid::new(2, 16, 1.0).unwrap());
        let b = Field::zeros(Grid::new(2, 32, 1.0).unwrap());
        assert!(matches!(a.convolve(&b), Err(Error::ShapeMismatch(_))));
        assert!(Field::new(*a.grid(), vec![0.0; 3]).is_err());
        assert!(Field::new(*a.grid(), vec![f64::NAN; 256]).is_err());
    }

    #[test]
    fn half_spectrum_filter_matches_full_transform() {
        let g = Grid::new(3, 16, 2.0).unwrap();
        let f = rand_field(g, 5);
        let sym = |xi: &[f64; 3]| (-(xi[0] * xi[0] + 2.0 * xi[1] * xi[1] + 0.5 * xi[2] * xi[2])).exp();
        let fast = f.filter(sym);
        let s = f.forward_transform();
        let slow = SpectralField::new(
            g,
            (0..g.len()).map(|i| s.coeffs()[i] * sym(&g.frequency(i))).collect(),
        )
        .unwrap()
        .inverse_transform();
        assert!(fast.sup_distance(&slow).unwrap() < 1e-12);
    }
}
