//! Multi-dimensional FFT plumbing over row-major `Nⁿ` arrays.
//!
//! Complex transforms back [`SpectralField`](super::SpectralField); the
//! half-spectrum engine ([`HalfSpectrum`]) uses a real-to-complex transform on
//! the last axis and is what the operators use for repeated filtering.

use std::cell::RefCell;
use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Field, Grid};

thread_local! {
    static COMPLEX_PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static REAL_PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn complex_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    COMPLEX_PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn real_forward(n: usize) -> Arc<dyn RealToComplex<f64>> {
    REAL_PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn real_inverse(n: usize) -> Arc<dyn ComplexToReal<f64>> {
    REAL_PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Transforms every line along `axis` of a row-major array of shape `dims`.
fn transform_axis(data: &mut [Complex64], dims: &[usize], axis: usize, fft: &dyn Fft<f64>) {
    let n = dims[axis];
    let stride: usize = dims[axis + 1..].iter().product();
    let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
    if stride == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    let block = n * stride;
    let mut buf = vec![ZERO; block];
    for chunk in data.chunks_mut(block) {
        for i in 0..n {
            let row = &chunk[i * stride..(i + 1) * stride];
            for (l, v) in row.iter().enumerate() {
                buf[l * n + i] = *v;
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for i in 0..n {
            let row = &mut chunk[i * stride..(i + 1) * stride];
            for (l, v) in row.iter_mut().enumerate() {
                *v = buf[l * n + i];
            }
        }
    }
}

/// Unnormalized n-dimensional DFT in place (`e^{∓2πi k·j/N}`).
pub(crate) fn fft_nd(data: &mut [Complex64], grid: &Grid, inverse: bool) {
    let dims = vec![grid.n(); grid.dim()];
    let plan = complex_plan(grid.n(), inverse);
    for axis in 0..grid.dim() {
        transform_axis(data, &dims, axis, plan.as_ref());
    }
}

/// Raw DFT of a real field with the last axis stored as `N/2 + 1` bins.
///
/// Filtering with a symbol `S` sampled at the physical frequencies
/// ([`half_frequencies`]) and transforming back realizes the circular
/// convolution with the kernel whose transform is `S`.
#[derive(Clone, Debug)]
pub struct HalfSpectrum {
    grid: Grid,
    data: Vec<Complex64>,
}

fn half_dims(grid: &Grid) -> Vec<usize> {
    let mut dims = vec![grid.n(); grid.dim()];
    dims[grid.dim() - 1] = grid.n() / 2 + 1;
    dims
}

impl HalfSpectrum {
    pub fn of(field: &Field) -> Self {
        let grid = *field.grid();
        let n = grid.n();
        let half = n / 2 + 1;
        let lines = grid.len() / n;
        let r2c = real_forward(n);
        let mut scratch = r2c.make_scratch_vec();
        let mut input = field.values().to_vec();
        let mut data = vec![ZERO; lines * half];
        for (inp, out) in input.chunks_mut(n).zip(data.chunks_mut(half)) {
            r2c.process_with_scratch(inp, out, &mut scratch)
                .expect("buffer lengths match the plan");
        }
        let dims = half_dims(&grid);
        let plan = complex_plan(n, false);
        for axis in 0..grid.dim() - 1 {
            transform_axis(&mut data, &dims, axis, plan.as_ref());
        }
        HalfSpectrum { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Raw (unnormalized) DFT bins in half-spectrum layout.
    pub fn bins(&self) -> &[Complex64] {
        &self.data
    }

    /// Convolution with the kernel whose (real) transform is `symbol`.
    pub fn apply_real(&self, symbol: &[f64]) -> Field {
        debug_assert_eq!(symbol.len(), self.data.len());
        let data = self.data.iter().zip(symbol).map(|(c, s)| c * *s).collect();
        inverse_half(data, &self.grid)
    }

    pub fn apply_complex(&self, symbol: &[Complex64]) -> Field {
        debug_assert_eq!(symbol.len(), self.data.len());
        let data = self.data.iter().zip(symbol).map(|(c, s)| c * s).collect();
        inverse_half(data, &self.grid)
    }

    /// Like [`apply_real`](Self::apply_real) but only bins with `mask[i]` set
    /// are kept.
    pub fn apply_real_masked(&self, symbol: &[f64], mask: &[bool]) -> Field {
        let data = self
            .data
            .iter()
            .zip(symbol)
            .zip(mask)
            .map(|((c, s), &keep)| if keep { c * *s } else { ZERO })
            .collect();
        inverse_half(data, &self.grid)
    }

    pub fn into_field(self) -> Field {
        let grid = self.grid;
        inverse_half(self.data, &grid)
    }
}

pub(crate) fn inverse_half(mut data: Vec<Complex64>, grid: &Grid) -> Field {
    let n = grid.n();
    let half = n / 2 + 1;
    let dims = half_dims(grid);
    let plan = complex_plan(n, true);
    for axis in 0..grid.dim() - 1 {
        transform_axis(&mut data, &dims, axis, plan.as_ref());
    }
    let c2r = real_inverse(n);
    let mut scratch = c2r.make_scratch_vec();
    let mut out = vec![0.0; grid.len()];
    for (inp, o) in data.chunks_mut(half).zip(out.chunks_mut(n)) {
        inp[0].im = 0.0;
        inp[half - 1].im = 0.0;
        c2r.process_with_scratch(inp, o, &mut scratch)
            .expect("buffer lengths match the plan");
    }
    let norm = 1.0 / grid.len() as f64;
    for v in &mut out {
        *v *= norm;
    }
    Field::from_raw(*grid, out)
}

/// Physical frequencies `ξ = m/L` of the half-spectrum bins, in storage order.
/// The Nyquist bin of every axis maps to `m = −N/2`.
pub fn half_frequencies(grid: &Grid) -> Vec<[f64; 3]> {
    let dims = half_dims(grid);
    let total: usize = dims.iter().product();
    let inv_l = 1.0 / grid.side();
    let d = grid.dim();
    (0..total)
        .map(|mut k| {
            let mut xi = [0.0; 3];
            for axis in (0..d).rev() {
                let i = k % dims[axis];
                k /= dims[axis];
                xi[axis] = grid.signed(i) as f64 * inv_l;
            }
            xi
        })
        .collect()
}
