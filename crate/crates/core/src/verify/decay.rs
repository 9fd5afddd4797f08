use serde::Serialize;

use crate::error::{invalid, Result};
use crate::filters::{EtaKind, Family, FilterBank, TestFunction};
use crate::grid::{norm, Field, Grid};

/// Periodization warning threshold on the boundary share of a weighted
/// integral.
pub const CONTAMINATION_LIMIT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedIntegral {
    pub value: f64,
    /// Part of the sum carried by cells on the Nyquist faces (the torus
    /// boundary), relative to the whole.
    pub boundary_share: f64,
}

impl WeightedIntegral {
    pub fn contaminated(&self) -> bool {
        self.boundary_share > CONTAMINATION_LIMIT
    }
}

fn check_weight(scale: f64, power: f64) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid(format!("weight scale must be positive, got {scale}")));
    }
    if !(power >= 0.0 && power.is_finite()) {
        return Err(invalid(format!("weight power must be nonnegative, got {power}")));
    }
    Ok(())
}

fn on_boundary(grid: &Grid, flat: usize) -> bool {
    let idx = grid.unravel(flat);
    idx[..grid.dim()].iter().any(|&i| i == grid.n() / 2)
}

fn weighted_sum(kernel: &Field, radius: impl Fn(&[f64; 3]) -> f64, scale: f64, power: f64) -> WeightedIntegral {
    let grid = kernel.grid();
    let dv = grid.cell_volume();
    let mut total = 0.0;
    let mut edge = 0.0;
    for (i, v) in kernel.values().iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let w = (1.0 + radius(&grid.coord(i)) / scale).powf(power) * v.abs() * dv;
        total += w;
        if on_boundary(grid, i) {
            edge += w;
        }
    }
    let boundary_share = if total > 0.0 { edge / total } else { 0.0 };
    WeightedIntegral { value: total, boundary_share }
}

/// `Σ (1 + |x|/scale)^power |kernel(x)| hⁿ` with torus-minimal `|x|`.
pub fn weighted_kernel_integral(kernel: &Field, scale: f64, power: f64) -> Result<WeightedIntegral> {
    check_weight(scale, power)?;
    Ok(weighted_sum(kernel, norm, scale, power))
}

/// The same integral for `η(x) = δ^{−(n−1)}κ(x'/δ, xₙ)` given the profile
/// `κ` on an isotropic grid: `∫(1 + |(δy', yₙ)|/scale)^power |κ(y)| dy`.
pub fn profile_weighted_integral(profile: &Field, delta: f64, scale: f64, power: f64) -> Result<WeightedIntegral> {
    check_weight(scale, power)?;
    let dim = profile.grid().dim();
    let radius = |y: &[f64; 3]| {
        let mut x = *y;
        for c in x.iter_mut().take(dim - 1) {
            *c *= delta;
        }
        norm(&x)
    };
    Ok(weighted_sum(profile, radius, scale, power))
}

/// `∫(1 + |x|/scale)^power |η(x)| dx` for one `η` kernel, evaluated through
/// its profile on `grid`. Returns the integral and whether the symbol is
/// identically zero on the grid.
pub fn eta_weighted_integral(
    bank: &FilterBank,
    kind: EtaKind,
    ups: &TestFunction,
    k: usize,
    scale: f64,
    power: f64,
    grid: &Grid,
) -> Result<(WeightedIntegral, bool)> {
    let profile = bank.eta_profile(kind, ups, k, grid);
    let truncated = profile.values().iter().all(|v| *v == 0.0);
    Ok((profile_weighted_integral(&profile, bank.delta(), scale, power)?, truncated))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub k: usize,
    pub integral: f64,
    pub bound: f64,
    pub ratio: f64,
    pub truncated: bool,
    pub contaminated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma32Row {
    pub k: usize,
    pub near: DecayRow,
    pub far: DecayRow,
    /// Unweighted `‖η₀ᵏ‖₁`.
    pub l1_mass: f64,
    /// `‖Ψ₀ + Ψ₁‖₁ ‖Φₖ‖₁ ‖Υ_I‖₁` on the same grid.
    pub product_bound: f64,
}

/// `max ratio / min ratio` over rows that are not truncated.
pub fn ratio_spread<'a>(rows: impl IntoIterator<Item = &'a DecayRow>) -> f64 {
    let (lo, hi) = rows
        .into_iter()
        .filter(|r| !r.truncated)
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.ratio), hi.max(r.ratio)));
    if hi == 0.0 {
        f64::NAN
    } else {
        hi / lo
    }
}

fn check_power(power: f64) -> Result<()> {
    if !(power > 1.0 && power.is_finite()) {
        return Err(invalid(format!("decay power must exceed 1, got {power}")));
    }
    Ok(())
}

fn row(k: usize, w: WeightedIntegral, truncated: bool, bound: f64) -> DecayRow {
    DecayRow {
        k,
        integral: w.value,
        bound,
        ratio: w.value / bound,
        truncated,
        contaminated: w.contaminated(),
    }
}

/// `η₁ᵏ` weight scale `δ^{1+(k+3)ε}`.
pub fn eta1_weight_scale(bank: &FilterBank, k: usize) -> f64 {
    bank.delta().powf(1.0 + (k as f64 + 3.0) * bank.eps())
}

/// Rows `∫(1 + δ^{−(k+3)ε}δ^{−1}|x|)^N |η₁ᵏ|` against `δ^{kε}`, profiles
/// sampled on `grid`.
pub fn lemma31_table(
    bank: &FilterBank,
    ups: &TestFunction,
    power: f64,
    ks: std::ops::RangeInclusive<usize>,
    grid: &Grid,
) -> Result<Vec<DecayRow>> {
    check_power(power)?;
    if *ks.start() < 2 {
        return Err(invalid("η₁ decay rows start at k = 2"));
    }
    ks.map(|k| {
        let (w, truncated) =
            eta_weighted_integral(bank, EtaKind::One, ups, k, eta1_weight_scale(bank, k), power, grid)?;
        Ok(row(k, w, truncated, bank.delta().powf(k as f64 * bank.eps())))
    })
    .collect()
}

/// Rows for `η₀ᵏ`: weight scale `2^{k+1}δ` against `δ^{−2(N+1)ε}δ^{−N}2^{−k}`
/// (`near`) and weight scale `2^{k+1}` against `δ^{−2(N+1)ε}2^{−k}` (`far`).
pub fn lemma32_table(
    bank: &FilterBank,
    ups: &TestFunction,
    power: f64,
    ks: std::ops::RangeInclusive<usize>,
    grid: &Grid,
) -> Result<Vec<Lemma32Row>> {
    check_power(power)?;
    if *ks.end() > bank.s() {
        return Err(invalid(format!("η₀ decay rows end at s = {}", bank.s())));
    }
    let (delta, eps) = (bank.delta(), bank.eps());
    let common = delta.powf(-2.0 * (power + 1.0) * eps);
    let low = Field::from_even_symbol(*grid, |z| bank.phi_hat(&scaled(z, bank.delta_eps())));
    let low_mass = low.lp_norm(1.0)?;
    let ups_mass = Field::from_even_symbol(*grid, |z| ups.symbol(z)).lp_norm(1.0)?;
    ks.map(|k| {
        let profile = bank.eta_profile(EtaKind::Zero, ups, k, grid);
        let truncated = profile.values().iter().all(|v| *v == 0.0);
        let two = 2f64.powi(k as i32 + 1);
        let near = profile_weighted_integral(&profile, delta, two * delta, power)?;
        let far = profile_weighted_integral(&profile, delta, two, power)?;
        let decay = 2f64.powi(-(k as i32));
        let band = Field::from_even_symbol(*grid, |z| bank.radial(Family::Dyadic, k, norm(z)));
        Ok(Lemma32Row {
            k,
            near: row(k, near, truncated, common * delta.powf(-power) * decay),
            far: row(k, far, truncated, common * decay),
            l1_mass: profile.lp_norm(1.0)?,
            product_bound: low_mass * band.lp_norm(1.0)? * ups_mass,
        })
    })
    .collect()
}

fn scaled(z: &[f64; 3], c: f64) -> [f64; 3] {
    [c * z[0], c * z[1], c * z[2]]
}

/// Relative change of each row's integral between `grid` and its refinement.
pub fn refinement_changes(coarse: &[DecayRow], fine: &[DecayRow]) -> Vec<f64> {
    coarse
        .iter()
        .zip(fine)
        .map(|(a, b)| {
            if a.integral == 0.0 && b.integral == 0.0 {
                0.0
            } else {
                (b.integral - a.integral).abs() / a.integral.abs().max(b.integral.abs())
            }
        })
        .collect()
}

/// Profile grid for decay integrals: 2D `N = 1024`, `L = 32`; 3D `N = 128`,
/// `L = 16`. The weighted tails of the `η` profiles are still visible at
/// `|y| ≈ 8`, so smaller boxes underestimate the integrals.
pub fn kernel_grid(dim: usize) -> Grid {
    match dim {
        2 => Grid::new(2, 1024, 32.0).expect("valid grid"),
        _ => Grid::new(3, 128, 16.0).expect("valid grid"),
    }
}

/// Last `k` whose `η₁ᵏ` annulus starts inside the Nyquist ball of `grid`.
pub fn profile_k_max(bank: &FilterBank, grid: &Grid) -> usize {
    let mut k = 2;
    while bank.support(Family::EpsScaled, k + 1).0 < grid.nyquist() && k < 64 {
        k += 1;
    }
    k
}
