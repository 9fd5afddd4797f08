use serde::{Deserialize, Serialize};

use super::dictionary::TestFunction;
use super::profile::{psi, BumpProfile};
use crate::error::{invalid, Error, Result};
use crate::geometry::Rotation;
use crate::grid::{half_frequencies, norm, Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `Φ̂ₖ(ξ) = φ̂(2^{−k}ξ) − φ̂(2^{1−k}ξ)`, `Φ̂₀ = φ̂`.
    Dyadic,
    /// `Ψ̂ₖ(ξ) = φ̂(δ^{kε}ξ) − φ̂(δ^{(k−1)ε}ξ)`, `Ψ̂₀ = φ̂`.
    EpsScaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaKind {
    /// `η₀ᵏ`, `0 ≤ k ≤ s`.
    Zero,
    /// `η₁ᵏ`, `k ≥ 2`.
    One,
}

/// A kernel sampled on a grid, with a flag telling whether its transform
/// is negligible on the Nyquist faces.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub field: Field,
    pub resolved: bool,
}

#[derive(Clone, Debug)]
pub struct EtaKernel {
    pub k: usize,
    pub field: Field,
    pub l1_mass: f64,
    pub resolved: bool,
    /// Symbol vanishes at every grid frequency.
    pub truncated: bool,
    /// Largest `|divisor − 1|` where the symbol exceeds `1e-12`.
    pub divisor_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconstructionReport {
    pub test_function: String,
    pub s: usize,
    pub k_max: usize,
    pub frequencies: usize,
    /// `sup |Σ η̂·divisor − Υ̂_I(Aξ)|` over the grid frequencies.
    pub sup_error: f64,
    /// `sup |Υ̂_I(Aξ)|·(1 − φ̂(δ^{k_max ε}ρ))`, bounding the dropped tail.
    pub truncation_residual: f64,
    /// `sup |Υ̂_I·φ̂(δ^ε ρ)(1 − φ̂(2^{−s}ρ))|`: the part of `Υ̂_I` the two
    /// sums leave uncovered when `2δ^{−ε} > 2^s`.
    pub uncovered_band: f64,
    /// `sup_error / sup |Υ̂_I(Aξ)|`.
    pub relative_error: f64,
    pub divisor_deviation: f64,
}

impl ReconstructionReport {
    pub fn check(&self, tol: f64) -> Result<()> {
        if self.sup_error < tol {
            Ok(())
        } else {
            Err(Error::Tolerance(format!(
                "reconstruction of {} off by {:.3e} (tolerance {tol:.1e}; uncovered band {:.3e})",
                self.test_function, self.sup_error, self.uncovered_band
            )))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub family: Family,
    pub k_max: usize,
    pub frequencies: usize,
    pub max_defect: f64,
}

/// Littlewood–Paley families for fixed `(δ, ε, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    delta: f64,
    eps: f64,
    dim: usize,
    s: usize,
    profile: BumpProfile,
}

impl FilterBank {
    /// Accepts any `δ ∈ (0, 1)`, `ε > 0`. The `η` constructions additionally
    /// require `δ^ε ≤ 1/2` and report [`Error::Regime`] otherwise.
    pub fn new(delta: f64, eps: f64, dim: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid(format!("eps must be positive, got {eps}")));
        }
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedGrid(format!("dimension {dim}")));
        }
        // 2^s < δ^{−2ε} ≤ 2^{s+1}
        let x = -2.0 * eps * delta.log2();
        let mut s = (x.ceil() as i64 - 1).max(0);
        while s > 0 && 2f64.powi(s as i32) >= delta.powf(-2.0 * eps) {
            s -= 1;
        }
        while 2f64.powi(s as i32 + 1) < delta.powf(-2.0 * eps) {
            s += 1;
        }
        Ok(FilterBank { delta, eps, dim, s: s as usize, profile: BumpProfile })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn profile(&self) -> BumpProfile {
        self.profile
    }

    /// `δ^ε`.
    pub fn delta_eps(&self) -> f64 {
        self.delta.powf(self.eps)
    }

    pub fn in_regime(&self) -> bool {
        self.delta_eps() <= 0.5
    }

    fn require_regime(&self) -> Result<()> {
        if self.in_regime() {
            Ok(())
        } else {
            Err(Error::Regime(self.delta_eps()))
        }
    }

    pub fn phi_hat(&self, xi: &[f64; 3]) -> f64 {
        self.profile.phi_hat(xi)
    }

    /// Radial profile of the `k`-th member of `family` at `|ξ| = r`.
    pub fn radial(&self, family: Family, k: usize, r: f64) -> f64 {
        if k == 0 {
            return psi(r);
        }
        match family {
            Family::Dyadic => psi(r / 2f64.powi(k as i32)) - psi(r / 2f64.powi(k as i32 - 1)),
            Family::EpsScaled => {
                psi(self.delta.powf(k as f64 * self.eps) * r)
                    - psi(self.delta.powf((k - 1) as f64 * self.eps) * r)
            }
        }
    }

    pub fn lp_symbol(&self, family: Family, k: usize, xi: &[f64; 3]) -> f64 {
        self.radial(family, k, norm(xi))
    }

    /// Inner and outer support radii of the `k`-th member (`k ≥ 1`).
    pub fn support(&self, family: Family, k: usize) -> (f64, f64) {
        match (family, k) {
            (_, 0) => (0.0, 2.0),
            (Family::Dyadic, _) => (2f64.powi(k as i32 - 1), 2f64.powi(k as i32 + 1)),
            (Family::EpsScaled, _) => (
                self.delta.powf(-((k - 1) as f64) * self.eps),
                2.0 * self.delta.powf(-(k as f64) * self.eps),
            ),
        }
    }

    /// Sums the members `0..=K` at every grid frequency, `K` being the last
    /// index before the first member supported beyond every grid frequency.
    pub fn partition_of_unity(&self, family: Family, grid: &Grid) -> PartitionReport {
        let rho_max = grid.nyquist() * (grid.dim() as f64).sqrt();
        let mut k_max = 0;
        while self.support(family, k_max + 1).0 < rho_max {
            k_max += 1;
        }
        let max_defect = (0..grid.len())
            .map(|i| {
                let r = norm(&grid.frequency(i));
                let sum: f64 = (0..=k_max).map(|k| self.radial(family, k, r)).sum();
                (sum - 1.0).abs()
            })
            .fold(0.0, f64::max);
        PartitionReport { family, k_max, frequencies: grid.len(), max_defect }
    }

    /// `(δξ₁, …, δξ_{n−1}, ξₙ)`.
    pub fn aniso(&self, xi: &[f64; 3]) -> [f64; 3] {
        let mut out = *xi;
        for v in out.iter_mut().take(self.dim - 1) {
            *v *= self.delta;
        }
        out
    }

    /// `ρ(ξ) = |(δξ₁, …, δξ_{n−1}, ξₙ)|_e`.
    pub fn bold_radius(&self, xi: &[f64; 3]) -> f64 {
        norm(&self.aniso(xi))
    }

    /// Tube-adapted variant of a base symbol: `S(δξ₁, …, ξₙ)`.
    pub fn anisotropic_symbol(&self, base: impl Fn(&[f64; 3]) -> f64, xi: &[f64; 3]) -> f64 {
        base(&self.aniso(xi))
    }

    pub fn bold(&self, family: Family, k: usize, xi: &[f64; 3]) -> f64 {
        self.radial(family, k, self.bold_radius(xi))
    }

    /// `Υ̂_I(ξ) = Υ̂(δξ₁, …, ξₙ)`.
    pub fn upsilon_i(&self, ups: &TestFunction, xi: &[f64; 3]) -> f64 {
        ups.symbol(&self.aniso(xi))
    }

    /// `η̂₀ᵏ = (Ψ̂₀ + Ψ̂₁)Φ̂ₖ Υ̂_I`, all anisotropic, divisor dropped.
    pub fn eta0_symbol(&self, ups: &TestFunction, k: usize, xi: &[f64; 3]) -> f64 {
        self.eta_profile_symbol(EtaKind::Zero, ups, k, &self.aniso(xi))
    }

    /// Isotropic profile `G` of an `η` symbol: `η̂(ξ) = G(δξ₁, …, ξₙ)`, so
    /// `η(x) = δ^{−(n−1)} κ(x₁/δ, …, xₙ)` with `κ̂ = G`.
    pub fn eta_profile_symbol(&self, kind: EtaKind, ups: &TestFunction, k: usize, z: &[f64; 3]) -> f64 {
        match kind {
            EtaKind::Zero => self.eta0_profile(ups, k, z),
            EtaKind::One => {
                let band = self.radial(Family::EpsScaled, k, norm(z));
                if band == 0.0 {
                    0.0
                } else {
                    band * ups.symbol(z)
                }
            }
        }
    }

    /// The profile kernel `κ` sampled on `grid` (see
    /// [`eta_profile_symbol`](Self::eta_profile_symbol)).
    pub fn eta_profile(&self, kind: EtaKind, ups: &TestFunction, k: usize, grid: &Grid) -> Field {
        Field::from_even_symbol(*grid, |z| self.eta_profile_symbol(kind, ups, k, z))
    }

    fn eta0_profile(&self, ups: &TestFunction, k: usize, z: &[f64; 3]) -> f64 {
        let rho = norm(z);
        let low = psi(self.delta_eps() * rho);
        if low == 0.0 {
            return 0.0;
        }
        let band = self.radial(Family::Dyadic, k, rho);
        if band == 0.0 {
            return 0.0;
        }
        low * band * ups.symbol(z)
    }

    pub fn eta0_divisor(&self, k: usize, xi: &[f64; 3]) -> f64 {
        psi(2f64.powi(-(k as i32 + 1)) * self.delta * norm(xi))
    }

    /// `η̂₁ᵏ = Ψ̂ₖ Υ̂_I`, anisotropic, divisor dropped.
    pub fn eta1_symbol(&self, ups: &TestFunction, k: usize, xi: &[f64; 3]) -> f64 {
        self.eta_profile_symbol(EtaKind::One, ups, k, &self.aniso(xi))
    }

    pub fn eta1_divisor(&self, k: usize, xi: &[f64; 3]) -> f64 {
        psi(self.delta.powf(1.0 + (k as f64 + 3.0) * self.eps) * norm(xi))
    }

    fn max_bold_radius(&self, grid: &Grid) -> f64 {
        let nyq = grid.nyquist();
        ((self.dim - 1) as f64 * (self.delta * nyq).powi(2) + nyq * nyq).sqrt()
    }

    /// Last `k` of the `η₁` sum: the first `k ≥ 2` with `δ^{kε} < 10⁻⁶` or
    /// whose annulus lies beyond every grid frequency.
    pub fn k_max(&self, grid: &Grid) -> usize {
        let rho_max = self.max_bold_radius(grid);
        let mut k = 2;
        loop {
            let (inner, _) = self.support(Family::EpsScaled, k);
            if self.delta.powf(k as f64 * self.eps) < 1e-6 || inner > rho_max || k > 10_000 {
                return k;
            }
            k += 1;
        }
    }

    fn synthesize(
        &self,
        grid: &Grid,
        k: usize,
        symbol: impl Fn(&[f64; 3]) -> f64,
        divisor: impl Fn(&[f64; 3]) -> f64,
    ) -> Result<EtaKernel> {
        let freqs = half_frequencies(grid);
        let mut dev: f64 = 0.0;
        let mut any = false;
        for xi in &freqs {
            let v = symbol(xi);
            if v.abs() > 1e-12 {
                dev = dev.max((divisor(xi) - 1.0).abs());
            }
            any |= v != 0.0;
        }
        if dev > 1e-10 {
            return Err(Error::Tolerance(format!(
                "divisor deviates from 1 by {dev:.3e} on the support of kernel {k}"
            )));
        }
        let field = Field::from_even_symbol(*grid, &symbol);
        let l1_mass = field.lp_norm(1.0)?;
        Ok(EtaKernel {
            k,
            resolved: boundary_negligible(grid, &symbol),
            field,
            l1_mass,
            truncated: !any,
            divisor_deviation: dev,
        })
    }

    pub fn eta0_kernel(&self, ups: &TestFunction, k: usize, grid: &Grid) -> Result<EtaKernel> {
        self.require_regime()?;
        if k > self.s {
            return Err(invalid(format!("eta0 index {k} exceeds s = {}", self.s)));
        }
        self.synthesize(grid, k, |xi| self.eta0_symbol(ups, k, xi), |xi| self.eta0_divisor(k, xi))
    }

    pub fn eta1_kernel(&self, ups: &TestFunction, k: usize, grid: &Grid) -> Result<EtaKernel> {
        self.require_regime()?;
        if k < 2 {
            return Err(invalid(format!("eta1 index must be at least 2, got {k}")));
        }
        self.synthesize(grid, k, |xi| self.eta1_symbol(ups, k, xi), |xi| self.eta1_divisor(k, xi))
    }

    /// Resums both `η` series at every frequency of `grid` and compares with
    /// `Υ̂_I(Aξ)`.
    pub fn reconstruct(
        &self,
        ups: &TestFunction,
        rot: &Rotation,
        grid: &Grid,
    ) -> Result<ReconstructionReport> {
        self.require_regime()?;
        let k_max = self.k_max(grid);
        let tail_scale = self.delta.powf(k_max as f64 * self.eps);
        let mut report = ReconstructionReport {
            test_function: ups.name().to_string(),
            s: self.s,
            k_max,
            frequencies: grid.len(),
            sup_error: 0.0,
            truncation_residual: 0.0,
            uncovered_band: 0.0,
            relative_error: 0.0,
            divisor_deviation: 0.0,
        };
        let mut peak: f64 = 0.0;
        let two_s = 2f64.powi(self.s as i32);
        for i in 0..grid.len() {
            let xi = grid.frequency(i);
            let a_xi = rot.apply(&xi);
            let mut sum = 0.0;
            for k in 0..=self.s {
                let e = self.eta0_symbol(ups, k, &a_xi);
                if e != 0.0 {
                    let d = self.eta0_divisor(k, &xi);
                    report.divisor_deviation = report.divisor_deviation.max((d - 1.0).abs());
                    sum += e * d;
                }
            }
            for k in 2..=k_max {
                let e = self.eta1_symbol(ups, k, &a_xi);
                if e != 0.0 {
                    let d = self.eta1_divisor(k, &xi);
                    report.divisor_deviation = report.divisor_deviation.max((d - 1.0).abs());
                    sum += e * d;
                }
            }
            let target = self.upsilon_i(ups, &a_xi);
            let rho = self.bold_radius(&a_xi);
            peak = peak.max(target.abs());
            report.sup_error = report.sup_error.max((sum - target).abs());
            report.truncation_residual =
                report.truncation_residual.max(target.abs() * (1.0 - psi(tail_scale * rho)));
            report.uncovered_band = report.uncovered_band.max(
                (target * psi(self.delta_eps() * rho) * (1.0 - psi(rho / two_s))).abs(),
            );
        }
        if peak > 0.0 {
            report.relative_error = report.sup_error / peak;
        }
        Ok(report)
    }

    /// `φ_t`, the kernel with transform `φ̂(tξ)`. Unresolved when `2/t`
    /// exceeds the grid's Nyquist frequency.
    pub fn phi_field(&self, t: f64, grid: &Grid) -> Result<Kernel> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("scale must be positive, got {t}")));
        }
        let field = Field::from_even_symbol(*grid, |xi| psi(t * norm(xi)));
        Ok(Kernel { field, resolved: 2.0 / t <= grid.nyquist() })
    }

    /// `y ↦ t⁻ⁿ Υ_I(A⁻¹y/t)`, with transform `Υ̂_I(t A⁻¹ξ)`.
    pub fn tube_test_kernel(
        &self,
        ups: &TestFunction,
        t: f64,
        rot: &Rotation,
        grid: &Grid,
    ) -> Result<Kernel> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("scale must be positive, got {t}")));
        }
        let symbol = |xi: &[f64; 3]| {
            let mut z = rot.apply_inverse(xi);
            for v in z.iter_mut() {
                *v *= t;
            }
            self.upsilon_i(ups, &z)
        };
        let field = Field::from_even_symbol(*grid, symbol);
        Ok(Kernel { field, resolved: boundary_negligible(grid, symbol) })
    }
}

/// True when `|S|` on the Nyquist faces is below `1e-10·max|S|`.
fn boundary_negligible(grid: &Grid, symbol: impl Fn(&[f64; 3]) -> f64) -> bool {
    let nyq = -grid.nyquist();
    let mut peak: f64 = 0.0;
    let mut edge: f64 = 0.0;
    for i in 0..grid.len() {
        let xi = grid.frequency(i);
        let v = symbol(&xi).abs();
        peak = peak.max(v);
        if xi[..grid.dim()].iter().any(|&c| c == nyq) {
            edge = edge.max(v);
        }
    }
    edge <= 1e-10 * peak
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{Shape, TestDictionary};
    use crate::quad::phi_spatial;

    fn bank() -> FilterBank {
        FilterBank::new(1.0 / 16.0, 0.25, 2).unwrap()
    }

    fn phi() -> TestFunction {
        TestFunction::raw(Shape::Phi, 2).unwrap()
    }

    #[test]
    fn scale_count_brackets_delta_power() {
        for &(delta, eps) in &[(1.0 / 16.0, 0.25), (1.0 / 8.0, 0.25), (1e-3, 0.3), (0.5, 0.1), (2f64.powi(-7), 1.0 / 16.0)] {
            let b = FilterBank::new(delta, eps, 2).unwrap();
            let target = delta.powf(-2.0 * eps);
            let s = b.s() as i32;
            assert!(2f64.powi(s) < target && target <= 2f64.powi(s + 1), "{delta} {eps}");
        }
        assert_eq!(bank().s(), 1);
        assert!(FilterBank::new(1.0, 0.25, 2).is_err());
        assert!(FilterBank::new(0.5, 0.0, 2).is_err());
    }

    #[test]
    fn lp_symbol_examples() {
        let b = bank();
        assert_eq!(b.lp_symbol(Family::Dyadic, 0, &[0.0; 3]), 1.0);
        assert_eq!(b.lp_symbol(Family::Dyadic, 1, &[2.0, 0.0, 0.0]), 1.0);
        for r in [0.0, 0.7, 1.3, 3.9, 17.0, 100.0] {
            for big_k in 0..8 {
                let sum: f64 = (0..=big_k).map(|k| b.radial(Family::Dyadic, k, r)).sum();
                assert!((sum - psi(r / 2f64.powi(big_k as i32))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn anisotropic_examples() {
        let b = FilterBank::new(1.0 / 8.0, 0.25, 2).unwrap();
        assert_eq!(b.bold(Family::Dyadic, 0, &[8.0, 0.0, 0.0]), 1.0);
        let xi = [3.3, -1.1, 0.0];
        assert_eq!(
            b.anisotropic_symbol(|z| b.lp_symbol(Family::Dyadic, 2, z), &xi),
            b.lp_symbol(Family::Dyadic, 2, &[3.3 / 8.0, -1.1, 0.0])
        );
    }

    #[test]
    fn bold_phi_kernel_is_the_compressed_phi() {
        // large torus so the images of φ's tails stay below 1e-9
        let b = FilterBank::new(1.0 / 8.0, 0.25, 2).unwrap();
        let g = Grid::new(2, 1024, 32.0).unwrap();
        let k = Field::from_even_symbol(g, |xi| b.bold(Family::Dyadic, 0, xi));
        for &(i0, i1) in &[(0i64, 0i64), (1, 0), (0, 5), (2, -7), (-3, 16), (4, 40)] {
            let idx = [g.wrap(i0), g.wrap(i1)];
            let x = g.coord(g.ravel(&idx));
            let direct = 8.0 * phi_spatial((64.0 * x[0] * x[0] + x[1] * x[1]).sqrt(), 2);
            let v = k.values()[g.ravel(&idx)];
            assert!((v - direct).abs() < 1e-8, "{x:?}: {v} vs {direct}");
        }
    }

    #[test]
    fn phi_field_examples() {
        let b = bank();
        let g = Grid::new(2, 256, 8.0).unwrap();
        let phi1 = b.phi_field(1.0, &g).unwrap();
        assert!(phi1.resolved);
        assert!((phi1.field.integral() - 1.0).abs() < 1e-8);
        let v = phi1.field.values();
        for i in 0..g.len() {
            let idx = g.unravel(i);
            let j = g.ravel(&[g.wrap(-(idx[0] as i64)), g.wrap(-(idx[1] as i64))]);
            assert_eq!(v[i], v[j]);
        }
        assert!(!b.phi_field(0.05, &g).unwrap().resolved);
        assert!(b.phi_field(0.0, &g).is_err());

        // on a torus wide enough that the wrapped tails of φ stay below 1e-7
        let g = Grid::new(2, 512, 16.0).unwrap();
        let s1 = b.phi_field(1.0, &g).unwrap().field.max();
        let s4 = b.phi_field(0.25, &g).unwrap().field.max();
        assert!((s4 / (16.0 * s1) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn eta_divisors_are_one_on_support() {
        let b = bank();
        let g = Grid::new(2, 256, 8.0).unwrap();
        let gauss = TestFunction::raw(Shape::Gaussian, 2).unwrap();
        for ups in [phi(), gauss] {
            for k in 0..=b.s() {
                let e = b.eta0_kernel(&ups, k, &g).unwrap();
                assert!(e.divisor_deviation <= 1e-10);
            }
            for k in 2..=b.k_max(&g) {
                let e = b.eta1_kernel(&ups, k, &g).unwrap();
                assert!(e.divisor_deviation <= 1e-10);
            }
        }
    }

    #[test]
    fn eta1_of_phi_vanishes_when_annuli_miss_its_support() {
        // δ^{−ε} = 2: Ψ̂ₖ lives on ρ ≥ 2^{k−1} ≥ 2 where φ̂ = 0
        let b = bank();
        let g = Grid::new(2, 256, 8.0).unwrap();
        let e = b.eta1_kernel(&phi(), 2, &g).unwrap();
        assert!(e.truncated);
        assert_eq!(e.l1_mass, 0.0);
        let e = b.eta1_kernel(&phi(), b.k_max(&g), &g).unwrap();
        assert!(e.truncated && e.field.sup_norm() == 0.0);
    }

    #[test]
    fn eta0_support_and_mass_bound() {
        let b = bank();
        let g = Grid::new(2, 256, 8.0).unwrap();
        let bound = 2.0 * b.delta().powf(-2.0 * b.eps()) * 2.0;
        let phi = phi();
        for i in 0..g.len() {
            let xi = g.frequency(i);
            if b.eta0_symbol(&phi, 0, &xi) != 0.0 {
                assert!(b.bold_radius(&xi) <= bound);
            }
        }
        // Young on the isotropic profile grid: ‖(Ψ₀+Ψ₁) ∗ Φₖ ∗ Υ‖₁ ≤ product of masses
        let gauss = TestFunction::raw(Shape::Gaussian, 2).unwrap();
        for ups in [phi, gauss] {
            let upsilon = ups.sampled(&g).lp_norm(1.0).unwrap();
            let low = Field::from_even_symbol(g, |z| psi(b.delta_eps() * norm(z))).lp_norm(1.0).unwrap();
            for k in 0..=b.s() {
                let band = Field::from_even_symbol(g, |z| b.lp_symbol(Family::Dyadic, k, z))
                    .lp_norm(1.0)
                    .unwrap();
                let mass = b.eta_profile(EtaKind::Zero, &ups, k, &g).lp_norm(1.0).unwrap();
                assert!(mass.is_finite() && mass <= low * band * upsilon * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn regime_is_enforced_for_eta() {
        let b = FilterBank::new(1.0 / 8.0, 0.25, 2).unwrap();
        let g = Grid::new(2, 32, 1.0).unwrap();
        assert!(matches!(b.eta1_kernel(&phi(), 2, &g), Err(Error::Regime(_))));
        assert!(matches!(b.reconstruct(&phi(), &Rotation::identity(2), &g), Err(Error::Regime(_))));
        assert!(bank().eta0_kernel(&phi(), 2, &g).is_err());
        assert!(bank().eta1_kernel(&phi(), 1, &g).is_err());
    }

    #[test]
    fn reconstruction_of_phi() {
        let b = bank();
        let g = Grid::new(2, 256, 8.0).unwrap();
        for rot in [Rotation::identity(2), Rotation::quarter_turn(2)] {
            let r = b.reconstruct(&phi(), &rot, &g).unwrap();
            assert!(r.sup_error < 1e-8, "{r:?}");
            r.check(1e-8).unwrap();
        }
    }

    #[test]
    fn reconstruction_leaves_a_band_when_delta_eps_is_near_half() {
        // the η sums cover Υ̂_I·[φ̂(δ^ερ)φ̂(2^{−s}ρ) + 1 − φ̂(δ^ερ)]; the
        // measured error is exactly the uncovered band term
        let b = bank();
        let g = Grid::new(2, 128, 8.0).unwrap();
        let gauss = TestFunction::raw(Shape::Gaussian, 2).unwrap();
        let r = b.reconstruct(&gauss, &Rotation::identity(2), &g).unwrap();
        assert!(r.uncovered_band > 0.0);
        assert!((r.sup_error - r.uncovered_band).abs() <= 1e-15);
        // deep in the regime (δ^{−ε} ≥ 4) the identity closes
        let deep = FilterBank::new(2f64.powi(-8), 0.25, 2).unwrap();
        let r = deep.reconstruct(&gauss, &Rotation::identity(2), &g).unwrap();
        assert_eq!(r.uncovered_band, 0.0);
        assert!(r.sup_error < 1e-15);
    }

    #[test]
    fn partitions_of_unity_on_a_256_grid() {
        let g = Grid::new(2, 256, 8.0).unwrap();
        for fam in [Family::Dyadic, Family::EpsScaled] {
            let r = bank().partition_of_unity(fam, &g);
            assert!(r.max_defect < 1e-12, "{r:?}");
            assert!(bank().support(fam, r.k_max + 1).0 >= 16.0 * 2f64.sqrt());
        }
    }

    #[test]
    fn psi_partial_sums_telescope() {
        let b = bank();
        let gauss = TestFunction::raw(Shape::Gaussian, 2).unwrap();
        for &xi in &[[0.1, 0.2, 0.0], [20.0, 1.5, 0.0], [3.0, 5.0, 0.0], [-70.0, 9.0, 0.0]] {
            for big_k in 1..8 {
                let sum: f64 = (0..=big_k).map(|k| b.bold(Family::EpsScaled, k, &xi)).sum::<f64>()
                    * b.upsilon_i(&gauss, &xi);
                let expect = psi(b.delta_eps().powi(big_k as i32) * b.bold_radius(&xi))
                    * b.upsilon_i(&gauss, &xi);
                assert!((sum - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn tube_test_kernel_examples() {
        let b = FilterBank::new(1.0 / 8.0, 0.25, 2).unwrap();
        let g = Grid::new(2, 256, 8.0).unwrap();
        let k = b.tube_test_kernel(&phi(), 1.0, &Rotation::identity(2), &g).unwrap();
        let direct = Field::from_even_symbol(g, |xi| psi(b.bold_radius(xi)));
        assert!(k.field.sup_distance(&direct).unwrap() < 1e-8);

        let dict = TestDictionary::standard(2, 6).unwrap();
        for ups in dict.entries() {
            for t in [0.5, 1.0, 2.0] {
                for rot in [Rotation::planar(0.4), Rotation::quarter_turn(2)] {
                    let k = b.tube_test_kernel(ups, t, &rot, &g).unwrap();
                    assert!((k.field.integral() - ups.integral()).abs() < 1e-6);
                }
            }
        }

        let plain = b.tube_test_kernel(&phi(), 0.7, &Rotation::identity(2), &g).unwrap().field;
        let swapped = b.tube_test_kernel(&phi(), 0.7, &Rotation::axis_swap(2, 0, 1), &g).unwrap().field;
        let transposed = plain.signed_permutation(&[1, 0], &[1, 1]);
        assert!(swapped.sup_distance(&transposed).unwrap() < 1e-12);
    }
}
