use std::f64::consts::SQRT_2;

use rayon::prelude::*;

use super::dilation::{ball_offsets, dilate};
use super::directions::RotationSet;
use super::shiftmax::MaxPyramid;
use crate::error::{invalid, Error, Result};
use crate::filters::{FilterBank, TestDictionary, TestFunction};
use crate::geometry::Rotation;
use crate::grid::{half_frequencies, norm, Field, Grid, HalfSpectrum};

/// Geometric grid `t₀·√2^j ≤ δ^{−ε}` with `t₀ = max(2h, δ)`.
pub fn default_t_grid(grid: &Grid, delta: f64, eps: f64) -> Vec<f64> {
    let top = delta.powf(-eps);
    let start = (2.0 * grid.spacing()).max(delta);
    if start > top {
        return vec![top];
    }
    let mut out = Vec::new();
    let mut t = start;
    while t <= top * (1.0 + 1e-12) {
        out.push(t);
        t *= SQRT_2;
    }
    out
}

/// Geometric grid from `lo` to `hi` with ratio `√2`.
pub fn geometric_t_grid(lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(invalid(format!("bad scale range [{lo}, {hi}]")));
    }
    let mut out = Vec::new();
    let mut t = lo;
    while t <= hi * (1.0 + 1e-12) {
        out.push(t);
        t *= SQRT_2;
    }
    Ok(out)
}

fn check_scales(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(invalid("empty scale grid"));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(invalid(format!("scales must be positive, got {t}")));
    }
    Ok(())
}

fn check_same_grid(fs: &[Field]) -> Result<Grid> {
    let grid = *fs.first().ok_or_else(|| invalid("no input fields"))?.grid();
    if fs.iter().any(|f| f.grid() != &grid) {
        return Err(Error::ShapeMismatch("inputs live on different grids".into()));
    }
    Ok(grid)
}

/// `f ∗ Υ_{ct}` for the isotropic dilate `Υ_{ct}(x) = (ct)^{−n}Υ(x/ct)`.
fn isotropic_filter(spec: &HalfSpectrum, freqs: &[[f64; 3]], ups: &TestFunction, scale: f64) -> Field {
    let symbol: Vec<f64> = freqs
        .iter()
        .map(|xi| ups.symbol(&[scale * xi[0], scale * xi[1], scale * xi[2]]))
        .collect();
    spec.apply_real(&symbol)
}

/// `(f ∗ Υ)_∇(x) = max_t max_{|x−y| ≤ t} |f ∗ Υ_{ct}(y)|` with kernel scale
/// factor `c = kernel_scale` (1 for the plain operator).
pub fn nontangential_maximal_scaled(
    f: &Field,
    ups: &TestFunction,
    t_grid: &[f64],
    kernel_scale: f64,
) -> Result<Field> {
    check_scales(t_grid)?;
    let grid = *f.grid();
    let spec = HalfSpectrum::of(f);
    let freqs = half_frequencies(&grid);
    let mut out = Field::zeros(grid);
    for &t in t_grid {
        let g = isotropic_filter(&spec, &freqs, ups, kernel_scale * t).abs();
        out.max_assign(&dilate(&g, &ball_offsets(&grid, t)));
    }
    Ok(out)
}

pub fn nontangential_maximal(f: &Field, ups: &TestFunction, t_grid: &[f64]) -> Result<Field> {
    nontangential_maximal_scaled(f, ups, t_grid, 1.0)
}

/// `M**_{Υ,N} f(x) = max_t max_s |f ∗ Υ_{ct}(x − s)|(1 + |s|/t)^{−N}`.
pub fn tangential_maximal_scaled(
    f: &Field,
    ups: &TestFunction,
    power: f64,
    t_grid: &[f64],
    kernel_scale: f64,
) -> Result<Field> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(invalid(format!("decay power must be positive, got {power}")));
    }
    check_scales(t_grid)?;
    let grid = *f.grid();
    let spec = HalfSpectrum::of(f);
    let freqs = half_frequencies(&grid);
    let mut out = Field::zeros(grid);
    for &t in t_grid {
        let g = isotropic_filter(&spec, &freqs, ups, kernel_scale * t);
        out.max_assign(&MaxPyramid::new(&g).field(t, power));
    }
    Ok(out)
}

pub fn tangential_maximal(f: &Field, ups: &TestFunction, power: f64, t_grid: &[f64]) -> Result<Field> {
    tangential_maximal_scaled(f, ups, power, t_grid, 1.0)
}

/// `sup_t sup_A sup_Υ |f ∗ Υ_{A,I,t}|` over finite sets of scales, rotations
/// and dictionary entries.
#[derive(Clone, Debug)]
pub struct SmoothedKakeya<'a> {
    bank: &'a FilterBank,
    dict: &'a TestDictionary,
    rots: &'a RotationSet,
    band_limit: Option<f64>,
}

impl<'a> SmoothedKakeya<'a> {
    pub fn new(bank: &'a FilterBank, dict: &'a TestDictionary, rots: &'a RotationSet) -> Result<Self> {
        if dict.dim() != bank.dim() || rots.rotations().iter().any(|r| r.dim() != bank.dim()) {
            return Err(Error::ShapeMismatch("dimension mismatch between bank, dictionary and rotations".into()));
        }
        Ok(SmoothedKakeya { bank, dict, rots, band_limit: None })
    }

    /// Drop all frequencies with `|ξ| > b` before filtering.
    pub fn with_band_limit(mut self, b: f64) -> Self {
        self.band_limit = Some(b);
        self
    }

    /// Rotations that give distinct kernels. Every dictionary entry is even
    /// and axially symmetric about `eₙ`, so `Υ̂_I(tA⁻¹ξ)` depends on `A` only
    /// through `±Aeₙ`.
    fn distinct_rotations(&self) -> Vec<&'a Rotation> {
        let axes = self.rots.axes();
        let mut kept: Vec<usize> = Vec::new();
        for (i, a) in axes.iter().enumerate() {
            let dup = kept.iter().any(|&j| {
                let b = &axes[j];
                let d_plus = (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max);
                let d_minus = (0..3).map(|k| (a[k] + b[k]).abs()).fold(0.0, f64::max);
                d_plus.min(d_minus) <= 1e-12
            });
            if !dup {
                kept.push(i);
            }
        }
        kept.into_iter().map(|i| &self.rots.rotations()[i]).collect()
    }

    fn symbol(&self, ups: &TestFunction, t: f64, rot: &Rotation, freqs: &[[f64; 3]], mask: &[bool]) -> Vec<f64> {
        freqs
            .iter()
            .zip(mask)
            .map(|(xi, &keep)| {
                if !keep {
                    return 0.0;
                }
                let mut z = rot.apply_inverse(xi);
                for v in z.iter_mut() {
                    *v *= t;
                }
                self.bank.upsilon_i(ups, &z)
            })
            .collect()
    }

    /// `|f ∗ Υ_{A,I,t}|` for one triple.
    pub fn kernel_response(&self, f: &Field, ups: &TestFunction, t: f64, rot: &Rotation) -> Result<Field> {
        check_scales(&[t])?;
        let grid = *f.grid();
        let freqs = half_frequencies(&grid);
        let mask = self.mask(&freqs);
        let sym = self.symbol(ups, t, rot, &freqs, &mask);
        Ok(HalfSpectrum::of(f).apply_real(&sym).abs())
    }

    fn mask(&self, freqs: &[[f64; 3]]) -> Vec<bool> {
        match self.band_limit {
            Some(b) => freqs.iter().map(|xi| norm(xi) <= b).collect(),
            None => vec![true; freqs.len()],
        }
    }

    /// Scales of `t_grid` whose kernel symbol is not negligible on the
    /// Nyquist faces of `grid` (the kernel is then aliased).
    pub fn unresolved_scales(&self, grid: &Grid, t_grid: &[f64]) -> Vec<f64> {
        let freqs = half_frequencies(grid);
        let mask = self.mask(&freqs);
        let nyq = grid.nyquist();
        let edge: Vec<bool> = freqs
            .iter()
            .map(|xi| xi[..grid.dim()].iter().any(|c| c.abs() >= nyq * (1.0 - 1e-12)))
            .collect();
        t_grid
            .iter()
            .copied()
            .filter(|&t| {
                self.distinct_rotations().iter().any(|rot| {
                    self.dict.entries().iter().any(|ups| {
                        let sym = self.symbol(ups, t, rot, &freqs, &mask);
                        let peak = sym.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        let e = sym.iter().zip(&edge).filter(|(_, &b)| b).fold(0.0f64, |m, (v, _)| m.max(v.abs()));
                        e > 1e-10 * peak
                    })
                })
            })
            .collect()
    }

    /// The operator on every input, over the scales `t_grid ⊂ (0, δ^{−ε}]`.
    pub fn apply_many(&self, fs: &[Field], t_grid: &[f64]) -> Result<Vec<Field>> {
        check_scales(t_grid)?;
        let top = self.bank.delta().powf(-self.bank.eps());
        if let Some(t) = t_grid.iter().find(|&&t| t > top * (1.0 + 1e-12)) {
            return Err(invalid(format!("scale {t} exceeds delta^-eps = {top}")));
        }
        self.run(fs, t_grid)
    }

    pub fn apply(&self, f: &Field, t_grid: &[f64]) -> Result<Field> {
        Ok(self.apply_many(std::slice::from_ref(f), t_grid)?.remove(0))
    }

    /// Frozen-scale variant; `t` must lie in `(0, δ^{−ε}]`.
    pub fn frozen_many(&self, fs: &[Field], t: f64) -> Result<Vec<Field>> {
        let top = self.bank.delta().powf(-self.bank.eps());
        if !(t > 0.0 && t <= top * (1.0 + 1e-12)) {
            return Err(invalid(format!("frozen scale must lie in (0, {top}], got {t}")));
        }
        self.run(fs, &[t])
    }

    pub fn frozen(&self, f: &Field, t: f64) -> Result<Field> {
        Ok(self.frozen_many(std::slice::from_ref(f), t)?.remove(0))
    }

    fn run(&self, fs: &[Field], t_grid: &[f64]) -> Result<Vec<Field>> {
        let grid = check_same_grid(fs)?;
        if grid.dim() != self.bank.dim() {
            return Err(Error::ShapeMismatch(format!("{}D input for a {}D bank", grid.dim(), self.bank.dim())));
        }
        let freqs = half_frequencies(&grid);
        let mask = self.mask(&freqs);
        let spectra: Vec<HalfSpectrum> = fs.iter().map(HalfSpectrum::of).collect();
        let rots = self.distinct_rotations();
        let items: Vec<(f64, &Rotation)> =
            t_grid.iter().flat_map(|&t| rots.iter().map(move |&r| (t, r))).collect();
        let init = || vec![Field::zeros(grid); fs.len()];
        let out = items
            .par_iter()
            .fold(init, |mut acc, &(t, rot)| {
                for ups in self.dict.entries() {
                    let sym = self.symbol(ups, t, rot, &freqs, &mask);
                    for (a, s) in acc.iter_mut().zip(&spectra) {
                        a.max_assign(&s.apply_real(&sym).abs());
                    }
                }
                acc
            })
            .reduce(init, |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    x.max_assign(y);
                }
                a
            });
        Ok(out)
    }
}

/// `M_{δS} f` over the scales `t_grid`.
pub fn smoothed_kakeya(
    f: &Field,
    bank: &FilterBank,
    dict: &TestDictionary,
    rots: &RotationSet,
    t_grid: &[f64],
) -> Result<Field> {
    SmoothedKakeya::new(bank, dict, rots)?.apply(f, t_grid)
}

/// `M_{δS}` at the single scale `t`.
pub fn smoothed_frozen_t(
    f: &Field,
    bank: &FilterBank,
    dict: &TestDictionary,
    rots: &RotationSet,
    t: f64,
) -> Result<Field> {
    SmoothedKakeya::new(bank, dict, rots)?.frozen(f, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::Shape;
    use crate::maximal::{kakeya_maximal, DirectionSet};

    fn phi() -> TestFunction {
        TestFunction::raw(Shape::Phi, 2).unwrap()
    }

    fn bump(g: Grid) -> Field {
        let mut f = Field::zeros(g);
        f.values_mut()[g.ravel(&[3, 5])] = 1.0;
        f
    }

    #[test]
    fn default_grid_is_geometric() {
        let g = Grid::new(2, 256, 8.0).unwrap();
        let t = default_t_grid(&g, 1.0 / 16.0, 0.25);
        assert!((t[0] - 1.0 / 16.0).abs() < 1e-15);
        assert!(*t.last().unwrap() <= 2.0 + 1e-12);
        assert_eq!(t.len(), 11);
        for w in t.windows(2) {
            assert!((w[1] / w[0] - SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn nontangential_examples() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        let ts = geometric_t_grid(2.0 * g.spacing(), 1.0).unwrap();
        let one = nontangential_maximal(&Field::constant(g, 1.0), &phi(), &ts).unwrap();
        assert!(one.values().iter().all(|v| (v - 1.0).abs() < 1e-12));

        let f = bump(g);
        let nt = nontangential_maximal(&f, &phi(), &ts).unwrap();
        let spec = HalfSpectrum::of(&f);
        let freqs = half_frequencies(&g);
        let filtered: Vec<Field> = ts.iter().map(|&t| isotropic_filter(&spec, &freqs, &phi(), t)).collect();
        for ft in &filtered {
            for (a, b) in nt.values().iter().zip(ft.values()) {
                assert!(*a >= b.abs());
            }
        }
        // exhaustive scan over admissible (y, t)
        for x in 0..g.len() {
            let xi = g.unravel(x);
            let mut want: f64 = 0.0;
            for (ft, &t) in filtered.iter().zip(&ts) {
                for y in 0..g.len() {
                    let yi = g.unravel(y);
                    let off = [g.wrap(yi[0] as i64 - xi[0] as i64), g.wrap(yi[1] as i64 - xi[1] as i64)];
                    if g.radius(g.ravel(&off)) <= t * (1.0 + 1e-12) {
                        want = want.max(ft.values()[y].abs());
                    }
                }
            }
            assert_eq!(nt.values()[x], want, "{x}");
        }
    }

    #[test]
    fn tangential_examples() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        let ts = geometric_t_grid(2.0 * g.spacing(), 1.0).unwrap();
        let one = tangential_maximal(&Field::constant(g, 1.0), &phi(), 3.0, &ts).unwrap();
        assert!(one.values().iter().all(|v| (v - 1.0).abs() < 1e-12));

        let f = bump(g);
        for &n in &[1.0, 3.0] {
            let tm = tangential_maximal(&f, &phi(), n, &ts).unwrap();
            let nt = nontangential_maximal(&f, &phi(), &ts).unwrap();
            for (a, b) in tm.values().iter().zip(nt.values()) {
                assert!(*a >= 2f64.powf(-n) * b * (1.0 - 1e-12));
            }
        }
        // large N pins the shift at s = 0
        let spec = HalfSpectrum::of(&f);
        let freqs = half_frequencies(&g);
        let mut centered = Field::zeros(g);
        for &t in &ts {
            centered.max_assign(&isotropic_filter(&spec, &freqs, &phi(), t).abs());
        }
        let tm = tangential_maximal(&f, &phi(), 64.0, &ts).unwrap();
        let scale = centered.sup_norm();
        assert!(tm.sup_distance(&centered).unwrap() <= 1e-6 * scale);
    }

    #[test]
    fn smoothed_fixes_constants_and_grows_with_the_sets() {
        let g = Grid::new(2, 64, 4.0).unwrap();
        let bank = FilterBank::new(1.0 / 8.0, 0.25, 2).unwrap();
        let dirs = DirectionSet::circle(8).unwrap();
        let rots = RotationSet::aligned_with(&dirs);
        let phi_dict = TestDictionary::phi_only(2).unwrap();
        let ts = default_t_grid(&g, bank.delta(), bank.eps());
        let one = smoothed_kakeya(&Field::constant(g, 1.0), &bank, &phi_dict, &rots, &ts).unwrap();
        assert!(one.values().iter().all(|v| (v - 1.0).abs() < 1e-8));
        let frozen = smoothed_frozen_t(&Field::constant(g, 1.0), &bank, &phi_dict, &rots, 1.0).unwrap();
        assert!(frozen.values().iter().all(|v| (v - 1.0).abs() < 1e-8));

        let f = Field::from_fn(g, |x| (-(x[0] * x[0]) * 3.0 - (x[1] - 0.3).powi(2) * 10.0).exp());
        let small_rots = RotationSet::identity(2);
        let wide = TestDictionary::new(vec![phi(), TestFunction::raw(Shape::Gaussian, 2).unwrap()]).unwrap();
        let a = smoothed_kakeya(&f, &bank, &phi_dict, &small_rots, &ts).unwrap();
        let b = smoothed_kakeya(&f, &bank, &phi_dict, &rots, &ts).unwrap();
        let c = smoothed_kakeya(&f, &bank, &wide, &rots, &ts).unwrap();
        for i in 0..g.len() {
            assert!(a.values()[i] <= b.values()[i]);
            assert!(b.values()[i] <= c.values()[i]);
        }
        let op = SmoothedKakeya::new(&bank, &wide, &rots).unwrap();
        for &t in &ts {
            let single = op.frozen(&f, t).unwrap();
            let direct = smoothed_kakeya(&f, &bank, &wide, &rots, &[t]).unwrap();
            assert_eq!(single, direct);
            for (x, y) in c.values().iter().zip(single.values()) {
                assert!(x >= y);
            }
            for r in rots.rotations() {
                let k = op.kernel_response(&f, &wide.entries()[1], t, r).unwrap();
                for (x, y) in c.values().iter().zip(k.values()) {
                    assert!(*x >= *y * (1.0 - 1e-12));
                }
            }
        }
        assert!(op.frozen(&f, 2.0).is_err());
        assert!(op.frozen(&f, 0.0).is_err());
    }

    #[test]
    fn smoothed_tube_value_is_comparable_to_kakeya() {
        let g = Grid::new(2, 256, 2.0).unwrap();
        let delta = 1.0 / 8.0;
        let bank = FilterBank::new(delta, 0.25, 2).unwrap();
        let axis = [0.0, 1.0, 0.0];
        let tube = Field::from_fn(g, |x| if x[1].abs() <= 0.5 && x[0].abs() <= 0.5 * delta { 1.0 } else { 0.0 });
        let dict = TestDictionary::phi_only(2).unwrap();
        let rots = RotationSet::identity(2);
        let ts = default_t_grid(&g, delta, 0.25);
        let s = smoothed_kakeya(&tube, &bank, &dict, &rots, &ts).unwrap();
        let center = s.values()[0];
        let k = kakeya_maximal(&tube, delta, &DirectionSet::from_directions(2, vec![axis]).unwrap()).unwrap()[0];
        let ratio = center / k;
        assert!((0.5..=2.0).contains(&ratio), "{center} {k}");
    }
}
