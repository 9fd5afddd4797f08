use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::filters::{FilterBank, Shape, TestDictionary, TestFunction};
use crate::grid::{Field, Grid};
use crate::maximal::{
    default_t_grid, geometric_t_grid, kakeya_maximal, nikodym_maximal, nontangential_maximal_scaled, DirectionSet,
    RotationSet, SmoothedKakeya,
};
use crate::testsets::Family;

/// Fits with an RMS log residual above this are flagged unreliable.
pub const RESIDUAL_LIMIT: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrozenScale {
    Fixed(f64),
    /// `t = δ^{−ε}`.
    Top,
}

impl FrozenScale {
    pub fn value(&self, delta: f64, eps: f64) -> f64 {
        match *self {
            FrozenScale::Fixed(t) => t,
            FrozenScale::Top => delta.powf(-eps),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum SweepOp {
    /// `‖f_δ*‖_{L^q(S^{n−1})} / ‖f‖_p`.
    Kakeya,
    /// `‖f_δ**‖_p / ‖f‖_p`.
    Nikodym,
    /// `‖M_{δS}f‖_p / ‖f‖_p`.
    Smoothed,
    /// `‖M_{δS}f‖_p / ‖(f ∗ φ_δ)_∇‖_p`.
    SmoothedFirst,
    /// `‖M^t_{δS}f‖_p / ‖f‖_p` at one scale.
    Frozen { t: FrozenScale },
}

impl SweepOp {
    pub fn name(&self) -> String {
        match self {
            SweepOp::Kakeya => "kakeya".into(),
            SweepOp::Nikodym => "nikodym".into(),
            SweepOp::Smoothed => "smoothed".into(),
            SweepOp::SmoothedFirst => "smoothed_first".into(),
            SweepOp::Frozen { t: FrozenScale::Fixed(t) } => format!("frozen_t{t}"),
            SweepOp::Frozen { t: FrozenScale::Top } => "frozen_top".into(),
        }
    }
}

/// Dictionary used by the smoothed operators in a sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictChoice {
    /// The four shapes at unit scale.
    #[default]
    Raw,
    /// The four shapes normalized by their seminorms.
    Normalized,
    Phi,
}

impl DictChoice {
    pub fn build(&self, dim: usize) -> Result<TestDictionary> {
        match self {
            DictChoice::Raw => {
                TestDictionary::new(Shape::ALL.iter().map(|&s| TestFunction::raw(s, dim)).collect::<Result<_>>()?)
            }
            DictChoice::Normalized => TestDictionary::standard(dim, TestDictionary::default_order(dim)),
            DictChoice::Phi => TestDictionary::phi_only(dim),
        }
    }
}

fn default_r() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(flatten)]
    pub op: SweepOp,
    pub family: Family,
    pub deltas: Vec<f64>,
    pub p: f64,
    pub q: f64,
    pub eps: f64,
    pub dim: usize,
    pub n: usize,
    pub side: f64,
    #[serde(default)]
    pub seed: u64,
    /// Only enters the reference slope of the frozen operator.
    #[serde(default = "default_r")]
    pub r: f64,
    /// Spectral cutoff applied to the smoothed kernels; inputs must be band
    /// limited to it. Lifts the `δ ≥ 2h` requirement.
    #[serde(default)]
    pub band_limit: Option<f64>,
    #[serde(default)]
    pub dict: DictChoice,
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n, self.side)
    }

    /// Slope of the reference power of `1/δ`, where one applies.
    pub fn bound_slope(&self) -> Option<f64> {
        let n = self.dim as f64;
        match self.op {
            SweepOp::Smoothed => Some(n / self.p + self.eps),
            SweepOp::SmoothedFirst => Some(self.eps),
            SweepOp::Frozen { .. } => Some(4.0 * (n / self.r + 1.0) * self.eps),
            SweepOp::Kakeya | SweepOp::Nikodym => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta: f64,
    pub p: f64,
    pub q: f64,
    pub in_norm: f64,
    pub out_norm: f64,
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of `log(ratio)`.
    pub residual: f64,
}

impl Fit {
    pub fn reliable(&self) -> bool {
        self.residual <= RESIDUAL_LIMIT
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub operator: String,
    pub family: String,
    pub rows: Vec<SweepRow>,
    pub fit: Fit,
    pub reliable: bool,
    pub bound_slope: Option<f64>,
}

/// Least squares of `log(ratio)` on `log(1/δ)`.
pub fn fit_exponent(rows: &[SweepRow]) -> Result<Fit> {
    if rows.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: rows.len() });
    }
    if let Some(r) = rows.iter().find(|r| !(r.ratio > 0.0 && r.ratio.is_finite() && r.delta > 0.0)) {
        return Err(invalid(format!("cannot take logs of ratio {} at delta {}", r.ratio, r.delta)));
    }
    let xs: Vec<f64> = rows.iter().map(|r| (1.0 / r.delta).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-24 * (1.0 + mx * mx) {
        return Err(invalid("all deltas coincide; the fit is degenerate"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(Fit { slope, intercept, residual: (ss / m).sqrt() })
}

fn check(cfg: &SweepConfig, grid: &Grid) -> Result<()> {
    if cfg.deltas.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: cfg.deltas.len() });
    }
    if !(cfg.p > 0.0 && cfg.q > 0.0 && cfg.eps > 0.0) {
        return Err(invalid("p, q and eps must be positive"));
    }
    let h = grid.spacing();
    for &d in &cfg.deltas {
        if !(d > 0.0 && d < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {d}")));
        }
        if cfg.band_limit.is_none() && d < 2.0 * h {
            return Err(Error::Unresolved(format!("delta {d} below two cells (h = {h})")));
        }
    }
    Ok(())
}

/// One sweep cell.
pub fn sweep_row(cfg: &SweepConfig, grid: &Grid, delta: f64) -> Result<SweepRow> {
    let f = cfg.family.spec(delta, cfg.seed).generate(grid)?;
    let (in_norm, out_norm) = evaluate(cfg, &f, delta)?;
    Ok(SweepRow { delta, p: cfg.p, q: cfg.q, in_norm, out_norm, ratio: out_norm / in_norm })
}

fn evaluate(cfg: &SweepConfig, f: &Field, delta: f64) -> Result<(f64, f64)> {
    let grid = *f.grid();
    let dirs = DirectionSet::for_delta(cfg.dim, delta)?;
    let lp = |g: &Field| g.lp_norm(cfg.p);
    match cfg.op {
        SweepOp::Kakeya => {
            let vals = kakeya_maximal(f, delta, &dirs)?;
            Ok((lp(f)?, dirs.lq_norm(&vals, cfg.q)?))
        }
        SweepOp::Nikodym => Ok((lp(f)?, lp(&nikodym_maximal(f, delta, &dirs)?)?)),
        SweepOp::Smoothed | SweepOp::SmoothedFirst | SweepOp::Frozen { .. } => {
            let bank = FilterBank::new(delta, cfg.eps, cfg.dim)?;
            let dict = cfg.dict.build(cfg.dim)?;
            let rots = RotationSet::aligned_with(&dirs);
            let mut op = SmoothedKakeya::new(&bank, &dict, &rots)?;
            if let Some(b) = cfg.band_limit {
                super::bernstein::require_band_limit(f, b)?;
                op = op.with_band_limit(b);
            }
            let out = match cfg.op {
                SweepOp::Frozen { t } => op.frozen(f, t.value(delta, cfg.eps))?,
                _ => op.apply(f, &default_t_grid(&grid, delta, cfg.eps))?,
            };
            let den = match cfg.op {
                SweepOp::SmoothedFirst => lp(&first_bound_denominator(f, delta)?)?,
                _ => lp(f)?,
            };
            Ok((den, lp(&out)?))
        }
    }
}

/// `(f ∗ φ_δ)_∇ = max_t max_{|x−y|≤t} |f ∗ φ_{δt}(y)|` over `t` from `h` to
/// `L/2` in steps of `√2`.
pub fn first_bound_denominator(f: &Field, delta: f64) -> Result<Field> {
    let grid = f.grid();
    let phi = TestFunction::raw(Shape::Phi, grid.dim())?;
    let ts = geometric_t_grid(grid.spacing(), 0.5 * grid.side())?;
    nontangential_maximal_scaled(f, &phi, &ts, delta)
}

pub fn norm_ratio_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let grid = cfg.grid()?;
    check(cfg, &grid)?;
    let rows = cfg.deltas.iter().map(|&d| sweep_row(cfg, &grid, d)).collect::<Result<Vec<_>>>()?;
    let fit = fit_exponent(&rows)?;
    Ok(SweepReport {
        operator: cfg.op.name(),
        family: cfg.family.name().to_string(),
        reliable: fit.reliable(),
        rows,
        fit,
        bound_slope: cfg.bound_slope(),
    })
}

/// The second- and first-bound smoothed sweeps for several families at
/// once: per `δ` the operator runs once on all inputs and both denominators
/// are formed from the same numerator. `cfg.op` and `cfg.family` are
/// ignored.
pub fn smoothed_sweep_pairs(cfg: &SweepConfig, families: &[Family]) -> Result<Vec<(SweepReport, SweepReport)>> {
    let grid = cfg.grid()?;
    check(cfg, &grid)?;
    if families.is_empty() {
        return Err(invalid("no families"));
    }
    let dict = cfg.dict.build(cfg.dim)?;
    let mut second: Vec<Vec<SweepRow>> = vec![Vec::new(); families.len()];
    let mut first: Vec<Vec<SweepRow>> = vec![Vec::new(); families.len()];
    for &delta in &cfg.deltas {
        let fs = families.iter().map(|fam| fam.spec(delta, cfg.seed).generate(&grid)).collect::<Result<Vec<_>>>()?;
        let bank = FilterBank::new(delta, cfg.eps, cfg.dim)?;
        let rots = RotationSet::aligned_with(&DirectionSet::for_delta(cfg.dim, delta)?);
        let outs = SmoothedKakeya::new(&bank, &dict, &rots)?.apply_many(&fs, &default_t_grid(&grid, delta, cfg.eps))?;
        for (i, (f, out)) in fs.iter().zip(&outs).enumerate() {
            let num = out.lp_norm(cfg.p)?;
            let plain = f.lp_norm(cfg.p)?;
            let nt = first_bound_denominator(f, delta)?.lp_norm(cfg.p)?;
            let row = |den: f64| SweepRow { delta, p: cfg.p, q: cfg.q, in_norm: den, out_norm: num, ratio: num / den };
            second[i].push(row(plain));
            first[i].push(row(nt));
        }
    }
    let report = |op: SweepOp, fam: &Family, rows: Vec<SweepRow>| -> Result<SweepReport> {
        let fit = fit_exponent(&rows)?;
        let c = SweepConfig { op, family: *fam, ..cfg.clone() };
        Ok(SweepReport {
            operator: op.name(),
            family: fam.name().to_string(),
            reliable: fit.reliable(),
            rows,
            fit,
            bound_slope: c.bound_slope(),
        })
    };
    families
        .iter()
        .zip(second.into_iter().zip(first))
        .map(|(fam, (s, f))| Ok((report(SweepOp::Smoothed, fam, s)?, report(SweepOp::SmoothedFirst, fam, f)?)))
        .collect()
}

/// `{2⁻³, …, 2⁻⁷}`.
pub fn default_deltas() -> Vec<f64> {
    (3..=7).map(|k| 2f64.powi(-k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(ratios: &[(f64, f64)]) -> Vec<SweepRow> {
        ratios
            .iter()
            .map(|&(delta, ratio)| SweepRow { delta, p: 2.0, q: 2.0, in_norm: 1.0, out_norm: ratio, ratio })
            .collect()
    }

    #[test]
    fn exact_power_and_constant() {
        let ds = default_deltas();
        let fit = fit_exponent(&rows(&ds.iter().map(|&d| (d, 1.0 / d)).collect::<Vec<_>>())).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12 && fit.residual < 1e-12);
        let fit = fit_exponent(&rows(&ds.iter().map(|&d| (d, 3.0)).collect::<Vec<_>>())).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let ds = default_deltas();
        let mut rng = crate::testsets::rng::Rng::new(5);
        let r: Vec<(f64, f64)> = ds.iter().map(|&d| (d, (1.0 + 1e-3 * rng.normal()) / d)).collect();
        let fit = fit_exponent(&rows(&r)).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-2);
        assert!(fit.reliable());
    }

    #[test]
    fn degenerate_and_short_fits_are_refused() {
        assert!(matches!(
            fit_exponent(&rows(&[(0.1, 1.0), (0.05, 2.0)])),
            Err(Error::InsufficientPoints { needed: 3, got: 2 })
        ));
        assert!(fit_exponent(&rows(&[(0.1, 1.0), (0.1, 2.0), (0.1, 3.0)])).is_err());
        assert!(fit_exponent(&rows(&[(0.1, 1.0), (0.05, 0.0), (0.01, 3.0)])).is_err());
    }

    fn cfg(op: SweepOp, family: Family) -> SweepConfig {
        SweepConfig {
            op,
            family,
            deltas: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
            p: 2.0,
            q: 2.0,
            eps: 0.25,
            dim: 2,
            n: 128,
            side: 1.0,
            seed: 0,
            r: 1.0,
            band_limit: None,
            dict: DictChoice::Raw,
        }
    }

    #[test]
    fn kakeya_fixed_point_has_zero_slope() {
        for q in [1.0, 2.0, 3.0] {
            let mut c = cfg(SweepOp::Kakeya, Family::Constant);
            c.q = q;
            let rep = norm_ratio_sweep(&c).unwrap();
            assert!(rep.fit.slope.abs() < 1e-6, "{rep:?}");
        }
    }

    #[test]
    fn sweep_preconditions() {
        let mut c = cfg(SweepOp::Kakeya, Family::Constant);
        c.deltas.truncate(2);
        assert!(matches!(norm_ratio_sweep(&c), Err(Error::InsufficientPoints { .. })));
        let mut c = cfg(SweepOp::Kakeya, Family::Constant);
        c.deltas.push(1.0 / 128.0);
        assert!(matches!(norm_ratio_sweep(&c), Err(Error::Unresolved(_))));
    }

    #[test]
    fn first_bound_denominator_dominates_input() {
        let g = Grid::new(2, 64, 1.0).unwrap();
        let f = crate::testsets::bump_sum(3, 4, &g).unwrap();
        let d = first_bound_denominator(&f, 1.0 / 8.0).unwrap();
        // the smallest scales leave f unchanged
        for (a, b) in d.values().iter().zip(f.values()) {
            assert!(*a >= b.abs() - 1e-12);
        }
    }

    #[test]
    fn paired_sweeps_match_single_sweeps() {
        let fams = [Family::BumpSum { count: 3 }, Family::Ball];
        let base = cfg(SweepOp::Smoothed, Family::Ball);
        let pairs = smoothed_sweep_pairs(&base, &fams).unwrap();
        for (fam, (second, first)) in fams.iter().zip(&pairs) {
            let a = norm_ratio_sweep(&SweepConfig { family: *fam, ..base.clone() }).unwrap();
            let b = norm_ratio_sweep(&SweepConfig { family: *fam, op: SweepOp::SmoothedFirst, ..base.clone() }).unwrap();
            for (x, y) in a.rows.iter().zip(&second.rows).chain(b.rows.iter().zip(&first.rows)) {
                assert!((x.ratio - y.ratio).abs() <= 1e-12 * x.ratio);
            }
        }
    }

    #[test]
    fn config_round_trips() {
        let mut c = cfg(SweepOp::Frozen { t: FrozenScale::Top }, Family::BandlimitedRandom { cutoff: 1.0 });
        c.band_limit = Some(1.0);
        let text = serde_json::to_string(&c).unwrap();
        let back: SweepConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert!((c.bound_slope().unwrap() - 3.0).abs() < 1e-12);
    }
}
