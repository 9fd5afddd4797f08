//! Parameter blocks and drivers for the named verification suites, shared
//! by the command-line tool and the acceptance run.

use serde::{Deserialize, Serialize};

use super::bernstein::{bernstein_check, quasi_random_points, BernsteinReport};
use super::decay::{lemma31_table, lemma32_table, profile_k_max, ratio_spread, refinement_changes, DecayRow, Lemma32Row};
use super::domination::{chain_terms, domination_check, Chain, ChainTerm, DominationReport};
use super::sweep::{default_deltas, DictChoice, FrozenScale, SweepConfig, SweepOp};
use crate::error::Result;
use crate::filters::{FilterBank, Shape, TestDictionary, TestFunction};
use crate::grid::{Field, Grid};
use crate::maximal::{
    default_t_grid, hl_maximal, kakeya_maximal_many, nikodym_maximal_many, nontangential_maximal, tangential_maximal,
    DirectionSet, RotationSet, SmoothedKakeya,
};
use crate::testsets::{bandlimited_random, Family};

/// Kernel-study parameters; `n`, `side` describe the profile grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelParams {
    pub delta: f64,
    pub eps: f64,
    pub dim: usize,
    pub power: f64,
    pub shape: Shape,
    pub n: usize,
    pub side: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams { delta: 1.0 / 16.0, eps: 0.25, dim: 2, power: 2.0, shape: Shape::Gaussian, n: 1024, side: 32.0 }
    }
}

impl KernelParams {
    fn parts(&self) -> Result<(FilterBank, TestFunction, Grid)> {
        Ok((
            FilterBank::new(self.delta, self.eps, self.dim)?,
            TestFunction::raw(self.shape, self.dim)?,
            Grid::new(self.dim, self.n, self.side)?,
        ))
    }
}

/// Largest relative change under refinement tolerated by the decay suites.
pub const REFINEMENT_LIMIT: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct Decay31Summary {
    pub params: KernelParams,
    pub rows: Vec<DecayRow>,
    pub refined: Vec<DecayRow>,
    pub changes: Vec<f64>,
    pub spread: f64,
    pub max_change: f64,
    pub passed: bool,
}

fn rows_ok(rows: &[DecayRow]) -> bool {
    rows.iter().any(|r| !r.truncated)
        && rows.iter().all(|r| r.truncated || (r.ratio.is_finite() && r.ratio > 0.0))
}

pub fn decay31_suite(p: &KernelParams) -> Result<Decay31Summary> {
    let (bank, ups, grid) = p.parts()?;
    let ks = 2..=profile_k_max(&bank, &grid);
    let rows = lemma31_table(&bank, &ups, p.power, ks.clone(), &grid)?;
    let refined = lemma31_table(&bank, &ups, p.power, ks, &grid.refined())?;
    let changes = refinement_changes(&rows, &refined);
    let max_change = changes.iter().copied().fold(0.0, f64::max);
    Ok(Decay31Summary {
        params: p.clone(),
        spread: ratio_spread(&rows),
        passed: rows_ok(&rows) && max_change < REFINEMENT_LIMIT,
        rows,
        refined,
        changes,
        max_change,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Decay32Summary {
    pub params: KernelParams,
    pub rows: Vec<Lemma32Row>,
    pub refined: Vec<Lemma32Row>,
    pub near_spread: f64,
    pub far_spread: f64,
    pub max_change: f64,
    /// Every row has the far integral at most the near one.
    pub ordered: bool,
    /// Every row has `‖η₀ᵏ‖₁` at most the product of masses.
    pub mass_bounded: bool,
    pub passed: bool,
}

pub fn decay32_suite(p: &KernelParams) -> Result<Decay32Summary> {
    let (bank, ups, grid) = p.parts()?;
    let rows = lemma32_table(&bank, &ups, p.power, 0..=bank.s(), &grid)?;
    let refined = lemma32_table(&bank, &ups, p.power, 0..=bank.s(), &grid.refined())?;
    let near: Vec<DecayRow> = rows.iter().map(|r| r.near.clone()).collect();
    let far: Vec<DecayRow> = rows.iter().map(|r| r.far.clone()).collect();
    let near_f: Vec<DecayRow> = refined.iter().map(|r| r.near.clone()).collect();
    let far_f: Vec<DecayRow> = refined.iter().map(|r| r.far.clone()).collect();
    let max_change = refinement_changes(&near, &near_f)
        .into_iter()
        .chain(refinement_changes(&far, &far_f))
        .fold(0.0, f64::max);
    let ordered = rows.iter().all(|r| r.far.integral <= r.near.integral);
    let mass_bounded = rows.iter().all(|r| r.l1_mass <= r.product_bound * (1.0 + 1e-12));
    Ok(Decay32Summary {
        params: p.clone(),
        near_spread: ratio_spread(&near),
        far_spread: ratio_spread(&far),
        passed: rows_ok(&near) && rows_ok(&far) && max_change < REFINEMENT_LIMIT && ordered && mass_bounded,
        rows,
        refined,
        max_change,
        ordered,
        mass_bounded,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BernsteinParams {
    pub seeds: Vec<u64>,
    pub dim: usize,
    pub n: usize,
    pub side: f64,
    /// Spectral radius of the inputs, `c₀t`.
    pub cutoff: f64,
    pub t: f64,
    pub r: f64,
    pub points: usize,
}

impl Default for BernsteinParams {
    fn default() -> Self {
        BernsteinParams { seeds: (1..=5).collect(), dim: 2, n: 128, side: 8.0, cutoff: 1.0, t: 1.0, r: 1.0, points: 1000 }
    }
}

/// Largest relative change of a Bernstein ratio under refinement.
pub const BERNSTEIN_STABILITY: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct BernsteinRow {
    pub seed: u64,
    pub coarse: BernsteinReport,
    pub refined: BernsteinReport,
    pub value_change: f64,
    pub gradient_change: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BernsteinSummary {
    pub params: BernsteinParams,
    pub rows: Vec<BernsteinRow>,
    pub passed: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

pub fn bernstein_suite(p: &BernsteinParams) -> Result<BernsteinSummary> {
    let grid = Grid::new(p.dim, p.n, p.side)?;
    let fine = grid.refined();
    let pts = quasi_random_points(&grid, p.points);
    let c0 = p.cutoff / p.t;
    let rows = p
        .seeds
        .iter()
        .map(|&seed| {
            let coarse = bernstein_check(&bandlimited_random(seed, p.cutoff, &grid)?, c0, p.t, p.r, &pts)?;
            let refined = bernstein_check(&bandlimited_random(seed, p.cutoff, &fine)?, c0, p.t, p.r, &pts)?;
            Ok(BernsteinRow {
                seed,
                value_change: rel(coarse.value_ratio, refined.value_ratio),
                gradient_change: rel(coarse.gradient_ratio, refined.gradient_ratio),
                coarse,
                refined,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| {
        r.coarse.value_ratio.is_finite()
            && r.coarse.gradient_ratio.is_finite()
            && r.value_change < BERNSTEIN_STABILITY
            && r.gradient_change < BERNSTEIN_STABILITY
    });
    Ok(BernsteinSummary { params: p.clone(), rows, passed })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DominationParams {
    pub delta: f64,
    pub eps: f64,
    pub dim: usize,
    pub n: usize,
    pub side: f64,
    /// Weight power of the supremum chain.
    pub power: f64,
    /// Frozen chains are run at these scales with exponent `n/r`.
    pub frozen_t: Vec<f64>,
    pub r: f64,
    pub seeds: Vec<u64>,
    pub families: Vec<Family>,
    pub points: usize,
    /// Profile grid of the weighted integrals.
    pub profile_n: usize,
    pub profile_side: f64,
}

impl Default for DominationParams {
    fn default() -> Self {
        DominationParams {
            delta: 1.0 / 16.0,
            eps: 0.25,
            dim: 2,
            n: 128,
            side: 1.0,
            power: 2.0,
            frozen_t: vec![1.0],
            r: 1.0,
            seeds: (1..=10).collect(),
            families: vec![
                Family::BandlimitedRandom { cutoff: 16.0 },
                Family::BumpSum { count: 8 },
                Family::TubeUnion,
            ],
            points: 1000,
            profile_n: 1024,
            profile_side: 32.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DominationRow {
    pub family: String,
    pub seed: u64,
    pub chain: Chain,
    pub report: DominationReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct DominationSummary {
    pub params: DominationParams,
    pub terms: Vec<(Chain, Vec<ChainTerm>)>,
    pub rows: Vec<DominationRow>,
    pub violations: usize,
    pub min_ratio: f64,
    pub passed: bool,
}

pub fn domination_suite(p: &DominationParams) -> Result<DominationSummary> {
    let bank = FilterBank::new(p.delta, p.eps, p.dim)?;
    let dict = DictChoice::Raw.build(p.dim)?;
    let grid = Grid::new(p.dim, p.n, p.side)?;
    let profile = Grid::new(p.dim, p.profile_n, p.profile_side)?;
    let rots = RotationSet::aligned_with(&DirectionSet::for_delta(p.dim, p.delta)?);
    let t_grid = default_t_grid(&grid, p.delta, p.eps);
    let pts = quasi_random_points(&grid, p.points);
    let mut inputs = Vec::new();
    let mut labels = Vec::new();
    for fam in &p.families {
        for &seed in &p.seeds {
            inputs.push(fam.spec(p.delta, seed).generate(&grid)?);
            labels.push((fam.name().to_string(), seed));
        }
    }
    let chains: Vec<Chain> = std::iter::once(Chain::Sup { power: p.power })
        .chain(p.frozen_t.iter().map(|&t| Chain::Frozen { t, r: p.r }))
        .collect();
    let mut terms = Vec::new();
    let mut rows = Vec::new();
    for chain in chains {
        let ts = chain_terms(&bank, &dict, chain, &profile)?;
        let reports = domination_check(&inputs, &bank, &dict, &rots, &t_grid, chain, &ts, &pts)?;
        for ((family, seed), report) in labels.iter().cloned().zip(reports) {
            rows.push(DominationRow { family, seed, chain, report });
        }
        terms.push((chain, ts));
    }
    let violations = rows.iter().map(|r| r.report.violations.len()).sum();
    let min_ratio = rows.iter().map(|r| r.report.min_ratio).fold(f64::INFINITY, f64::min);
    Ok(DominationSummary { params: p.clone(), terms, rows, violations, min_ratio, passed: violations == 0 })
}


/// Perron-family Kakeya sweep at `n = p = q = 2`.
pub fn kakeya_audit_config() -> SweepConfig {
    SweepConfig {
        op: SweepOp::Kakeya,
        family: Family::Perron,
        deltas: default_deltas(),
        p: 2.0,
        q: 2.0,
        eps: 0.25,
        dim: 2,
        n: 512,
        side: 2.0,
        seed: 1,
        r: 1.0,
        band_limit: None,
        dict: DictChoice::Raw,
    }
}

/// Families of the smoothed-operator audit.
pub fn smoothed_audit_families() -> Vec<Family> {
    vec![Family::TubeUnion, Family::BandlimitedRandom { cutoff: 16.0 }, Family::BumpSum { count: 8 }]
}

/// Smoothed sweep at `n = p = 2`, `ε = 1/4`; the family field is replaced
/// per run.
pub fn smoothed_audit_config() -> SweepConfig {
    SweepConfig {
        op: SweepOp::Smoothed,
        family: Family::TubeUnion,
        n: 256,
        side: 1.0,
        ..kakeya_audit_config()
    }
}

/// Frozen-scale sweep on inputs band limited to the unit ball, `ε = 1/16`.
pub fn frozen_audit_config(t: FrozenScale) -> SweepConfig {
    SweepConfig {
        op: SweepOp::Frozen { t },
        family: Family::BandlimitedRandom { cutoff: 1.0 },
        eps: 1.0 / 16.0,
        n: 128,
        side: 8.0,
        band_limit: Some(1.0),
        ..kakeya_audit_config()
    }
}


#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Kakeya,
    Nikodym,
    Hl,
    Nontangential,
    Tangential,
    Smoothed,
    Frozen,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 7] = [
        OperatorKind::Kakeya,
        OperatorKind::Nikodym,
        OperatorKind::Hl,
        OperatorKind::Nontangential,
        OperatorKind::Tangential,
        OperatorKind::Smoothed,
        OperatorKind::Frozen,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::Kakeya => "kakeya",
            OperatorKind::Nikodym => "nikodym",
            OperatorKind::Hl => "hl",
            OperatorKind::Nontangential => "nontangential",
            OperatorKind::Tangential => "tangential",
            OperatorKind::Smoothed => "smoothed",
            OperatorKind::Frozen => "frozen",
        }
    }
}

/// Everything the seven operators need on one grid. The first dictionary
/// entry doubles as the kernel of the nontangential and tangential
/// operators.
#[derive(Clone, Debug)]
pub struct OperatorSetup {
    pub delta: f64,
    pub dirs: DirectionSet,
    pub rots: RotationSet,
    pub bank: FilterBank,
    pub dict: TestDictionary,
    pub t_grid: Vec<f64>,
    /// Decay power of the tangential operator.
    pub power: f64,
    /// Scale of the frozen operator.
    pub frozen_t: f64,
}

impl OperatorSetup {
    pub fn new(grid: &Grid, delta: f64, eps: f64, dict: TestDictionary) -> Result<Self> {
        let dirs = DirectionSet::for_delta(grid.dim(), delta)?;
        Ok(OperatorSetup {
            delta,
            rots: RotationSet::aligned_with(&dirs),
            dirs,
            bank: FilterBank::new(delta, eps, grid.dim())?,
            dict,
            t_grid: default_t_grid(grid, delta, eps),
            power: grid.dim() as f64 + 1.0,
            frozen_t: 1.0,
        })
    }

    /// The operator on every input. Kakeya outputs are indexed by
    /// direction, the others by grid cell.
    pub fn apply_many(&self, kind: OperatorKind, fs: &[Field]) -> Result<Vec<Vec<f64>>> {
        let ups = &self.dict.entries()[0];
        let fields = |v: Vec<Field>| v.into_iter().map(Field::into_values).collect();
        Ok(match kind {
            OperatorKind::Kakeya => kakeya_maximal_many(fs, self.delta, &self.dirs)?,
            OperatorKind::Nikodym => fields(nikodym_maximal_many(fs, self.delta, &self.dirs)?),
            OperatorKind::Hl => fs.iter().map(|f| hl_maximal(f).into_values()).collect(),
            OperatorKind::Nontangential => fs
                .iter()
                .map(|f| Ok(nontangential_maximal(f, ups, &self.t_grid)?.into_values()))
                .collect::<Result<_>>()?,
            OperatorKind::Tangential => fs
                .iter()
                .map(|f| Ok(tangential_maximal(f, ups, self.power, &self.t_grid)?.into_values()))
                .collect::<Result<_>>()?,
            OperatorKind::Smoothed => {
                fields(SmoothedKakeya::new(&self.bank, &self.dict, &self.rots)?.apply_many(fs, &self.t_grid)?)
            }
            OperatorKind::Frozen => {
                fields(SmoothedKakeya::new(&self.bank, &self.dict, &self.rots)?.frozen_many(fs, self.frozen_t)?)
            }
        })
    }
}
