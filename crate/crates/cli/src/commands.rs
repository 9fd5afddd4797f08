use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

use kakeya_core::filters::{Family as LpFamily, FilterBank, TestDictionary};
use kakeya_core::geometry::Rotation;
use kakeya_core::grid::io;
use kakeya_core::maximal::{DirectionSet, RotationSet};
use kakeya_core::testsets::{Family, Manifest, TestSpec};
use kakeya_core::verify::suite::{
    bernstein_suite, decay31_suite, decay32_suite, domination_suite, frozen_audit_config, kakeya_audit_config,
    smoothed_audit_config, BernsteinParams, DominationParams, KernelParams, OperatorKind, OperatorSetup,
};
use kakeya_core::verify::{norm_ratio_sweep, Chain, DictChoice, FrozenScale, SweepConfig, SweepOp, SweepReport};
use kakeya_core::Grid;

use crate::output::{OutDir, Outcome, RunConfig, VERSION};
use crate::{Command, FiltersArgs, MaximalArgs, Preset, Suite, SweepArgs, TestsetArgs, VerifyArgs};

/// Runs one subcommand; every output directory gets its resolved config.
pub fn run(cmd: &Command, threads: usize) -> Result<Outcome> {
    let (out, params, inputs, seed, outcome) = match cmd {
        Command::Filters(a) => {
            let (params, o) = filters(a)?;
            (a.out.clone(), params, vec![], None, o)
        }
        Command::Testset(a) => {
            let (params, seed, o) = testset(a)?;
            (a.out.clone(), params, vec![], seed, o)
        }
        Command::Maximal(a) => {
            let (params, o) = maximal(a)?;
            (a.out.clone(), params, vec![a.input.clone()], None, o)
        }
        Command::Verify(a) => {
            let (params, seed, o) = verify(a)?;
            (a.out.clone(), params, a.params.iter().cloned().collect(), seed, o)
        }
        Command::Sweep(a) => {
            let (cfg, o) = sweep(a)?;
            let seed = cfg.seed;
            (a.out.clone(), serde_json::to_value(cfg)?, a.config.iter().cloned().collect(), Some(seed), o)
        }
        Command::Report(a) => {
            let (params, o) = crate::report::report(a)?;
            (a.out.clone(), params, a.csv.clone(), None, o)
        }
    };
    let config = RunConfig {
        subcommand: cmd.name().to_string(),
        params,
        inputs,
        output: out.clone(),
        seed,
        threads,
        version: VERSION.to_string(),
    };
    OutDir::create(&out)?.finish(&config, &outcome)?;
    Ok(outcome)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Inline JSON, or the contents of the file it names.
fn json_arg<T: DeserializeOwned>(arg: &str) -> Result<T> {
    let p = PathBuf::from(arg);
    if !arg.trim_start().starts_with('{') && p.is_file() {
        read_json(&p)
    } else {
        serde_json::from_str(arg).with_context(|| format!("parsing JSON argument {arg:?}"))
    }
}

#[derive(Serialize)]
struct ReconstructionRow {
    entry: String,
    rotation: usize,
    sup_error: f64,
    relative_error: f64,
    uncovered_band: f64,
    truncation_residual: f64,
}

fn filters(a: &FiltersArgs) -> Result<(serde_json::Value, Outcome)> {
    let dir = OutDir::create(&a.out)?;
    let grid = Grid::new(a.dim, a.n, a.side)?;
    let bank = FilterBank::new(a.delta, a.eps, a.dim)?;
    let partition: Vec<_> =
        [LpFamily::Dyadic, LpFamily::EpsScaled].iter().map(|&f| bank.partition_of_unity(f, &grid)).collect();
    dir.write_json("partition.json", &partition)?;
    let dict = TestDictionary::standard(a.dim, TestDictionary::default_order(a.dim))?;
    let rots = if a.identity_only {
        vec![Rotation::identity(a.dim)]
    } else {
        RotationSet::aligned_with(&DirectionSet::for_delta(a.dim, a.delta)?).rotations().to_vec()
    };
    let mut rows = Vec::new();
    for ups in dict.entries() {
        for (i, rot) in rots.iter().enumerate() {
            let r = bank.reconstruct(ups, rot, &grid)?;
            rows.push(ReconstructionRow {
                entry: r.test_function,
                rotation: i,
                sup_error: r.sup_error,
                relative_error: r.relative_error,
                uncovered_band: r.uncovered_band,
                truncation_residual: r.truncation_residual,
            });
        }
    }
    dir.write_csv("reconstruction.csv", &rows)?;
    let mut failures = Vec::new();
    for p in &partition {
        if p.max_defect >= 1e-12 {
            failures.push(format!("partition of unity ({:?}) off by {:.3e}", p.family, p.max_defect));
        }
    }
    for r in &rows {
        if r.sup_error >= a.tol {
            failures.push(format!("reconstruction of {} at rotation {} off by {:.3e}", r.entry, r.rotation, r.sup_error));
        }
    }
    let outcome = Outcome::from_failures(failures);
    let worst = rows.iter().map(|r| r.sup_error).fold(0.0, f64::max);
    dir.write_json(
        "summary.json",
        &serde_json::json!({
            "partition": partition,
            "reconstruction_pairs": rows.len(),
            "reconstruction_sup_error": worst,
            "passed": outcome.passed,
            "failures": outcome.failures,
        }),
    )?;
    Ok((serde_json::to_value(a)?, outcome))
}

fn testset(a: &TestsetArgs) -> Result<(serde_json::Value, Option<u64>, Outcome)> {
    let spec: TestSpec = json_arg(&a.spec)?;
    let grid = Grid::new(a.dim, a.n, a.side)?;
    let field = spec.generate(&grid)?;
    let dir = OutDir::create(&a.out)?;
    io::save(&field, &dir.path("field.bin"))?;
    if a.csv {
        io::write_csv(&field, std::fs::File::create(dir.path("field.csv"))?)?;
    }
    dir.write_json("manifest.json", &Manifest::of(&spec, &field)?)?;
    let seed = match spec {
        TestSpec::TubeUnion { seed, .. } | TestSpec::BandlimitedRandom { seed, .. } | TestSpec::BumpSum { seed, .. } => {
            Some(seed)
        }
        _ => None,
    };
    let params = serde_json::json!({ "spec": spec, "dim": a.dim, "n": a.n, "side": a.side, "csv": a.csv });
    Ok((params, seed, Outcome::from_failures(vec![])))
}

#[derive(Serialize)]
struct DirectionRow {
    omega_0: f64,
    omega_1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_2: Option<f64>,
    weight: f64,
    value: f64,
}

fn maximal(a: &MaximalArgs) -> Result<(serde_json::Value, Outcome)> {
    let f = io::load(&a.input).with_context(|| format!("loading {}", a.input.display()))?;
    let grid = *f.grid();
    let dict = DictChoice::from(a.dict).build(grid.dim())?;
    let mut setup = OperatorSetup::new(&grid, a.delta, a.eps, dict)?;
    if let Some(count) = a.dirs {
        setup.dirs = DirectionSet::with_count(grid.dim(), count)?;
        setup.rots = RotationSet::aligned_with(&setup.dirs);
    }
    setup.frozen_t = a.t;
    if let Some(p) = a.power {
        setup.power = p;
    }
    let kind = OperatorKind::from(a.op);
    let out = setup.apply_many(kind, std::slice::from_ref(&f))?.remove(0);
    let dir = OutDir::create(&a.out)?;
    let summary = if kind == OperatorKind::Kakeya {
        let rows = setup.dirs.directions().iter().zip(setup.dirs.weights()).zip(&out).map(|((w, &weight), &value)| {
            DirectionRow {
                omega_0: w[0],
                omega_1: w[1],
                omega_2: (grid.dim() == 3).then_some(w[2]),
                weight,
                value,
            }
        });
        dir.write_csv("kakeya.csv", rows)?;
        let q = grid.dim() as f64;
        serde_json::json!({
            "op": kind.name(),
            "directions": out.len(),
            "max": out.iter().copied().fold(0.0, f64::max),
            "lq_norm": setup.dirs.lq_norm(&out, q)?,
            "q": q,
        })
    } else {
        let field = kakeya_core::Field::new(grid, out)?;
        io::save(&field, &dir.path(&format!("{}.bin", kind.name())))?;
        serde_json::json!({
            "op": kind.name(),
            "sup_norm": field.sup_norm(),
            "l1_norm": field.lp_norm(1.0)?,
            "l2_norm": field.lp_norm(2.0)?,
        })
    };
    dir.write_json("summary.json", &summary)?;
    let mut params = serde_json::to_value(a)?;
    params["t_grid"] = serde_json::to_value(&setup.t_grid)?;
    params["power"] = serde_json::to_value(setup.power)?;
    params["directions"] = serde_json::to_value(setup.dirs.len())?;
    Ok((params, Outcome::from_failures(vec![])))
}

fn params_or_default<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        Some(p) => read_json(p),
        None => Ok(T::default()),
    }
}

#[derive(Serialize)]
struct Decay31Csv {
    k: usize,
    integral: f64,
    bound: f64,
    ratio: f64,
    truncated: bool,
    contaminated: bool,
    refined_integral: f64,
    change: f64,
}

#[derive(Serialize)]
struct Decay32Csv {
    k: usize,
    near_integral: f64,
    near_bound: f64,
    near_ratio: f64,
    far_integral: f64,
    far_bound: f64,
    far_ratio: f64,
    l1_mass: f64,
    product_bound: f64,
    contaminated: bool,
}

#[derive(Serialize)]
struct BernsteinCsv {
    seed: u64,
    value_ratio: f64,
    gradient_ratio: f64,
    refined_value_ratio: f64,
    refined_gradient_ratio: f64,
    value_change: f64,
    gradient_change: f64,
}

#[derive(Serialize)]
struct DominationCsv {
    family: String,
    seed: u64,
    chain: String,
    points: usize,
    violations: usize,
    min_slack: f64,
    min_ratio: f64,
}

fn chain_label(c: &Chain) -> String {
    match c {
        Chain::Sup { power } => format!("sup_N{power}"),
        Chain::Frozen { t, r } => format!("frozen_t{t}_r{r}"),
    }
}

fn verify(a: &VerifyArgs) -> Result<(serde_json::Value, Option<u64>, Outcome)> {
    let dir = OutDir::create(&a.out)?;
    match a.suite {
        Suite::Decay31 => {
            let p: KernelParams = params_or_default(&a.params)?;
            let s = decay31_suite(&p)?;
            dir.write_csv(
                "decay31.csv",
                s.rows.iter().zip(&s.refined).zip(&s.changes).map(|((r, f), &change)| Decay31Csv {
                    k: r.k,
                    integral: r.integral,
                    bound: r.bound,
                    ratio: r.ratio,
                    truncated: r.truncated,
                    contaminated: r.contaminated,
                    refined_integral: f.integral,
                    change,
                }),
            )?;
            let mut failures = Vec::new();
            if !s.passed {
                failures.push(format!(
                    "decay table not finite or not refinement stable (max change {:.3e})",
                    s.max_change
                ));
            }
            dir.write_json("summary.json", &s)?;
            Ok((serde_json::to_value(p)?, None, Outcome::from_failures(failures)))
        }
        Suite::Decay32 => {
            let p: KernelParams = params_or_default(&a.params)?;
            let s = decay32_suite(&p)?;
            dir.write_csv(
                "decay32.csv",
                s.rows.iter().map(|r| Decay32Csv {
                    k: r.k,
                    near_integral: r.near.integral,
                    near_bound: r.near.bound,
                    near_ratio: r.near.ratio,
                    far_integral: r.far.integral,
                    far_bound: r.far.bound,
                    far_ratio: r.far.ratio,
                    l1_mass: r.l1_mass,
                    product_bound: r.product_bound,
                    contaminated: r.near.contaminated || r.far.contaminated,
                }),
            )?;
            let mut failures = Vec::new();
            if !s.ordered {
                failures.push("far integral exceeds near integral".to_string());
            }
            if !s.mass_bounded {
                failures.push("L1 mass exceeds the product of masses".to_string());
            }
            if !s.passed && failures.is_empty() {
                failures.push(format!(
                    "decay table not finite or not refinement stable (max change {:.3e})",
                    s.max_change
                ));
            }
            dir.write_json("summary.json", &s)?;
            Ok((serde_json::to_value(p)?, None, Outcome::from_failures(failures)))
        }
        Suite::Bernstein => {
            let p: BernsteinParams = params_or_default(&a.params)?;
            let s = bernstein_suite(&p)?;
            dir.write_csv(
                "bernstein.csv",
                s.rows.iter().map(|r| BernsteinCsv {
                    seed: r.seed,
                    value_ratio: r.coarse.value_ratio,
                    gradient_ratio: r.coarse.gradient_ratio,
                    refined_value_ratio: r.refined.value_ratio,
                    refined_gradient_ratio: r.refined.gradient_ratio,
                    value_change: r.value_change,
                    gradient_change: r.gradient_change,
                }),
            )?;
            let failures = s
                .rows
                .iter()
                .filter(|r| !(r.value_change < 0.1 && r.gradient_change < 0.1 && r.coarse.value_ratio.is_finite()))
                .map(|r| {
                    format!("seed {}: changes {:.3e}/{:.3e} under refinement", r.seed, r.value_change, r.gradient_change)
                })
                .collect();
            dir.write_json("summary.json", &s)?;
            Ok((serde_json::to_value(&p)?, p.seeds.first().copied(), Outcome::from_failures(failures)))
        }
        Suite::Domination => {
            let p: DominationParams = params_or_default(&a.params)?;
            let s = domination_suite(&p)?;
            dir.write_csv(
                "domination.csv",
                s.rows.iter().map(|r| DominationCsv {
                    family: r.family.clone(),
                    seed: r.seed,
                    chain: chain_label(&r.chain),
                    points: r.report.points,
                    violations: r.report.violations.len(),
                    min_slack: r.report.min_slack,
                    min_ratio: r.report.min_ratio,
                }),
            )?;
            let failures = s
                .rows
                .iter()
                .flat_map(|r| {
                    r.report.violations.iter().map(move |v| {
                        format!(
                            "{} seed {} {} at {:?}: lhs {:.6e} > rhs {:.6e}",
                            r.family,
                            r.seed,
                            chain_label(&r.chain),
                            v.point,
                            v.lhs,
                            v.rhs
                        )
                    })
                })
                .collect();
            dir.write_json("summary.json", &s)?;
            Ok((serde_json::to_value(&p)?, p.seeds.first().copied(), Outcome::from_failures(failures)))
        }
        Suite::Sweep => {
            let cfg: SweepConfig = match &a.params {
                Some(p) => read_json(p)?,
                None => smoothed_audit_config(),
            };
            let (_, outcome) = sweep_outputs(&dir, &cfg, a.margin, None)?;
            Ok((serde_json::to_value(&cfg)?, Some(cfg.seed), outcome))
        }
    }
}

/// Runs a sweep and writes `sweep.csv` and `summary.json` into `dir`.
fn sweep_outputs(dir: &OutDir, cfg: &SweepConfig, margin: f64, max_slope: Option<f64>) -> Result<(SweepReport, Outcome)> {
    let report = norm_ratio_sweep(cfg)?;
    dir.write_csv("sweep.csv", &report.rows)?;
    let reference = report.bound_slope.or(max_slope);
    let mut failures = Vec::new();
    if let Some(b) = reference {
        let limit = if report.bound_slope.is_some() { b + margin } else { b };
        if report.fit.slope > limit {
            failures.push(format!("{} on {}: slope {:.4} exceeds {limit:.4}", report.operator, report.family, report.fit.slope));
        }
    }
    let outcome = Outcome::from_failures(failures);
    dir.write_json(
        "summary.json",
        &serde_json::json!({
            "operator": report.operator,
            "family": report.family,
            "fit": report.fit,
            "reliable": report.reliable,
            "bound_slope": report.bound_slope,
            "margin": margin,
            "max_slope": max_slope,
            "passed": outcome.passed,
            "failures": outcome.failures,
        }),
    )?;
    Ok((report, outcome))
}

fn parse_family(s: &str) -> Result<Family> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let num = |what: &str| -> Result<&str> { arg.ok_or_else(|| anyhow!("family {name} needs :{what}")) };
    Ok(match name {
        "constant" => Family::Constant,
        "perron" => Family::Perron,
        "tube_union" => Family::TubeUnion,
        "ball" => Family::Ball,
        "bandlimited_random" => Family::BandlimitedRandom { cutoff: num("CUTOFF")?.parse()? },
        "bump_sum" => Family::BumpSum { count: num("COUNT")?.parse()? },
        _ => bail!("unknown family {s:?}"),
    })
}

fn parse_scale(s: &str) -> Result<FrozenScale> {
    if s == "top" {
        Ok(FrozenScale::Top)
    } else {
        Ok(FrozenScale::Fixed(s.parse().with_context(|| format!("frozen scale {s:?}"))?))
    }
}

pub fn resolve_sweep(a: &SweepArgs) -> Result<SweepConfig> {
    let mut cfg = match (&a.config, a.preset) {
        (Some(p), _) => read_json(p)?,
        (None, Preset::Kakeya) => kakeya_audit_config(),
        (None, Preset::Smoothed) => smoothed_audit_config(),
        (None, Preset::SmoothedFirst) => SweepConfig { op: SweepOp::SmoothedFirst, ..smoothed_audit_config() },
        (None, Preset::Frozen) => frozen_audit_config(FrozenScale::Fixed(1.0)),
    };
    if let Some(d) = &a.deltas {
        cfg.deltas = d.clone();
    }
    if let Some(f) = &a.family {
        cfg.family = parse_family(f)?;
    }
    if let Some(t) = &a.t {
        match cfg.op {
            SweepOp::Frozen { .. } => cfg.op = SweepOp::Frozen { t: parse_scale(t)? },
            _ => bail!("--t applies to the frozen operator only"),
        }
    }
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { cfg.$f = v; } )* };
    }
    set!(seed, n, side, eps, p, q);
    if let Some(d) = a.dict {
        cfg.dict = d.into();
    }
    Ok(cfg)
}

fn sweep(a: &SweepArgs) -> Result<(SweepConfig, Outcome)> {
    let cfg = resolve_sweep(a)?;
    let dir = OutDir::create(&a.out)?;
    let (_, outcome) = sweep_outputs(&dir, &cfg, a.margin, a.max_slope)?;
    Ok((cfg, outcome))
}
