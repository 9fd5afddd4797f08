//! `kakeya-lab`: input generators, maximal operators and numerical audits
//! from the command line.
//!
//! Exit status: 0 when every requested check passes, 2 when a check fails
//! (the failures are listed in the output directory), 1 on usage or I/O
//! errors.

mod commands;
mod output;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use kakeya_core::verify::DictChoice;
use kakeya_core::verify::suite::OperatorKind;

#[derive(Parser, Debug)]
#[command(name = "kakeya-lab", version, about = "Kakeya-type maximal operators and their numerical audits")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "KAKEYA_LAB_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Partition of unity and reconstruction identity of the filter bank.
    Filters(FiltersArgs),
    /// Generate an input field from a JSON spec.
    Testset(TestsetArgs),
    /// Apply one maximal operator to a field file.
    Maximal(MaximalArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Operator-norm sweep over δ with a log-log fit.
    Sweep(SweepArgs),
    /// Charts and a markdown summary from sweep CSVs.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Filters(_) => "filters",
            Command::Testset(_) => "testset",
            Command::Maximal(_) => "maximal",
            Command::Verify(_) => "verify",
            Command::Sweep(_) => "sweep",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FiltersArgs {
    #[arg(long, default_value_t = 0.0625)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Grid points per axis.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Torus side length.
    #[arg(long, default_value_t = 8.0)]
    pub side: f64,
    /// Sup-error tolerance of the reconstruction identity.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Check only the identity rotation instead of one per direction.
    #[arg(long)]
    pub identity_only: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TestsetArgs {
    /// JSON spec, inline or a file path, e.g. '{"kind":"ball","radius":0.5}'.
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub side: f64,
    /// Also write the samples as CSV.
    #[arg(long)]
    pub csv: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OpArg {
    Kakeya,
    Nikodym,
    Hl,
    Nontangential,
    Tangential,
    Smoothed,
    Frozen,
}

impl From<OpArg> for OperatorKind {
    fn from(o: OpArg) -> Self {
        match o {
            OpArg::Kakeya => OperatorKind::Kakeya,
            OpArg::Nikodym => OperatorKind::Nikodym,
            OpArg::Hl => OperatorKind::Hl,
            OpArg::Nontangential => OperatorKind::Nontangential,
            OpArg::Tangential => OperatorKind::Tangential,
            OpArg::Smoothed => OperatorKind::Smoothed,
            OpArg::Frozen => OperatorKind::Frozen,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DictArg {
    Raw,
    Normalized,
    Phi,
}

impl From<DictArg> for DictChoice {
    fn from(d: DictArg) -> Self {
        match d {
            DictArg::Raw => DictChoice::Raw,
            DictArg::Normalized => DictChoice::Normalized,
            DictArg::Phi => DictChoice::Phi,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MaximalArgs {
    #[arg(long, value_enum)]
    pub op: OpArg,
    /// Field file written by `testset`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0625)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    /// Number of directions; default is the δ-separated set.
    #[arg(long)]
    pub dirs: Option<usize>,
    /// Dictionary of the smoothed operators; its first entry is the kernel
    /// of the nontangential and tangential ones.
    #[arg(long, value_enum, default_value = "phi")]
    pub dict: DictArg,
    /// Scale of the frozen operator.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Decay power of the tangential operator; default n + 1.
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Decay31,
    Decay32,
    Bernstein,
    Domination,
    Sweep,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// JSON parameter block; missing fields take their defaults.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Allowed excess of a fitted slope over its reference (sweep suite).
    #[arg(long, default_value_t = 0.2)]
    pub margin: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Perron trees, n = p = q = 2.
    Kakeya,
    /// Smoothed operator, n = p = 2, ε = 1/4.
    Smoothed,
    /// Smoothed operator against the first-bound denominator.
    SmoothedFirst,
    /// Frozen scale on band-limited inputs, ε = 1/16.
    Frozen,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    /// JSON sweep config; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "smoothed")]
    pub preset: Preset,
    /// Comma-separated widths.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    /// constant, perron, tube_union, ball, bandlimited_random:CUTOFF or
    /// bump_sum:COUNT.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub side: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_enum)]
    pub dict: Option<DictArg>,
    /// Frozen scale: a number or `top` for δ^{-ε}.
    #[arg(long)]
    pub t: Option<String>,
    /// Allowed excess of the fitted slope over its reference.
    #[arg(long, default_value_t = 0.2)]
    pub margin: f64,
    /// Reference slope when the operator has none (Kakeya, Nikodym).
    #[arg(long)]
    pub max_slope: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReportArgs {
    /// Sweep CSV files.
    #[arg(required = true)]
    pub csv: Vec<PathBuf>,
    /// Slope of the reference line; default is read from a `summary.json`
    /// next to each CSV.
    #[arg(long)]
    pub bound_slope: Option<f64>,
    /// Allowed excess drawn as a second reference line; default is read
    /// from `summary.json`, else 0.2.
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
    let code = match commands::run(&cli.command, cli.threads) {
        Ok(outcome) if outcome.passed => 0,
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("check failed: {f}");
            }
            2
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}
