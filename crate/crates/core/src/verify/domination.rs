use rayon::prelude::*;
use serde::Serialize;

use super::bernstein::node_index;
use super::decay::{eta1_weight_scale, eta_weighted_integral};
use crate::error::{invalid, Result};
use crate::filters::{psi, EtaKind, FilterBank, TestDictionary};
use crate::grid::{half_frequencies, norm, Field, Grid, HalfSpectrum};
use crate::maximal::shiftmax::MaxPyramid;
use crate::maximal::{RotationSet, SmoothedKakeya};

/// Which chain to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "chain", rename_all = "snake_case")]
pub enum Chain {
    /// Supremum over the scale grid, weight `(1 + |u|/(σₖt))^{−N}` with the
    /// same scale as the smoothing.
    Sup { power: f64 },
    /// Single scale `t`, weight exponent `n/r`, weight scales
    /// `δ^{−(k+3)ε}t` (η₁) and `2^{−(k+1)}t` (η₀).
    Frozen { t: f64, r: f64 },
}

/// One term of the chain for one dictionary entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainTerm {
    pub entry: String,
    pub kind: EtaKind,
    pub k: usize,
    /// Smoothing scale at `t = 1`.
    pub phi_scale: f64,
    /// Weight scale at `t = 1`.
    pub weight_scale: f64,
    /// `∫(1 + |v|/weight_scale)^power |η(v)| dv`.
    pub integral: f64,
}

/// The chain terms of every dictionary entry, with weighted integrals
/// evaluated through the `η` profiles on `profile_grid`. Terms whose
/// symbol vanishes on the profile grid are dropped.
pub fn chain_terms(
    bank: &FilterBank,
    dict: &TestDictionary,
    chain: Chain,
    profile_grid: &Grid,
) -> Result<Vec<ChainTerm>> {
    let (delta, eps) = (bank.delta(), bank.eps());
    let power = match chain {
        Chain::Sup { power } => power,
        Chain::Frozen { r, .. } => bank.dim() as f64 / r,
    };
    let mut specs = Vec::new();
    for k in 2..=super::decay::profile_k_max(bank, profile_grid) {
        let sigma = eta1_weight_scale(bank, k);
        let weight = match chain {
            Chain::Sup { .. } => sigma,
            Chain::Frozen { .. } => delta.powf(-(k as f64 + 3.0) * eps),
        };
        specs.push((EtaKind::One, k, sigma, weight));
    }
    for k in 0..=bank.s() {
        let sigma = 2f64.powi(-(k as i32 + 1)) * delta;
        let weight = match chain {
            Chain::Sup { .. } => sigma,
            Chain::Frozen { .. } => 2f64.powi(-(k as i32 + 1)),
        };
        specs.push((EtaKind::Zero, k, sigma, weight));
    }
    let mut out = Vec::new();
    for ups in dict.entries() {
        for &(kind, k, phi_scale, weight_scale) in &specs {
            let (w, truncated) = eta_weighted_integral(bank, kind, ups, k, weight_scale, power, profile_grid)?;
            if truncated || w.value == 0.0 {
                continue;
            }
            out.push(ChainTerm { entry: ups.name().to_string(), kind, k, phi_scale, weight_scale, integral: w.value });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub point: [f64; 3],
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationReport {
    pub points: usize,
    pub tolerance: f64,
    pub violations: Vec<Violation>,
    /// `min (RHS − LHS)` over the sample points.
    pub min_slack: f64,
    /// `min RHS/LHS` over points with `LHS > 0`.
    pub min_ratio: f64,
}

impl DominationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `f ∗ φ_τ` for all `τ`, from one spectrum.
fn smoothed(spec: &HalfSpectrum, freqs: &[[f64; 3]], tau: f64) -> Field {
    let sym: Vec<f64> = freqs.iter().map(|xi| psi(tau * norm(xi))).collect();
    spec.apply_real(&sym)
}

/// `max_s |g(x − s)|(1 + |s|/scale)^{−power}` at the sampled cells.
fn shift_max(g: &Field, cells: &[usize], scale: f64, power: f64) -> Vec<f64> {
    let pyr = MaxPyramid::new(g);
    cells.iter().map(|&i| pyr.query(i, scale, power)).collect()
}

/// Pointwise check `LHS(x) ≤ RHS(x) + tol·‖f‖_∞` of the chain that bounds
/// the smoothed operator by weighted shift maxima of `f ∗ φ`, at `points`
/// (grid nodes, physical coordinates), for every input.
#[allow(clippy::too_many_arguments)]
pub fn domination_check(
    fs: &[Field],
    bank: &FilterBank,
    dict: &TestDictionary,
    rots: &RotationSet,
    t_grid: &[f64],
    chain: Chain,
    terms: &[ChainTerm],
    points: &[[f64; 3]],
) -> Result<Vec<DominationReport>> {
    const TOL: f64 = 1e-8;
    let grid = *fs.first().ok_or_else(|| invalid("no input fields"))?.grid();
    if points.is_empty() {
        return Err(invalid("no sample points"));
    }
    if terms.is_empty() {
        return Err(invalid("empty chain"));
    }
    let op = SmoothedKakeya::new(bank, dict, rots)?;
    let (lhs, scales): (Vec<Field>, Vec<f64>) = match chain {
        Chain::Sup { power } => {
            if !(power > 0.0) {
                return Err(invalid(format!("weight power must be positive, got {power}")));
            }
            (op.apply_many(fs, t_grid)?, t_grid.to_vec())
        }
        Chain::Frozen { t, r } => {
            if !(r > 0.0) {
                return Err(invalid(format!("r must be positive, got {r}")));
            }
            (op.frozen_many(fs, t)?, vec![t])
        }
    };
    let cells: Vec<usize> = points.iter().map(|p| node_index(&grid, p)).collect();
    let freqs = half_frequencies(&grid);
    let xi_max = freqs.iter().map(norm).fold(0.0, f64::max);
    let entries: Vec<&str> = dict.entries().iter().map(|u| u.name()).collect();

    fs.par_iter()
        .zip(lhs.par_iter())
        .map(|(f, lhs)| {
            let spec = HalfSpectrum::of(f);
            let sup = f.sup_norm();
            let rhs: Vec<f64> = match chain {
                Chain::Sup { power } => {
                    let total = entries
                        .iter()
                        .map(|e| terms.iter().filter(|c| c.entry == *e).map(|c| c.integral).sum::<f64>())
                        .fold(0.0, f64::max);
                    let mut taus: Vec<f64> = terms
                        .iter()
                        .flat_map(|c| scales.iter().map(move |t| c.phi_scale * t))
                        .collect();
                    taus.sort_by(f64::total_cmp);
                    taus.dedup();
                    // below this scale φ̂(τξ) = 1 on the grid and W grows with τ
                    let flat = taus.iter().copied().filter(|&tau| tau * xi_max <= 1.0).fold(None, |_, t| Some(t));
                    let mut m = vec![0.0f64; cells.len()];
                    for &tau in taus.iter().filter(|&&tau| tau * xi_max > 1.0 || Some(tau) == flat) {
                        let g = if tau * xi_max <= 1.0 { f.clone() } else { smoothed(&spec, &freqs, tau) };
                        for (a, b) in m.iter_mut().zip(shift_max(&g, &cells, tau, power)) {
                            *a = a.max(b);
                        }
                    }
                    m.iter().map(|v| total * v).collect()
                }
                Chain::Frozen { t, r } => {
                    let power = grid.dim() as f64 / r;
                    let mut per_entry = vec![vec![0.0f64; cells.len()]; entries.len()];
                    for c in terms {
                        let e = entries.iter().position(|e| *e == c.entry).expect("term of a dictionary entry");
                        let tau = c.phi_scale * t;
                        let g = if tau * xi_max <= 1.0 { f.clone() } else { smoothed(&spec, &freqs, tau) };
                        for (a, b) in per_entry[e].iter_mut().zip(shift_max(&g, &cells, c.weight_scale * t, power)) {
                            *a += c.integral * b;
                        }
                    }
                    (0..cells.len()).map(|i| per_entry.iter().map(|v| v[i]).fold(0.0, f64::max)).collect()
                }
            };
            let mut report = DominationReport {
                points: cells.len(),
                tolerance: TOL * sup,
                violations: Vec::new(),
                min_slack: f64::INFINITY,
                min_ratio: f64::INFINITY,
            };
            for ((p, &i), &r) in points.iter().zip(&cells).zip(&rhs) {
                let l = lhs.values()[i];
                report.min_slack = report.min_slack.min(r - l);
                if l > 0.0 {
                    report.min_ratio = report.min_ratio.min(r / l);
                }
                if l > r + report.tolerance {
                    report.violations.push(Violation { point: *p, lhs: l, rhs: r });
                }
            }
            Ok(report)
        })
        .collect()
}
