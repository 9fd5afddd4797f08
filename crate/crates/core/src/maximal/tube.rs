use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Field, Grid};

/// A `1 × δ^{n−1}` tube: unit length along `direction`, width `δ` across.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    pub direction: [f64; 3],
    pub width: f64,
    pub center: [f64; 3],
}

impl TubeSpec {
    pub fn new(direction: [f64; 3], width: f64, center: [f64; 3]) -> Result<Self> {
        let len = crate::grid::norm(&direction);
        if (len - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("tube direction has length {len}")));
        }
        if !(width > 0.0 && width < 1.0) {
            return Err(invalid(format!("tube width must lie in (0, 1), got {width}")));
        }
        Ok(TubeSpec { direction, width, center })
    }
}

fn ramp(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Signed coordinate along `w` and distance from the axis. The 2D forms are
/// arranged so a quarter turn of both `x` and `w` reproduces the same
/// floating-point operations.
#[inline]
pub(crate) fn along_across(dim: usize, x: &[f64; 3], w: &[f64; 3]) -> (f64, f64) {
    if dim == 2 {
        let along = x[0] * w[0] + x[1] * w[1];
        let across = (x[0] * w[1] - x[1] * w[0]).abs();
        (along, across)
    } else {
        let along = x[0] * w[0] + x[1] * w[1] + x[2] * w[2];
        let c = [x[1] * w[2] - x[2] * w[1], x[2] * w[0] - x[0] * w[2], x[0] * w[1] - x[1] * w[0]];
        (along, (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt())
    }
}

/// Unnormalized feathered tube profile at offset `x` from the center.
fn profile(dim: usize, x: &[f64; 3], w: &[f64; 3], width: f64, h: f64) -> f64 {
    let (along, across) = along_across(dim, x, w);
    let a = ramp((0.5 - along.abs()) / h + 0.5);
    if a == 0.0 {
        return 0.0;
    }
    a * ramp((0.5 * width - across) / h + 0.5)
}

/// Image offsets `jL` that can bring some sample within reach of the tube.
fn image_offsets(grid: &Grid, reach: f64) -> Vec<[f64; 3]> {
    let l = grid.side();
    let j = ((reach + 0.5 * l) / l).ceil() as i64;
    let mut out = Vec::new();
    let range: Vec<i64> = (-j..=j).collect();
    let zs: &[i64] = if grid.dim() == 3 { &range } else { &[0] };
    for &a in &range {
        for &b in &range {
            for &c in zs {
                out.push([a as f64 * l, b as f64 * l, c as f64 * l]);
            }
        }
    }
    out
}

/// Normalized averaging kernel of the centered tube with direction `w` and
/// width `delta`: one-cell linear feathering at the boundary, periodic
/// images summed, total discrete mass exactly 1.
pub fn tube_indicator(w: &[f64; 3], delta: f64, grid: &Grid) -> Result<Field> {
    let raw = tube_profile(w, delta, grid)?;
    let mass = raw.integral();
    Ok(raw.scale(1.0 / mass))
}

/// [`tube_indicator`] before normalization (values in `[0, 1]` away from
/// self-overlapping images).
pub fn tube_profile(w: &[f64; 3], delta: f64, grid: &Grid) -> Result<Field> {
    let h = grid.spacing();
    if delta < 2.0 * h {
        return Err(Error::Unresolved(format!("tube width {delta} below two cells (h = {h})")));
    }
    let dim = grid.dim();
    let reach = 0.5 + 0.5 * delta + 2.0 * h;
    let images = image_offsets(grid, reach);
    let field = Field::from_fn(*grid, |x| {
        // image contributions are summed in sorted order so the value does
        // not depend on how the images were enumerated
        let mut parts: Vec<f64> = Vec::new();
        for off in &images {
            let y = [x[0] + off[0], x[1] + off[1], x[2] + off[2]];
            if y[..dim].iter().any(|c| c.abs() > reach) {
                continue;
            }
            let v = profile(dim, &y, w, delta, h);
            if v > 0.0 {
                parts.push(v);
            }
        }
        parts.sort_by(f64::total_cmp);
        parts.iter().sum()
    });
    Ok(field)
}

/// Indicator of the analytic tube `|⟨s,ω⟩| ≤ 1/2`, `dist(s, ℝω) ≤ δ/2`, as
/// the list of cell offsets it contains (the Nikodym containment core).
pub fn tube_core_offsets(w: &[f64; 3], delta: f64, grid: &Grid) -> Vec<[i64; 3]> {
    let h = grid.spacing();
    let dim = grid.dim();
    let r = (0.5 / h).ceil() as i64 + 1;
    let mut out = Vec::new();
    let span: Vec<i64> = (-r..=r).collect();
    let zs: &[i64] = if dim == 3 { &span } else { &[0] };
    for &a in &span {
        for &b in &span {
            for &c in zs {
                let s = [a as f64 * h, b as f64 * h, c as f64 * h];
                let (along, across) = along_across(dim, &s, w);
                if along.abs() <= 0.5 && across <= 0.5 * delta {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_tube_has_unit_mass_and_averages_constants() {
        let g = Grid::new(2, 256, 1.0).unwrap();
        let t = tube_indicator(&[1.0, 0.0, 0.0], 1.0 / 8.0, &g).unwrap();
        assert!((t.integral() - 1.0).abs() < 1e-12);
        let c = Field::constant(g, 1.0).convolve(&t).unwrap();
        assert!(c.sup_distance(&Field::constant(g, 1.0)).unwrap() < 1e-12);
    }

    #[test]
    fn diagonal_tube_cell_count() {
        let g = Grid::new(2, 256, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let t = tube_profile(&[s, s, 0.0], 1.0 / 8.0, &g).unwrap();
        let count = t.values().iter().filter(|&&v| v > 0.0).count() as f64;
        let expect = 256.0 * 256.0 / 8.0;
        assert!((count / expect - 1.0).abs() < 0.1, "{count} vs {expect}");
    }

    #[test]
    fn narrow_tubes_are_rejected() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        assert!(matches!(tube_indicator(&[1.0, 0.0, 0.0], 0.05, &g), Err(Error::Unresolved(_))));
    }

    #[test]
    fn quarter_turn_is_bitwise() {
        let g = Grid::new(2, 64, 1.0).unwrap();
        let w = [0.8, 0.6, 0.0];
        let t = tube_profile(&w, 0.125, &g).unwrap();
        let r = tube_profile(&[-0.6, 0.8, 0.0], 0.125, &g).unwrap();
        assert_eq!(t.signed_permutation(&[1, 0], &[-1, 1]), r);
        let neg = tube_profile(&[-0.8, -0.6, 0.0], 0.125, &g).unwrap();
        assert_eq!(t, neg);
    }

    #[test]
    fn core_is_symmetric() {
        let g = Grid::new(2, 64, 1.0).unwrap();
        let core = tube_core_offsets(&[0.6, 0.8, 0.0], 0.125, &g);
        for o in &core {
            assert!(core.contains(&[-o[0], -o[1], -o[2]]));
        }
    }
}
