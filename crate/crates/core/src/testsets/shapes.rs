use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::rng::Rng;
use crate::error::{invalid, Error, Result};
use crate::grid::{Field, Grid, SpectralField};
use crate::maximal::{tube_profile, DirectionSet};

/// Per-axis torus-minimal difference `x − c`.
fn torus_diff(grid: &Grid, x: &[f64; 3], c: &[f64; 3]) -> [f64; 3] {
    let l = grid.side();
    let mut d = [0.0; 3];
    for a in 0..grid.dim() {
        let v = x[a] - c[a];
        d[a] = v - l * (v / l).round();
    }
    d
}

/// Feathered ball indicator: `clamp((r − |x − c|)/h + ½, 0, 1)`.
pub fn ball_indicator(radius: f64, center: [f64; 3], grid: &Grid) -> Result<Field> {
    let h = grid.spacing();
    if radius < 2.0 * h {
        return Err(Error::Unresolved(format!("ball radius {radius} below two cells (h = {h})")));
    }
    if radius > 0.5 * grid.side() {
        return Err(invalid(format!("ball radius {radius} exceeds half the box")));
    }
    Ok(Field::from_fn(*grid, |x| {
        let d = torus_diff(grid, x, &center);
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        ((radius - r) / h + 0.5).clamp(0.0, 1.0)
    }))
}

/// Feathered indicator of the centered `1 × δ` tube in direction `w`.
pub fn tube_set(w: &[f64; 3], delta: f64, grid: &Grid) -> Result<Field> {
    Ok(tube_profile(w, delta, grid)?.map(|v| v.min(1.0)))
}

/// Directions of the tube union: `count` equispaced angles in `[0, π)` with
/// a seeded offset (2D), or a seeded Fibonacci net (3D).
pub fn tube_union_directions(dim: usize, count: usize, seed: u64) -> Result<Vec<[f64; 3]>> {
    if count == 0 {
        return Err(invalid("tube union needs at least one tube"));
    }
    let mut rng = Rng::new(seed);
    match dim {
        2 => {
            let offset = rng.uniform() * PI / count as f64;
            Ok((0..count)
                .map(|j| {
                    let a = offset + PI * j as f64 / count as f64;
                    [a.cos(), a.sin(), 0.0]
                })
                .collect())
        }
        3 => {
            // the upper hemisphere of a 2·count net, spun about the axis
            let spin = rng.uniform() * 2.0 * PI;
            let (s, c) = spin.sin_cos();
            let net = DirectionSet::fibonacci((2 * count).max(2))?;
            Ok(net
                .directions()
                .iter()
                .filter(|w| w[2] > 0.0)
                .take(count)
                .map(|w| [c * w[0] - s * w[1], s * w[0] + c * w[1], w[2]])
                .collect())
        }
        _ => Err(invalid(format!("dimension {dim}"))),
    }
}

/// Pointwise max of `count` tubes through the center.
pub fn rotated_tube_union(count: usize, delta: f64, grid: &Grid, seed: u64) -> Result<Field> {
    let dirs = tube_union_directions(grid.dim(), count, seed)?;
    let mut out = Field::zeros(*grid);
    for w in &dirs {
        out.max_assign(&tube_set(w, delta, grid)?);
    }
    Ok(out)
}

/// Real field with random Gaussian coefficients on the integer frequencies
/// `|m/L| ≤ cutoff` (Hermitian pairs, lexicographic order), unit L² norm.
pub fn bandlimited_random(seed: u64, cutoff: f64, grid: &Grid) -> Result<Field> {
    if !(cutoff > 0.0) || cutoff > grid.nyquist() {
        return Err(Error::BandLimit(format!("cutoff {cutoff} outside (0, {}]", grid.nyquist())));
    }
    let l = grid.side();
    let dim = grid.dim();
    let half = grid.n() as i64 / 2;
    let big = (cutoff * l).floor() as i64;
    let mut rng = Rng::new(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let range: Vec<i64> = (-big..=big).collect();
    let zs: &[i64] = if dim == 3 { &range } else { &[0] };
    let mut any = false;
    for &a in &range {
        for &b in &range {
            for &c in zs {
                let m = [a, b, c];
                // only one representative of each ±m pair; Nyquist modes dropped
                let first = m[..dim].iter().copied().find(|&v| v != 0);
                if first.is_some_and(|v| v < 0) || m[..dim].iter().any(|v| v.abs() >= half) {
                    continue;
                }
                let r2: i64 = m.iter().map(|v| v * v).sum();
                if (r2 as f64).sqrt() / l > cutoff {
                    continue;
                }
                let z = if first.is_none() {
                    Complex64::new(rng.normal(), 0.0)
                } else {
                    Complex64::new(rng.normal(), rng.normal())
                };
                let idx: Vec<usize> = (0..dim).map(|k| grid.wrap(m[k])).collect();
                let neg: Vec<usize> = (0..dim).map(|k| grid.wrap(-m[k])).collect();
                coeffs[grid.ravel(&idx)] = z;
                coeffs[grid.ravel(&neg)] = z.conj();
                any = true;
            }
        }
    }
    if !any {
        return Err(Error::BandLimit(format!("no frequencies below cutoff {cutoff}")));
    }
    let f = SpectralField::new(*grid, coeffs)?.inverse_transform();
    let norm = f.lp_norm(2.0)?;
    Ok(f.scale(1.0 / norm))
}

/// One mass-1 Gaussian bump `σ⁻ⁿe^{−π|x−c|²/σ²}` scaled by `amplitude`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: [f64; 3],
    pub sigma: f64,
    pub amplitude: f64,
}

/// Seeded centers, widths `σ ∈ [4h, L/8]` and amplitudes in `[½, 3/2]`.
pub fn draw_bumps(seed: u64, count: usize, grid: &Grid) -> Result<Vec<Bump>> {
    let h = grid.spacing();
    let l = grid.side();
    if 4.0 * h > l / 8.0 {
        return Err(Error::Unresolved("grid too coarse for resolved bumps".into()));
    }
    let mut rng = Rng::new(seed);
    Ok((0..count)
        .map(|_| {
            let mut center = [0.0; 3];
            for v in center.iter_mut().take(grid.dim()) {
                *v = rng.range(-0.5 * l, 0.5 * l);
            }
            let sigma = rng.range(4.0 * h, l / 8.0);
            let amplitude = rng.range(0.5, 1.5);
            Bump { center, sigma, amplitude }
        })
        .collect())
}

pub fn bump_sum(seed: u64, count: usize, grid: &Grid) -> Result<Field> {
    let bumps = draw_bumps(seed, count, grid)?;
    let dim = grid.dim() as i32;
    Ok(Field::from_fn(*grid, |x| {
        bumps
            .iter()
            .map(|b| {
                let d = torus_diff(grid, x, &b.center);
                let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                b.amplitude * b.sigma.powi(-dim) * (-PI * r2 / (b.sigma * b.sigma)).exp()
            })
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_examples() {
        let g = Grid::new(2, 256, 1.0).unwrap();
        let f = ball_indicator(0.25, [0.0; 3], &g).unwrap();
        let mass = f.lp_norm(1.0).unwrap();
        assert!((mass / (PI / 16.0) - 1.0).abs() < 0.05, "{mass}");
        assert!(f.values().iter().all(|v| (0.0..=1.0).contains(v)));
        let mirrored = f.signed_permutation(&[0, 1], &[-1, -1]);
        assert_eq!(f, mirrored);
        assert!(ball_indicator(1.0 / 512.0, [0.0; 3], &g).is_err());
    }

    #[test]
    fn tube_union_examples() {
        let g = Grid::new(2, 256, 2.0).unwrap();
        let delta = 1.0 / 32.0;
        let one = rotated_tube_union(1, delta, &g, 5).unwrap();
        let w = tube_union_directions(2, 1, 5).unwrap()[0];
        assert_eq!(one, tube_set(&w, delta, &g).unwrap());
        for count in [2, 5, 9] {
            let f = rotated_tube_union(count, delta, &g, 1).unwrap();
            assert!(f.values().iter().all(|v| (0.0..=1.0).contains(v)));
            let single = tube_set(&w, delta, &g).unwrap().integral();
            assert!(f.integral() <= count as f64 * single * (1.0 + 1e-12));
        }
        let k = (PI / delta).ceil() as usize;
        let f = rotated_tube_union(k, delta, &g, 0).unwrap();
        assert!(f.integral() <= 0.7 * k as f64 * delta, "{}", f.integral());
    }

    #[test]
    fn bandlimited_examples() {
        let g = Grid::new(2, 64, 8.0).unwrap();
        let cutoff = 1.0;
        let f = bandlimited_random(7, cutoff, &g).unwrap();
        assert!((f.lp_norm(2.0).unwrap() - 1.0).abs() < 1e-10);
        let spec = f.forward_transform();
        let peak = spec.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
        for (i, c) in spec.coeffs().iter().enumerate() {
            if crate::grid::norm(&g.frequency(i)) > cutoff {
                assert!(c.norm() <= 1e-13 * peak, "{i}");
            }
        }
        assert_eq!(f, bandlimited_random(7, cutoff, &g).unwrap());
        assert_ne!(f, bandlimited_random(8, cutoff, &g).unwrap());
        assert!(bandlimited_random(1, 5.0, &g).is_err());
        let g3 = Grid::new(3, 16, 4.0).unwrap();
        let f3 = bandlimited_random(2, 0.6, &g3).unwrap();
        assert!((f3.lp_norm(2.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bump_sum_examples() {
        let g = Grid::new(2, 128, 4.0).unwrap();
        assert!(bump_sum(3, 0, &g).unwrap().values().iter().all(|v| *v == 0.0));
        let f = bump_sum(3, 12, &g).unwrap();
        assert!(f.values().iter().all(|v| *v >= 0.0));
        let amps: f64 = draw_bumps(3, 12, &g).unwrap().iter().map(|b| b.amplitude).sum();
        assert!((f.lp_norm(1.0).unwrap() - amps).abs() < 1e-6 * amps);
    }
}
