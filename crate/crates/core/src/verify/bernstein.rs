use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{half_frequencies, norm, Field, Grid, HalfSpectrum};
use crate::maximal::hl_maximal;
use crate::maximal::shiftmax::MaxPyramid;

/// `count` points of the Kronecker sequence with the generalized golden
/// ratio, snapped to cell centers of `grid`, as physical coordinates.
pub fn quasi_random_points(grid: &Grid, count: usize) -> Vec<[f64; 3]> {
    let dim = grid.dim();
    // root of x^{d+1} = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect();
    let (n, h) = (grid.n() as f64, grid.spacing());
    (0..count)
        .map(|i| {
            let mut x = [0.0; 3];
            for a in 0..dim {
                let u = (0.5 + alpha[a] * (i + 1) as f64).fract();
                x[a] = ((u * n).floor() - n / 2.0) * h;
            }
            x
        })
        .collect()
}

/// Cell index of the grid node at `x` (which must be a node, up to rounding).
pub fn node_index(grid: &Grid, x: &[f64; 3]) -> usize {
    let h = grid.spacing();
    let mut idx = [0usize; 3];
    for a in 0..grid.dim() {
        idx[a] = grid.wrap((x[a] / h).round() as i64);
    }
    grid.ravel(&idx)
}

/// Largest `|coefficient|` beyond `radius`, relative to the largest overall.
pub fn spectral_leak(u: &Field, radius: f64) -> f64 {
    let spec = HalfSpectrum::of(u);
    let freqs = half_frequencies(u.grid());
    let (mut inside, mut outside) = (0.0f64, 0.0f64);
    for (c, xi) in spec.bins().iter().zip(&freqs) {
        if norm(xi) > radius {
            outside = outside.max(c.norm());
        } else {
            inside = inside.max(c.norm());
        }
    }
    if outside == 0.0 {
        0.0
    } else {
        outside / inside.max(outside)
    }
}

/// Relative size below which spectral content beyond the band counts as
/// rounding.
pub const BAND_LEAK_LIMIT: f64 = 1e-10;

/// Rejects `u` whose spectrum is not confined to `|ξ| ≤ radius`.
pub fn require_band_limit(u: &Field, radius: f64) -> Result<()> {
    let leak = spectral_leak(u, radius);
    if leak > BAND_LEAK_LIMIT {
        return Err(Error::BandLimit(format!(
            "spectrum beyond |xi| = {radius} carries relative weight {leak:.3e}"
        )));
    }
    Ok(())
}

/// `|∇u|` by spectral differentiation.
pub fn gradient_magnitude(u: &Field) -> Field {
    let grid = *u.grid();
    let spec = HalfSpectrum::of(u);
    let freqs = half_frequencies(&grid);
    let nyq = grid.nyquist();
    let mut sq = Field::zeros(grid);
    for a in 0..grid.dim() {
        let sym: Vec<Complex64> = freqs
            .iter()
            .map(|xi| {
                if xi[a].abs() >= nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, 2.0 * std::f64::consts::PI * xi[a])
                }
            })
            .collect();
        let d = spec.apply_complex(&sym);
        for (s, v) in sq.values_mut().iter_mut().zip(d.values()) {
            *s += v * v;
        }
    }
    sq.map(f64::sqrt)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BernsteinReport {
    pub t: f64,
    pub r: f64,
    pub points: usize,
    /// `max_x sup_z |u(x−z)|(1+t|z|)^{−n/r} / (M(|u|^r)(x))^{1/r}`.
    pub value_ratio: f64,
    /// The same with `t⁻¹|∇u|` in place of `|u|`.
    pub gradient_ratio: f64,
}

/// Both forms of the Bernstein-type bound for `u` with spectrum in
/// `|ξ| ≤ c₀t`, evaluated at `points` (physical coordinates of grid nodes).
pub fn bernstein_check(u: &Field, c0: f64, t: f64, r: f64, points: &[[f64; 3]]) -> Result<BernsteinReport> {
    if !(t > 0.0 && t.is_finite() && c0 > 0.0) {
        return Err(invalid(format!("need t > 0 and c0 > 0, got t = {t}, c0 = {c0}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("r must be positive, got {r}")));
    }
    if points.is_empty() {
        return Err(invalid("no sample points"));
    }
    require_band_limit(u, c0 * t)?;
    let grid = *u.grid();
    let power = grid.dim() as f64 / r;
    let rhs = hl_maximal(&u.map(|v| v.abs().powf(r))).map(|v| v.powf(1.0 / r));
    let value = MaxPyramid::new(u);
    let grad = MaxPyramid::new(&gradient_magnitude(u).scale(1.0 / t));
    let (mut value_ratio, mut gradient_ratio) = (0.0f64, 0.0f64);
    for x in points {
        let i = node_index(&grid, x);
        let den = rhs.values()[i];
        let lv = value.query(i, 1.0 / t, power);
        let lg = grad.query(i, 1.0 / t, power);
        if den > 0.0 {
            value_ratio = value_ratio.max(lv / den);
            gradient_ratio = gradient_ratio.max(lg / den);
        } else if lv > 0.0 || lg > 0.0 {
            value_ratio = f64::INFINITY;
        }
    }
    Ok(BernsteinReport { t, r, points: points.len(), value_ratio, gradient_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testsets::bandlimited_random;

    #[test]
    fn constants_give_ratio_one_and_zero_gradient() {
        let g = Grid::new(2, 64, 8.0).unwrap();
        let u = Field::constant(g, 2.0);
        let pts = quasi_random_points(&g, 100);
        let rep = bernstein_check(&u, 1.0, 1.0, 2.0, &pts).unwrap();
        assert!((rep.value_ratio - 1.0).abs() < 1e-12);
        assert!(rep.gradient_ratio < 1e-12);
    }

    #[test]
    fn cosine_ratio_is_refinement_stable() {
        let g = Grid::new(2, 64, 8.0).unwrap();
        let cos = |g: Grid| Field::from_fn(g, |x| (2.0 * std::f64::consts::PI * x[0]).cos());
        let pts = quasi_random_points(&g, 300);
        let a = bernstein_check(&cos(g), 1.0, 1.0, 2.0, &pts).unwrap();
        let b = bernstein_check(&cos(g.refined()), 1.0, 1.0, 2.0, &pts).unwrap();
        assert!(a.value_ratio.is_finite() && a.gradient_ratio.is_finite());
        assert!((a.value_ratio / b.value_ratio - 1.0).abs() < 0.1, "{a:?} {b:?}");
        assert!((a.gradient_ratio / b.gradient_ratio - 1.0).abs() < 0.1, "{a:?} {b:?}");
    }

    #[test]
    fn gradient_of_plane_wave() {
        let g = Grid::new(2, 64, 4.0).unwrap();
        let u = Field::from_fn(g, |x| (2.0 * std::f64::consts::PI * (x[0] + 0.5 * x[1])).sin());
        let grad = gradient_magnitude(&u);
        let k = 2.0 * std::f64::consts::PI;
        for (gv, x) in grad.values().iter().zip(g.coords()) {
            let expect = k * (1.25f64).sqrt() * (k * (x[0] + 0.5 * x[1])).cos().abs();
            assert!((gv - expect).abs() < 1e-10, "{gv} vs {expect}");
        }
    }

    #[test]
    fn band_violations_are_rejected() {
        let g = Grid::new(2, 64, 8.0).unwrap();
        let u = bandlimited_random(4, 2.0, &g).unwrap();
        let pts = quasi_random_points(&g, 10);
        assert!(matches!(bernstein_check(&u, 1.0, 1.0, 1.0, &pts), Err(Error::BandLimit(_))));
        assert!(bernstein_check(&u, 1.0, 2.0, 1.0, &pts).is_ok());
    }

    #[test]
    fn points_are_nodes_and_nest_under_refinement() {
        let g = Grid::new(2, 32, 2.0).unwrap();
        let pts = quasi_random_points(&g, 50);
        let f = g.refined();
        for p in &pts {
            let i = node_index(&g, p);
            let c = g.coord(i);
            let j = node_index(&f, p);
            let d = f.coord(j);
            for a in 0..2 {
                assert!((torus(c[a] - p[a], 2.0)).abs() < 1e-12 && (torus(d[a] - p[a], 2.0)).abs() < 1e-12);
            }
        }
    }

    fn torus(v: f64, l: f64) -> f64 {
        v - l * (v / l).round()
    }
}
