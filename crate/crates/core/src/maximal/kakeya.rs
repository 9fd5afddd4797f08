use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::dilation::dilate;
use super::directions::DirectionSet;
use super::tube::{tube_core_offsets, tube_indicator};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, HalfSpectrum};

fn check_inputs(fs: &[Field], dirs: &DirectionSet) -> Result<Grid> {
    let grid = *fs.first().ok_or_else(|| crate::error::invalid("no input fields"))?.grid();
    if fs.iter().any(|f| f.grid() != &grid) {
        return Err(Error::ShapeMismatch("inputs live on different grids".into()));
    }
    if dirs.dim() != grid.dim() {
        return Err(Error::ShapeMismatch(format!(
            "{}D directions for a {}D grid",
            dirs.dim(),
            grid.dim()
        )));
    }
    Ok(grid)
}

/// Spectrum of the mass-1 tube kernel for direction `w`, scaled for use with
/// [`HalfSpectrum::apply_complex`].
fn tube_symbol(w: &[f64; 3], delta: f64, grid: &Grid) -> Result<Vec<Complex64>> {
    let tube = tube_indicator(w, delta, grid)?;
    let h = grid.cell_volume();
    Ok(HalfSpectrum::of(&tube).bins().iter().map(|c| c * h).collect())
}

/// Per direction of every input, the largest tube average of `|f|` over all
/// grid translates.
pub fn kakeya_maximal_many(fs: &[Field], delta: f64, dirs: &DirectionSet) -> Result<Vec<Vec<f64>>> {
    let grid = check_inputs(fs, dirs)?;
    let spectra: Vec<HalfSpectrum> = fs.iter().map(|f| HalfSpectrum::of(&f.abs())).collect();
    let anti = dirs.antipode_of_earlier();
    let unique: Vec<usize> = (0..dirs.len()).filter(|&i| anti[i].is_none()).collect();
    let computed: Vec<Vec<f64>> = unique
        .par_iter()
        .map(|&i| -> Result<Vec<f64>> {
            let sym = tube_symbol(&dirs.directions()[i], delta, &grid)?;
            Ok(spectra.iter().map(|s| s.apply_complex(&sym).max()).collect())
        })
        .collect::<Result<_>>()?;
    let mut per_dir: Vec<Option<Vec<f64>>> = vec![None; dirs.len()];
    for (&i, v) in unique.iter().zip(computed) {
        per_dir[i] = Some(v);
    }
    for i in 0..dirs.len() {
        if let Some(j) = anti[i] {
            per_dir[i] = per_dir[j].clone();
        }
    }
    let per_dir: Vec<Vec<f64>> = per_dir.into_iter().map(|v| v.expect("every direction filled")).collect();
    Ok((0..fs.len()).map(|k| per_dir.iter().map(|v| v[k]).collect()).collect())
}

/// `f_δ*(ω)` on every direction of `dirs`.
pub fn kakeya_maximal(f: &Field, delta: f64, dirs: &DirectionSet) -> Result<Vec<f64>> {
    Ok(kakeya_maximal_many(std::slice::from_ref(f), delta, dirs)?.remove(0))
}

/// Tube averages `|f| ∗ tube_ω` for one direction.
pub fn tube_average(f: &Field, w: &[f64; 3], delta: f64) -> Result<Field> {
    let sym = tube_symbol(w, delta, f.grid())?;
    Ok(HalfSpectrum::of(&f.abs()).apply_complex(&sym))
}

/// `f_δ**(x)`: for each direction the tube averages are dilated by the
/// tube core (a tube centered at `a` contains `x` iff `x − a` lies in the
/// core), then maximized over directions.
pub fn nikodym_maximal_many(fs: &[Field], delta: f64, dirs: &DirectionSet) -> Result<Vec<Field>> {
    let grid = check_inputs(fs, dirs)?;
    let spectra: Vec<HalfSpectrum> = fs.iter().map(|f| HalfSpectrum::of(&f.abs())).collect();
    let anti = dirs.antipode_of_earlier();
    let unique: Vec<usize> = (0..dirs.len()).filter(|&i| anti[i].is_none()).collect();
    let init = || vec![Field::zeros(grid); fs.len()];
    let merged = unique
        .par_iter()
        .map(|&i| -> Result<Vec<Field>> {
            let w = dirs.directions()[i];
            let sym = tube_symbol(&w, delta, &grid)?;
            let core = tube_core_offsets(&w, delta, &grid);
            Ok(spectra.iter().map(|s| dilate(&s.apply_complex(&sym), &core)).collect())
        })
        .try_fold(init, |mut acc, item| -> Result<Vec<Field>> {
            for (a, b) in acc.iter_mut().zip(item?) {
                a.max_assign(&b);
            }
            Ok(acc)
        })
        .try_reduce(init, |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                x.max_assign(y);
            }
            Ok(a)
        })?;
    Ok(merged)
}

pub fn nikodym_maximal(f: &Field, delta: f64, dirs: &DirectionSet) -> Result<Field> {
    Ok(nikodym_maximal_many(std::slice::from_ref(f), delta, dirs)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maximal::tube::along_across;

    fn tube_set(w: &[f64; 3], delta: f64, grid: Grid) -> Field {
        Field::from_fn(grid, |x| {
            let (along, across) = along_across(grid.dim(), x, w);
            if along.abs() <= 0.5 && across <= 0.5 * delta {
                1.0
            } else {
                0.0
            }
        })
    }

    /// `Σ_x f(x)·tube(x − a)·h^n` for every placement `a`.
    fn brute_averages(f: &Field, tube: &Field) -> Vec<f64> {
        let g = f.grid();
        let hv = g.cell_volume();
        (0..g.len())
            .map(|a| {
                let ai = g.unravel(a);
                let mut s = 0.0;
                for x in 0..g.len() {
                    let xi = g.unravel(x);
                    let off: Vec<i64> = (0..g.dim()).map(|k| xi[k] as i64 - ai[k] as i64).collect();
                    s += f.values()[x] * tube.values()[g.offset(0, &off)];
                }
                s * hv
            })
            .collect()
    }

    #[test]
    fn constants_are_fixed() {
        let g = Grid::new(2, 256, 1.0).unwrap();
        let dirs = DirectionSet::for_delta(2, 1.0 / 8.0).unwrap();
        let f = Field::constant(g, 1.0);
        for v in kakeya_maximal(&f, 1.0 / 8.0, &dirs).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let n = nikodym_maximal(&f, 1.0 / 8.0, &dirs).unwrap();
        assert!(n.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn tube_indicator_matches_brute_force() {
        let g = Grid::new(2, 64, 1.5).unwrap();
        let delta = 1.0 / 8.0;
        let a = 0.3f64;
        let w = [a.cos(), a.sin(), 0.0];
        let f = tube_set(&w, delta, g);
        let tube = tube_indicator(&w, delta, &g).unwrap();
        let brute = brute_averages(&f, &tube);
        let best = brute.iter().cloned().fold(0.0, f64::max);
        let dirs = DirectionSet::from_directions(2, vec![w]).unwrap();
        let v = kakeya_maximal(&f, delta, &dirs).unwrap()[0];
        assert!((v - best).abs() < 1e-12, "{v} {best}");
        let tol = 2.0 * g.spacing() / delta;
        assert!(v >= 1.0 - tol && v <= 1.0 + 1e-12, "{v}");
    }

    #[test]
    fn perpendicular_tube_sees_about_delta() {
        let g = Grid::new(2, 256, 1.0).unwrap();
        let delta = 1.0 / 8.0;
        let f = tube_set(&[0.0, 1.0, 0.0], delta, g);
        let dirs = DirectionSet::from_directions(2, vec![[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        let v = kakeya_maximal(&f, delta, &dirs).unwrap();
        assert!(v[0] > 0.9);
        assert!(v[1] > 0.5 * delta && v[1] < 2.0 * delta, "{}", v[1]);
    }

    #[test]
    fn nikodym_ball_matches_placement_scan() {
        let g = Grid::new(2, 64, 1.5).unwrap();
        let delta = 1.0 / 8.0;
        let ball = Field::from_fn(g, |x| if (x[0] * x[0] + x[1] * x[1]).sqrt() <= delta { 1.0 } else { 0.0 });
        let dirs = DirectionSet::circle(16).unwrap();
        let got = nikodym_maximal(&ball, delta, &dirs).unwrap();
        let origin = g.ravel(&[0, 0]);
        let mut want: f64 = 0.0;
        for w in dirs.directions() {
            let tube = tube_indicator(w, delta, &g).unwrap();
            let avg = brute_averages(&ball, &tube);
            for (a, v) in avg.iter().enumerate() {
                // tube centered at a contains the origin iff -a lies in the core
                let c = g.coord(a);
                let (along, across) = along_across(2, &[-c[0], -c[1], 0.0], w);
                if along.abs() <= 0.5 && across <= 0.5 * delta {
                    want = want.max(*v);
                }
            }
        }
        assert!((got.values()[origin] - want).abs() < 1e-12, "{} {want}", got.values()[origin]);
        // a tube through the center covers about 2δ·δ of the ball
        assert!(want > delta && want < 4.0 * delta, "{want}");
    }

    #[test]
    fn nikodym_dominates_every_average() {
        let g = Grid::new(2, 64, 1.5).unwrap();
        let delta = 0.1;
        let f = Field::from_fn(g, |x| (3.0 * x[0]).sin().abs() + x[1] * x[1]);
        let dirs = DirectionSet::circle(12).unwrap();
        let n = nikodym_maximal(&f, delta, &dirs).unwrap();
        for w in dirs.directions() {
            let c = tube_average(&f, w, delta).unwrap();
            for (a, b) in n.values().iter().zip(c.values()) {
                assert!(*a >= *b - 1e-15);
            }
        }
    }

    #[test]
    fn translation_and_quarter_turn() {
        let g = Grid::new(2, 64, 1.5).unwrap();
        let delta = 0.1;
        let f = Field::from_fn(g, |x| (-(x[0] - 0.2).powi(2) * 20.0 - x[1].powi(2) * 5.0).exp());
        let dirs = DirectionSet::circle(16).unwrap();
        let base = kakeya_maximal(&f, delta, &dirs).unwrap();
        let shifted = f.cyclic_shift(&[5, -3]);
        let moved = kakeya_maximal(&shifted, delta, &dirs).unwrap();
        for (a, b) in base.iter().zip(&moved) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
        let nb = nikodym_maximal(&f, delta, &dirs).unwrap().cyclic_shift(&[5, -3]);
        let ns = nikodym_maximal(&shifted, delta, &dirs).unwrap();
        assert!(nb.sup_distance(&ns).unwrap() <= 1e-12 * nb.sup_norm());
        // (x, y) -> (-y, x); direction j maps to j + count/4
        let q = crate::geometry::Rotation::quarter_turn(2);
        let (perm, signs) = q.as_signed_permutation().unwrap();
        let turned = f.signed_permutation(&perm, &signs);
        let rot = kakeya_maximal(&turned, delta, &dirs).unwrap();
        for j in 0..16 {
            let a = base[j];
            let b = rot[(j + 4) % 16];
            assert!((a - b).abs() <= 1e-12 * a, "{j} {a} {b}");
        }
    }
}
