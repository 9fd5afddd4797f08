use super::dilation::ball_offsets;
use crate::grid::{Field, Grid, HalfSpectrum};

/// Radii `{0} ∪ {h·2^j ≤ L/2}`.
pub fn hl_radii(grid: &Grid) -> Vec<f64> {
    let mut radii = vec![0.0];
    let mut r = grid.spacing();
    while r <= 0.5 * grid.side() {
        radii.push(r);
        r *= 2.0;
    }
    radii
}

/// Normalized indicator of the cells within distance `r` of the origin.
pub fn ball_kernel(grid: &Grid, r: f64) -> Field {
    let offsets = ball_offsets(grid, r);
    let mut f = Field::zeros(*grid);
    let w = 1.0 / (offsets.len() as f64 * grid.cell_volume());
    for o in &offsets {
        let idx = grid.offset(0, &[o[0], o[1], o[2]]);
        f.values_mut()[idx] = w;
    }
    f
}

/// Hardy–Littlewood maximal function of `|f|` over centered balls with the
/// radii of [`hl_radii`].
pub fn hl_maximal(f: &Field) -> Field {
    let grid = *f.grid();
    let a = f.abs();
    let spec = HalfSpectrum::of(&a);
    let h = grid.cell_volume();
    let mut out = a.clone();
    for r in hl_radii(&grid).into_iter().skip(1) {
        let k = HalfSpectrum::of(&ball_kernel(&grid, r));
        let sym: Vec<_> = k.bins().iter().map(|c| c * h).collect();
        out.max_assign(&spec.apply_complex(&sym));
    }
    out
}
