//! Exact grayscale dilation `D(x) = max_{s∈S} c(x − s)` on the torus for a
//! structuring element `S` given as integer cell offsets.
//!
//! `S` is cut into runs along one axis; every line along that axis gets a
//! sparse table of window maxima over its cyclically doubled copy, so each
//! run costs one O(1) query per cell.

use std::collections::BTreeMap;

use crate::grid::{Field, Grid};

struct Run {
    perp: [i64; 3],
    lo: i64,
    hi: i64,
}

fn runs(offsets: &[[i64; 3]], axis: usize) -> Vec<Run> {
    let mut groups: BTreeMap<[i64; 3], Vec<i64>> = BTreeMap::new();
    for o in offsets {
        let mut key = *o;
        key[axis] = 0;
        groups.entry(key).or_default().push(o[axis]);
    }
    let mut out = Vec::new();
    for (perp, mut vals) in groups {
        vals.sort_unstable();
        vals.dedup();
        let mut lo = vals[0];
        let mut prev = vals[0];
        for &v in &vals[1..] {
            if v != prev + 1 {
                out.push(Run { perp, lo, hi: prev });
                lo = v;
            }
            prev = v;
        }
        out.push(Run { perp, lo, hi: prev });
    }
    out
}

/// Axis along which the offsets have the largest spread.
pub fn longest_axis(offsets: &[[i64; 3]], dim: usize) -> usize {
    (0..dim)
        .max_by_key(|&a| {
            let lo = offsets.iter().map(|o| o[a]).min().unwrap_or(0);
            let hi = offsets.iter().map(|o| o[a]).max().unwrap_or(0);
            hi - lo
        })
        .unwrap_or(0)
}

pub fn dilate(c: &Field, offsets: &[[i64; 3]]) -> Field {
    if offsets.is_empty() {
        return c.clone();
    }
    let grid = *c.grid();
    let axis = longest_axis(offsets, grid.dim());
    dilate_along(c, offsets, axis)
}

fn line_geometry(grid: &Grid, axis: usize) -> (usize, usize) {
    let n = grid.n();
    let stride = n.pow((grid.dim() - 1 - axis) as u32);
    (n, stride)
}

pub fn dilate_along(c: &Field, offsets: &[[i64; 3]], axis: usize) -> Field {
    let grid = *c.grid();
    let (n, stride) = line_geometry(&grid, axis);
    let runs = runs(offsets, axis);
    let max_len = runs.iter().map(|r| (r.hi - r.lo + 1) as usize).max().unwrap_or(1).min(n);
    let levels = (usize::BITS - max_len.leading_zeros()) as usize;
    let lines = grid.len() / n;
    let vals = c.values();

    // line index ↔ base flat index of its first cell
    let base_of = |line: usize| -> usize {
        let outer = line / stride;
        let inner = line % stride;
        outer * n * stride + inner
    };

    // table[level][line * 2n + i] = max over [i, i + 2^level) of the doubled line
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    let mut first = vec![0.0; lines * 2 * n];
    for line in 0..lines {
        let b = base_of(line);
        for i in 0..2 * n {
            first[line * 2 * n + i] = vals[b + (i % n) * stride];
        }
    }
    table.push(first);
    for lvl in 1..levels {
        let half = 1usize << (lvl - 1);
        let prev = &table[lvl - 1];
        let mut cur = vec![f64::NEG_INFINITY; lines * 2 * n];
        for line in 0..lines {
            let off = line * 2 * n;
            for i in 0..2 * n - half {
                cur[off + i] = prev[off + i].max(prev[off + i + half]);
            }
        }
        table.push(cur);
    }

    let dim = grid.dim();
    let mut out = vec![f64::NEG_INFINITY; grid.len()];
    for line in 0..lines {
        let b = base_of(line);
        let idx = grid.unravel(b);
        for run in &runs {
            // source line: perp(x) − perp(run)
            let mut src = [0usize; 3];
            for a in 0..dim {
                src[a] = if a == axis { 0 } else { grid.wrap(idx[a] as i64 - run.perp[a]) };
            }
            let src_base = grid.ravel(&src);
            let src_line = (src_base / (n * stride)) * stride + src_base % stride;
            let off = src_line * 2 * n;
            let len = (run.hi - run.lo + 1) as usize;
            if len >= n {
                let m = (0..n).map(|i| table[0][off + i]).fold(f64::NEG_INFINITY, f64::max);
                for i in 0..n {
                    let o = &mut out[b + i * stride];
                    *o = o.max(m);
                }
                continue;
            }
            let lvl = (usize::BITS - 1 - len.leading_zeros()) as usize;
            let span = 1usize << lvl;
            let t = &table[lvl];
            for i in 0..n {
                // window x − hi ..= x − lo along the axis
                let start = (i as i64 - run.hi).rem_euclid(n as i64) as usize;
                let m = t[off + start].max(t[off + start + len - span]);
                let o = &mut out[b + i * stride];
                if m > *o {
                    *o = m;
                }
            }
        }
    }
    Field::new(grid, out).expect("dilation of finite values is finite")
}

/// Cell offsets of the closed ball of radius `r` (torus-minimal, cell
/// centers).
pub fn ball_offsets(grid: &Grid, r: f64) -> Vec<[i64; 3]> {
    let h = grid.spacing();
    let k = ((r / h).floor() as i64).min(grid.n() as i64 / 2);
    let mut out = Vec::new();
    let span: Vec<i64> = (-k..=k).collect();
    let zs: &[i64] = if grid.dim() == 3 { &span } else { &[0] };
    for &a in &span {
        for &b in &span {
            for &c in zs {
                let d2 = ((a * a + b * b + c * c) as f64) * h * h;
                if d2 <= r * r * (1.0 + 1e-12) {
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
    use rand_core::{RngCore, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn brute(c: &Field, offsets: &[[i64; 3]]) -> Field {
        let g = *c.grid();
        let mut out = vec![f64::NEG_INFINITY; g.len()];
        for (i, o) in out.iter_mut().enumerate() {
            for s in offsets {
                let neg = [-s[0], -s[1], -s[2]];
                *o = o.max(c.values()[g.offset(i, &neg)]);
            }
        }
        Field::new(g, out).unwrap()
    }

    fn noise(g: Grid, seed: u64) -> Field {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let v = (0..g.len()).map(|_| (rng.next_u64() >> 11) as f64).collect();
        Field::new(g, v).unwrap()
    }

    #[test]
    fn matches_brute_force() {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let c = noise(g, 1);
        let tube = crate::maximal::tube::tube_core_offsets(&[0.6, 0.8, 0.0], 0.125, &g);
        assert_eq!(dilate(&c, &tube), brute(&c, &tube));
        let odd = vec![[0, 0, 0], [3, 1, 0], [4, 1, 0], [-2, 5, 0], [-1, 5, 0], [1, 5, 0]];
        for axis in 0..2 {
            assert_eq!(dilate_along(&c, &odd, axis), brute(&c, &odd));
        }
        let wide = vec![[-20, 0, 0], [-19, 0, 0], [0, 40, 0]];
        let long: Vec<[i64; 3]> = (-20..=20).map(|i| [i, 1, 0]).collect();
        assert_eq!(dilate(&c, &[wide.clone(), long.clone()].concat()), brute(&c, &[wide, long].concat()));

        let g3 = Grid::new(3, 8, 1.0).unwrap();
        let c3 = noise(g3, 2);
        let ball = ball_offsets(&g3, 0.3);
        for axis in 0..3 {
            assert_eq!(dilate_along(&c3, &ball, axis), brute(&c3, &ball));
        }
    }
}
