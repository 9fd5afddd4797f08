//! `W(x) = max_s |g(x − s)|·(1 + |s|/τ)^{−N}` over all grid shifts `s`, with
//! `|s|` the torus-minimal length, by branch and bound over a max pyramid.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::grid::{Field, Grid};

/// Block maxima of `|g|` over aligned blocks of side `2^level` cells.
pub struct MaxPyramid {
    grid: Grid,
    levels: Vec<Vec<f64>>,
}

struct Node {
    bound: f64,
    level: usize,
    idx: [usize; 3],
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound)
    }
}

#[inline]
pub(crate) fn weight(dist: f64, scale: f64, power: f64) -> f64 {
    (1.0 + dist / scale).powf(-power)
}

impl MaxPyramid {
    pub fn new(g: &Field) -> Self {
        let grid = *g.grid();
        let dim = grid.dim();
        let mut levels = vec![g.values().iter().map(|v| v.abs()).collect::<Vec<f64>>()];
        let mut side = grid.n();
        while side > 1 {
            let half = side / 2;
            let prev = levels.last().expect("level");
            let mut cur = vec![0.0; half.pow(dim as u32)];
            for (i, v) in prev.iter().enumerate() {
                let mut rem = i;
                let mut flat = 0;
                let mut mul = 1;
                for _ in 0..dim {
                    let c = rem % side;
                    rem /= side;
                    flat += (c / 2) * mul;
                    mul *= half;
                }
                if *v > cur[flat] {
                    cur[flat] = *v;
                }
            }
            levels.push(cur);
            side = half;
        }
        MaxPyramid { grid, levels }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn side(&self, level: usize) -> usize {
        self.grid.n() >> level
    }

    fn value(&self, level: usize, idx: &[usize; 3]) -> f64 {
        let side = self.side(level);
        let mut flat = 0;
        for a in 0..self.grid.dim() {
            flat = flat * side + idx[a];
        }
        self.levels[level][flat]
    }

    /// Torus-minimal distance from cell `x` to the block.
    fn block_distance(&self, x: &[usize; 3], level: usize, idx: &[usize; 3]) -> f64 {
        let n = self.grid.n() as i64;
        let size = 1i64 << level;
        let mut d2 = 0.0;
        for a in 0..self.grid.dim() {
            let lo = idx[a] as i64 * size;
            let rel = (x[a] as i64 - lo).rem_euclid(n);
            let d = if rel < size { 0 } else { (rel - (size - 1)).min(n - rel) };
            let d = d as f64 * self.grid.spacing();
            d2 += d * d;
        }
        d2.sqrt()
    }

    /// `max_s |g(x − s)|(1 + |s|/scale)^{−power}` at cell `flat`.
    pub fn query(&self, flat: usize, scale: f64, power: f64) -> f64 {
        let x = self.grid.unravel(flat);
        let mut best = self.levels[0][flat];
        let top = self.levels.len() - 1;
        let mut heap = BinaryHeap::new();
        heap.push(Node { bound: self.levels[top][0], level: top, idx: [0; 3] });
        let dim = self.grid.dim();
        while let Some(node) = heap.pop() {
            if node.bound <= best {
                break;
            }
            if node.level == 0 {
                // exact value: the bound at level 0 is already exact
                best = node.bound;
                continue;
            }
            let child = node.level - 1;
            for corner in 0..(1usize << dim) {
                let mut idx = [0usize; 3];
                for a in 0..dim {
                    idx[a] = node.idx[a] * 2 + ((corner >> a) & 1);
                }
                let v = self.value(child, &idx);
                if v <= best {
                    continue;
                }
                let bound = if child == 0 {
                    let s = self.grid.radius(self.grid.ravel(&offset(&x, &idx, &self.grid)));
                    v * weight(s, scale, power)
                } else {
                    v * weight(self.block_distance(&x, child, &idx), scale, power)
                };
                if bound > best {
                    heap.push(Node { bound, level: child, idx });
                }
            }
        }
        best
    }

    /// [`query`](Self::query) at every cell.
    pub fn field(&self, scale: f64, power: f64) -> Field {
        let values = (0..self.grid.len()).map(|i| self.query(i, scale, power)).collect();
        Field::new(self.grid, values).expect("finite")
    }
}

/// Offset `x − y` as a cell index (wrapped), used for the exact leaf distance.
fn offset(x: &[usize; 3], y: &[usize; 3], grid: &Grid) -> [usize; 3] {
    let mut out = [0usize; 3];
    for a in 0..grid.dim() {
        out[a] = grid.wrap(x[a] as i64 - y[a] as i64);
    }
    out
}

/// Direct `O(Nⁿ)` evaluation at one cell (test oracle and small grids).
pub fn brute_force(g: &Field, flat: usize, scale: f64, power: f64) -> f64 {
    let grid = g.grid();
    let x = grid.unravel(flat);
    let mut best: f64 = 0.0;
    for j in 0..grid.len() {
        let y = grid.unravel(j);
        let s = grid.radius(grid.ravel(&offset(&x, &y, grid)));
        best = best.max(g.values()[j].abs() * weight(s, scale, power));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{RngCore, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn noise(g: Grid, seed: u64) -> Field {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let v = (0..g.len()).map(|_| (rng.next_u64() >> 11) as f64 / 9e15 - 0.5).collect();
        Field::new(g, v).unwrap()
    }

    #[test]
    fn matches_brute_force() {
        for (dim, n) in [(2, 32), (3, 8)] {
            let g = Grid::new(dim, n, 1.5).unwrap();
            let f = noise(g, 4);
            let p = MaxPyramid::new(&f);
            for &(scale, power) in &[(0.01, 2.0), (0.1, 1.0), (1.0, 8.0), (0.05, 0.5)] {
                for flat in (0..g.len()).step_by(7) {
                    assert_eq!(p.query(flat, scale, power), brute_force(&f, flat, scale, power));
                }
            }
        }
    }

    #[test]
    fn constant_is_fixed() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let p = MaxPyramid::new(&Field::constant(g, 1.0));
        assert_eq!(p.field(0.3, 2.0), Field::constant(g, 1.0));
    }
}
