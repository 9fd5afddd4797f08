//! Perron tree: the unit triangle split into `2^{levels−1}` thin triangles
//! sharing the apex, merged pairwise level by level, each merge translating
//! the right block horizontally by the shift that maximizes its overlap with
//! the left block.

use crate::error::{invalid, Error, Result};
use crate::grid::{Field, Grid};

pub const SUB_ROWS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
struct Triangle {
    apex: f64,
    lo: f64,
    hi: f64,
}

impl Triangle {
    /// Cross-section at relative height `t ∈ [0, 1]` (base at 0, apex at 1).
    fn section(&self, t: f64) -> (f64, f64) {
        (self.lo + (self.apex - self.lo) * t, self.hi + (self.apex - self.hi) * t)
    }

    fn shifted(&self, s: f64) -> Triangle {
        Triangle { apex: self.apex + s, lo: self.lo + s, hi: self.hi + s }
    }
}

/// Union of intervals, sorted and merged.
fn union(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.retain(|(a, b)| b > a);
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// `|A ∩ (B + s)|` for merged interval lists.
fn overlap(a: &[(f64, f64)], b: &[(f64, f64)], s: f64) -> f64 {
    let (mut i, mut j, mut total) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0 + s);
        let hi = a[i].1.min(b[j].1 + s);
        if hi > lo {
            total += hi - lo;
        }
        if a[i].1 < b[j].1 + s {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

/// Geometry of a Perron tree of unit base and unit height.
#[derive(Clone, Debug)]
pub struct PerronTree {
    levels: usize,
    triangles: Vec<Triangle>,
    rows: Vec<f64>,
}

impl PerronTree {
    /// Builds the tree with overlaps measured on horizontal sections spaced
    /// `dy` apart and candidate shifts spaced `dy/4`.
    pub fn build(levels: usize, dy: f64) -> Result<Self> {
        if levels == 0 || levels > 20 {
            return Err(invalid(format!("levels must lie in 1..=20, got {levels}")));
        }
        if !(dy > 0.0 && dy < 0.5) {
            return Err(invalid(format!("bad section spacing {dy}")));
        }
        let count = 1usize << (levels - 1);
        let b = 1.0 / count as f64;
        let mut triangles: Vec<Triangle> =
            (0..count).map(|i| Triangle { apex: 0.5, lo: i as f64 * b, hi: (i + 1) as f64 * b }).collect();
        let rows: Vec<f64> = (0..(1.0 / dy).round() as usize).map(|r| (r as f64 + 0.5) * dy).collect();
        let mut block = 1;
        while block < count {
            for start in (0..count).step_by(2 * block) {
                let left = &triangles[start..start + block];
                let right = &triangles[start + block..start + 2 * block];
                let sections = |ts: &[Triangle], t: f64| union(ts.iter().map(|tr| tr.section(t)).collect());
                let ls: Vec<_> = rows.iter().map(|&t| sections(left, t)).collect();
                let rs: Vec<_> = rows.iter().map(|&t| sections(right, t)).collect();
                let width = block as f64 * b;
                let steps = (8.0 * width / dy).ceil() as usize;
                let mut best = (0.0, f64::NEG_INFINITY);
                for k in 0..=steps {
                    let s = -(k as f64) * dy / 4.0;
                    let ov: f64 = ls.iter().zip(&rs).map(|(l, r)| overlap(l, r, s)).sum();
                    if ov > best.1 {
                        best = (s, ov);
                    }
                }
                for t in &mut triangles[start + block..start + 2 * block] {
                    *t = t.shifted(best.0);
                }
            }
            block *= 2;
        }
        Ok(PerronTree { levels, triangles, rows })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Horizontal extent `[min, max]` of the union.
    pub fn extent(&self) -> (f64, f64) {
        self.triangles.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| {
            (a.min(t.lo).min(t.apex), b.max(t.hi).max(t.apex))
        })
    }

    /// Area of the union from the stored sections (midpoint rule in height).
    pub fn area(&self) -> f64 {
        let dy = 1.0 / self.rows.len() as f64;
        self.rows
            .iter()
            .map(|&t| union(self.triangles.iter().map(|tr| tr.section(t)).collect()).iter().map(|(a, b)| b - a).sum::<f64>())
            .sum::<f64>()
            * dy
    }

    /// Horizontal offset placing the union's bounding box at the origin.
    fn center_shift(&self) -> f64 {
        let (a, b) = self.extent();
        -0.5 * (a + b)
    }

    /// Cell-averaged indicator: each cell holds the covered fraction of its
    /// area, with heights sampled at [`SUB_ROWS`] sub-rows. The tree
    /// is centered, base at `y = −½`, apex at `y = ½`.
    pub fn rasterize(&self, grid: &Grid) -> Result<Field> {
        if grid.dim() != 2 {
            return Err(invalid("Perron trees are two-dimensional"));
        }
        let h = grid.spacing();
        let (a, b) = self.extent();
        if b - a + 2.0 * h > grid.side() || 1.0 + 2.0 * h > grid.side() {
            return Err(invalid(format!("tree of width {} does not fit in a box of side {}", b - a, grid.side())));
        }
        let cs = self.center_shift();
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        for i1 in 0..n {
            let y = grid.signed(i1) as f64 * h;
            for sub in 0..SUB_ROWS {
                let t = y + 0.5 + ((sub as f64 + 0.5) / SUB_ROWS as f64 - 0.5) * h;
                if !(0.0..=1.0).contains(&t) {
                    continue;
                }
                let sec = union(
                    self.triangles
                        .iter()
                        .map(|tr| {
                            let (lo, hi) = tr.section(t);
                            (lo + cs, hi + cs)
                        })
                        .collect(),
                );
                for i0 in 0..n {
                    let x = grid.signed(i0) as f64 * h;
                    let cell = [(x - 0.5 * h, x + 0.5 * h)];
                    values[grid.ravel(&[i0, i1])] += overlap(&cell, &sec, 0.0) / (h * SUB_ROWS as f64);
                }
            }
        }
        Field::new(*grid, values)
    }

    /// Range `[θ_min, θ_max]` of the segment directions, measured from the
    /// vertical: every segment from the apex to a base point of its triangle.
    pub fn sector(&self) -> (f64, f64) {
        (-(0.5f64).atan(), (0.5f64).atan())
    }

    /// Fraction of directions, spaced `delta` inside the sector, for which a
    /// unit segment starting on the base line meets only cells with positive
    /// value (sampled every `h/2`, starts every `h/4`). Returns `(covered, sampled)`.
    pub fn direction_coverage(&self, field: &Field, delta: f64) -> Result<(usize, usize)> {
        let grid = *field.grid();
        if grid.dim() != 2 {
            return Err(invalid("Perron trees are two-dimensional"));
        }
        if !(delta > 0.0) {
            return Err(invalid("angular spacing must be positive"));
        }
        let h = grid.spacing();
        let (lo, hi) = self.sector();
        let count = ((hi - lo) / delta).floor() as usize;
        if count == 0 {
            return Err(Error::Unresolved("sector narrower than the angular spacing".into()));
        }
        let at = |x: f64, y: f64| {
            let i0 = grid.wrap((x / h).round() as i64);
            let i1 = grid.wrap((y / h).round() as i64);
            field.values()[grid.ravel(&[i0, i1])]
        };
        let steps = (2.0 / h).ceil() as usize;
        // start points every h/4 along the base line
        let starts: Vec<f64> = (0..4 * grid.n() as i64)
            .map(|i| (i - 2 * grid.n() as i64) as f64 * 0.25 * h)
            .filter(|&x| at(x, -0.5) > 0.0)
            .collect();
        let mut covered = 0;
        for j in 0..count {
            let theta = lo + (hi - lo) * (j as f64 + 0.5) / count as f64;
            let (sx, cy) = theta.sin_cos();
            let hit = starts.iter().any(|&x0| {
                (0..=steps).all(|k| {
                    let u = k as f64 / steps as f64;
                    at(x0 - sx * u, -0.5 + cy * u) > 0.0
                })
            });
            if hit {
                covered += 1;
            }
        }
        Ok((covered, count))
    }
}

/// Rasterized Perron tree with `levels` merge stages; `delta` is the tube
/// width it is probed with and must be resolved, as must the finest base.
pub fn perron_tree(levels: usize, delta: f64, grid: &Grid) -> Result<Field> {
    let h = grid.spacing();
    if delta < 2.0 * h {
        return Err(Error::Unresolved(format!("delta {delta} below two cells (h = {h})")));
    }
    if levels == 0 {
        return Err(invalid("levels must be at least 1"));
    }
    let base = 0.5f64.powi(levels as i32 - 1);
    if base < 2.0 * h {
        return Err(Error::Unresolved(format!("finest base {base} below two cells (h = {h})")));
    }
    PerronTree::build(levels, h)?.rasterize(grid)
}
