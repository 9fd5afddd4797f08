use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Rotation;

/// Quadrature-weighted sample of `S^{n−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    dim: usize,
    directions: Vec<[f64; 3]>,
    weights: Vec<f64>,
    separation: f64,
}

/// `|S^{n−1}|`.
pub fn sphere_measure(dim: usize) -> f64 {
    if dim == 2 {
        2.0 * PI
    } else {
        4.0 * PI
    }
}

impl DirectionSet {
    /// Angular spacing about `δ`: `M = ⌊2π/δ⌋` rounded down to a multiple of 4
    /// (2D) or `⌈4π/δ²⌉` Fibonacci nodes (3D).
    pub fn for_delta(dim: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
        }
        match dim {
            2 => DirectionSet::circle(((2.0 * PI / delta).floor() as usize / 4 * 4).max(4)),
            3 => DirectionSet::fibonacci((4.0 * PI / (delta * delta)).ceil() as usize),
            _ => Err(invalid(format!("dimension {dim}"))),
        }
    }

    pub fn with_count(dim: usize, count: usize) -> Result<Self> {
        match dim {
            2 => DirectionSet::circle(count),
            3 => DirectionSet::fibonacci(count),
            _ => Err(invalid(format!("dimension {dim}"))),
        }
    }

    /// `count` equispaced angles, `count` a multiple of 4. The first quarter
    /// is computed, the rest generated by exact quarter turns, so `−ω` and
    /// the rotated copies are exact.
    pub fn circle(count: usize) -> Result<Self> {
        if count == 0 || count % 4 != 0 {
            return Err(invalid(format!("2D direction count must be a positive multiple of 4, got {count}")));
        }
        let quarter = count / 4;
        let mut directions = Vec::with_capacity(count);
        for j in 0..quarter {
            let a = 2.0 * PI * j as f64 / count as f64;
            directions.push([a.cos(), a.sin(), 0.0]);
        }
        for q in 1..4 {
            for j in 0..quarter {
                let [x, y, _] = directions[(q - 1) * quarter + j];
                directions.push([-y, x, 0.0]);
            }
        }
        let w = 2.0 * PI / count as f64;
        Ok(DirectionSet { dim: 2, directions, weights: vec![w; count], separation: w })
    }

    /// Spherical Fibonacci lattice with equal weights `4π/count`.
    pub fn fibonacci(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(invalid("need at least two directions on the sphere"));
        }
        let golden = PI * (3.0 - 5f64.sqrt());
        let directions: Vec<[f64; 3]> = (0..count)
            .map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / count as f64;
                let r = (1.0 - z * z).sqrt();
                let a = golden * i as f64;
                [r * a.cos(), r * a.sin(), z]
            })
            .collect();
        let separation = min_separation(&directions);
        let w = 4.0 * PI / count as f64;
        Ok(DirectionSet { dim: 3, directions, weights: vec![w; count], separation })
    }

    /// Explicit unit directions with equal weights `|S^{n−1}|/count`.
    pub fn from_directions(dim: usize, directions: Vec<[f64; 3]>) -> Result<Self> {
        if !(dim == 2 || dim == 3) || directions.is_empty() {
            return Err(invalid("need a nonempty 2D or 3D direction list"));
        }
        for w in &directions {
            let len = crate::grid::norm(w);
            if (len - 1.0).abs() > 1e-12 || w[dim..].iter().any(|c| *c != 0.0) {
                return Err(invalid(format!("not a unit vector in {dim}D: {w:?}")));
            }
        }
        let w = sphere_measure(dim) / directions.len() as f64;
        let separation = min_separation(&directions);
        Ok(DirectionSet { dim, weights: vec![w; directions.len()], directions, separation })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn directions(&self) -> &[[f64; 3]] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Minimal pairwise angle.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// For each direction, the index of an earlier direction equal to its
    /// exact negation, if any.
    pub fn antipode_of_earlier(&self) -> Vec<Option<usize>> {
        antipodes(&self.directions)
    }

    /// `(Σ wᵢ|vᵢ|^q)^{1/q}`, `q = ∞` giving `max|vᵢ|`.
    pub fn lq_norm(&self, values: &[f64], q: f64) -> Result<f64> {
        direction_lq_norm(values, &self.weights, q)
    }
}

pub(crate) fn antipodes(dirs: &[[f64; 3]]) -> Vec<Option<usize>> {
    let mut seen: std::collections::HashMap<[u64; 3], usize> = std::collections::HashMap::new();
    let key = |v: &[f64; 3]| [(v[0] + 0.0).to_bits(), (v[1] + 0.0).to_bits(), (v[2] + 0.0).to_bits()];
    let mut out = Vec::with_capacity(dirs.len());
    for (i, d) in dirs.iter().enumerate() {
        let neg = [-d[0], -d[1], -d[2]];
        out.push(seen.get(&key(&neg)).copied());
        seen.entry(key(d)).or_insert(i);
    }
    out
}

fn min_separation(dirs: &[[f64; 3]]) -> f64 {
    let mut best_dot = -1.0f64;
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            let d = dirs[i][0] * dirs[j][0] + dirs[i][1] * dirs[j][1] + dirs[i][2] * dirs[j][2];
            best_dot = best_dot.max(d);
        }
    }
    best_dot.clamp(-1.0, 1.0).acos()
}

pub fn direction_lq_norm(values: &[f64], weights: &[f64], q: f64) -> Result<f64> {
    if q.is_nan() || q <= 0.0 {
        return Err(invalid(format!("L^q exponent must be positive, got {q}")));
    }
    if values.len() != weights.len() {
        return Err(crate::Error::ShapeMismatch(format!(
            "{} values for {} directions",
            values.len(),
            weights.len()
        )));
    }
    if q.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let s: f64 = values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(q)).sum();
    Ok(s.powf(1.0 / q))
}

/// Finite set of orthogonal maps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSet {
    rotations: Vec<Rotation>,
}

impl RotationSet {
    pub fn new(rotations: Vec<Rotation>) -> Result<Self> {
        if rotations.is_empty() {
            return Err(invalid("empty rotation set"));
        }
        for r in &rotations {
            if r.orthogonality_defect() > 1e-12 || (r.determinant().abs() - 1.0).abs() > 1e-12 {
                return Err(invalid(format!("not orthogonal: {:?}", r.matrix())));
            }
        }
        Ok(RotationSet { rotations })
    }

    pub fn identity(dim: usize) -> Self {
        RotationSet { rotations: vec![Rotation::identity(dim)] }
    }

    /// One rotation per direction, mapping `eₙ` to it.
    pub fn aligned_with(dirs: &DirectionSet) -> Self {
        let rotations = dirs.directions().iter().map(|w| Rotation::aligning(dirs.dim(), w)).collect();
        RotationSet { rotations }
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    /// Images `A eₙ`.
    pub fn axes(&self) -> Vec<[f64; 3]> {
        self.rotations
            .iter()
            .map(|r| {
                let mut e = [0.0; 3];
                e[r.dim() - 1] = 1.0;
                r.apply(&e)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_weights_and_symmetry() {
        let d = DirectionSet::for_delta(2, 1.0 / 8.0).unwrap();
        assert_eq!(d.len(), 48);
        assert!((d.weights().iter().sum::<f64>() - 2.0 * PI).abs() < 1e-6);
        assert!(d.separation() >= 1.0 / 8.0);
        let anti = d.antipode_of_earlier();
        assert_eq!(anti.iter().filter(|a| a.is_some()).count(), 24);
        for w in d.directions() {
            assert!(((w[0] * w[0] + w[1] * w[1]).sqrt() - 1.0).abs() < 1e-12);
        }
        let g = DirectionSet::circle(40).unwrap();
        for (i, w) in g.weights().iter().enumerate() {
            assert!((w - PI * (2.0 / 40.0)).abs() < 1e-15, "{i}");
        }
    }

    #[test]
    fn fibonacci_weights_and_separation() {
        let d = DirectionSet::for_delta(3, 0.25).unwrap();
        assert_eq!(d.len(), (4.0 * PI / 0.0625).ceil() as usize);
        assert!((d.weights().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-6);
        assert!(d.separation() >= 0.25 / 2.0);
    }

    #[test]
    fn lq_norm_examples() {
        let d = DirectionSet::circle(64).unwrap();
        let c = vec![3.0; 64];
        let v = d.lq_norm(&c, 2.0).unwrap();
        assert!((v - 3.0 * (2.0 * PI).sqrt()).abs() < 1e-12);
        let vals: Vec<f64> = (0..64).map(|i| (i as f64).sin()).collect();
        let m = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert_eq!(d.lq_norm(&vals, f64::INFINITY).unwrap(), m);
        assert!(d.lq_norm(&vals, 0.0).is_err());
    }

    #[test]
    fn rotation_set_aligns() {
        let d = DirectionSet::circle(16).unwrap();
        let r = RotationSet::aligned_with(&d);
        for (a, w) in r.axes().iter().zip(d.directions()) {
            assert!((a[0] - w[0]).abs() < 1e-15 && (a[1] - w[1]).abs() < 1e-15);
        }
        assert!(RotationSet::new(r.rotations().to_vec()).is_ok());
    }
}
