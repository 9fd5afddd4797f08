//! Orthogonal maps of ℝⁿ (`n ≤ 3`) stored as 3×3 matrices.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    dim: usize,
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Rotation { dim, m }
    }

    /// Validates orthogonality to `1e-12` per entry of `AᵀA − 1`.
    pub fn from_matrix(dim: usize, m: [[f64; 3]; 3]) -> Result<Self> {
        let r = Rotation { dim, m };
        if r.orthogonality_defect() > 1e-12 {
            return Err(invalid(format!("matrix is not orthogonal: {m:?}")));
        }
        Ok(r)
    }

    /// Plane rotation by `angle` (2D).
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation { dim: 2, m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// Exact quarter turn `(x, y) ↦ (−y, x)` in the first two axes.
    pub fn quarter_turn(dim: usize) -> Self {
        let mut r = Rotation::identity(dim);
        r.m[0] = [0.0, -1.0, 0.0];
        r.m[1] = [1.0, 0.0, 0.0];
        r
    }

    /// Exchange of axes `i` and `j`.
    pub fn axis_swap(dim: usize, i: usize, j: usize) -> Self {
        let mut r = Rotation::identity(dim);
        r.m.swap(i, j);
        r
    }

    /// Reflection `x_i ↦ −x_i`.
    pub fn reflection(dim: usize, i: usize) -> Self {
        let mut r = Rotation::identity(dim);
        r.m[i][i] = -1.0;
        r
    }

    /// A rotation with `A eₙ = ω`. In 2D the columns are `(ω₂, −ω₁)` and
    /// `(ω₁, ω₂)`; in 3D the Rodrigues rotation about `eₙ × ω`.
    pub fn aligning(dim: usize, omega: &[f64; 3]) -> Self {
        if dim == 2 {
            let (a, b) = (omega[0], omega[1]);
            return Rotation { dim, m: [[b, a, 0.0], [-a, b, 0.0], [0.0, 0.0, 1.0]] };
        }
        let c = omega[2];
        let (kx, ky) = (-omega[1], omega[0]);
        let s2 = kx * kx + ky * ky;
        if s2 < 1e-30 {
            return if c > 0.0 { Rotation::identity(3) } else { Rotation::reflection(3, 2).compose(&Rotation::reflection(3, 0)) };
        }
        // R = I + [k]× + [k]×² (1 − c)/s², with k = e₃ × ω (|k| = sin θ)
        let f = (1.0 - c) / s2;
        let m = [
            [1.0 - f * ky * ky, f * kx * ky, ky],
            [f * kx * ky, 1.0 - f * kx * kx, -kx],
            [-ky, kx, 1.0 - f * s2],
        ];
        Rotation { dim, m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn apply(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut y = [0.0; 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                y[i] += self.m[i][j] * x[j];
            }
        }
        y
    }

    /// `A⁻¹x = Aᵀx`.
    pub fn apply_inverse(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut y = [0.0; 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                y[i] += self.m[j][i] * x[j];
            }
        }
        y
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|l| self.m[i][l] * other.m[l][j]).sum();
            }
        }
        Rotation { dim: self.dim, m }
    }

    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let dot: f64 = (0..self.dim).map(|l| self.m[l][i] * self.m[l][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        if self.dim == 2 {
            m[0][0] * m[1][1] - m[0][1] * m[1][0]
        } else {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
    }

    /// For signed axis permutations: `(perm, signs)` with
    /// `(Ax)_a = signs[a]·x_{perm[a]}`.
    pub fn as_signed_permutation(&self) -> Option<(Vec<usize>, Vec<i64>)> {
        let mut perm = Vec::new();
        let mut signs = Vec::new();
        for a in 0..self.dim {
            let row = &self.m[a][..self.dim];
            let nz: Vec<usize> = (0..self.dim).filter(|&j| row[j] != 0.0).collect();
            if nz.len() != 1 || row[nz[0]].abs() != 1.0 {
                return None;
            }
            perm.push(nz[0]);
            signs.push(row[nz[0]] as i64);
        }
        Some((perm, signs))
    }
}
