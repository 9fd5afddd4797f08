//! The radial bump `ψ` behind `φ̂(ξ) = ψ(|ξ|)`.

fn g(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// `ψ(r) = 1` for `r ≤ 1`, `0` for `r ≥ 2`, and the smooth bridge
/// `g(2−r)/(g(2−r)+g(r−1))` with `g(u) = e^{−1/u}` in between.
pub fn psi(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = g(2.0 - r);
        let b = g(r - 1.0);
        a / (a + b)
    }
}

/// Radial profile used to build `φ̂`. Only the bridge above is provided.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BumpProfile;

impl BumpProfile {
    pub fn value(&self, r: f64) -> f64 {
        psi(r)
    }

    /// `φ̂(ξ) = ψ(|ξ|_e)`.
    pub fn phi_hat(&self, xi: &[f64; 3]) -> f64 {
        psi(crate::grid::norm(xi))
    }
}
