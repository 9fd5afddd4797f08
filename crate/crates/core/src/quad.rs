//! Small quadrature helpers: Gauss–Legendre rules, Bessel functions of
//! integer order, and the spatial profile of `φ` by radial Fourier inversion.

use std::f64::consts::PI;

use crate::filters::psi;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = (order + 1) / 2;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=order {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            dp = order as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre integration of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        total += x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + half * xi)).sum::<f64>() * half;
    }
    total
}

/// `J_m(x) = (1/π) ∫₀^π cos(mτ − x sin τ) dτ`, evaluated with the periodic
/// trapezoid rule (spectrally accurate for this integrand).
pub fn bessel_j(m: u32, x: f64) -> f64 {
    let steps = 64 + 2 * x.abs().ceil() as usize;
    let dt = PI / steps as f64;
    let mut sum = 0.5 * (1.0 + (m as f64 * PI).cos());
    for i in 1..steps {
        let t = i as f64 * dt;
        sum += (m as f64 * t - x * t.sin()).cos();
    }
    sum * dt / PI
}

/// Spatial `φ` at radius `r`: the inverse transform of the radial symbol
/// `ψ(|ξ|)` in dimension `dim`.
pub fn phi_spatial(r: f64, dim: usize) -> f64 {
    let panels = 32 + (8.0 * r) as usize;
    let body = |rho: f64| -> f64 {
        let w = psi(rho);
        if dim == 2 {
            2.0 * PI * rho * w * bessel_j(0, 2.0 * PI * r * rho)
        } else if r == 0.0 {
            4.0 * PI * rho * rho * w
        } else {
            2.0 * rho * w * (2.0 * PI * r * rho).sin() / r
        }
    };
    integrate(&body, 0.0, 1.0, panels, 16) + integrate(&body, 1.0, 2.0, panels, 16)
}
