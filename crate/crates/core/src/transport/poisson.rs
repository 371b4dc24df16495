//! The normalised Poisson equation `phi'' = 1 - rho`, `E = -phi'`, in one
//! space dimension.
//!
//! The second derivative uses the compact fourth-order (Numerov) stencil
//! `(phi_{i-1} - 2 phi_i + phi_{i+1}) / dx^2 = (s_{i-1} + 10 s_i + s_{i+1}) / 12`,
//! solved directly as a tridiagonal system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::PhaseGrid;

/// Boundary treatment of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PoissonBc {
    /// Periodic with the zero-mean gauge.
    Periodic,
    /// Fixed potential at `x_lo` and `x_hi`.
    Dirichlet { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonConfig {
    pub bc: PoissonBc,
}

impl PoissonConfig {
    pub fn periodic() -> Self {
        Self {
            bc: PoissonBc::Periodic,
        }
    }

    pub fn dirichlet(lo: f64, hi: f64) -> Self {
        Self {
            bc: PoissonBc::Dirichlet { lo, hi },
        }
    }
}

/// Potential and field at the x-nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    pub phi: Vec<f64>,
    pub e: Vec<f64>,
}

/// Thomas algorithm for `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
fn thomas(a: f64, b: f64, c: f64, d: &mut [f64]) {
    let n = d.len();
    if n == 0 {
        return;
    }
    let mut cp = vec![0.0; n];
    cp[0] = c / b;
    d[0] /= b;
    for i in 1..n {
        let m = b - a * cp[i - 1];
        cp[i] = c / m;
        d[i] = (d[i] - a * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= cp[i] * d[i + 1];
    }
}

/// Compact right-hand side `dx^2 (s_{i-1} + 10 s_i + s_{i+1}) / 12`.
fn numerov(s: impl Fn(isize) -> f64, i: isize, dx: f64) -> f64 {
    dx * dx * (s(i - 1) + 10.0 * s(i) + s(i + 1)) / 12.0
}

/// Solves for `phi` and `E = -phi'` given the density at the x-nodes.
pub fn poisson_solve(rho: &[f64], cfg: &PoissonConfig, grid: &PhaseGrid) -> Result<FieldSolution> {
    if grid.dx_dims() == 0 {
        return Err(Error::NoSpatialDimension);
    }
    let n = grid.nx();
    if rho.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "density has {} nodes, grid has {n}",
            rho.len()
        )));
    }
    if rho.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFiniteField);
    }
    let dx = grid.dx();
    match cfg.bc {
        PoissonBc::Periodic => {
            if !grid.x_periodic() {
                return Err(Error::InvalidParameter(
                    "periodic Poisson solve needs a periodic x-grid".into(),
                ));
            }
            Ok(periodic(rho, dx))
        }
        PoissonBc::Dirichlet { lo, hi } => {
            if grid.x_periodic() {
                // close the periodic node set with the image of x_lo at x_hi
                let mut closed = rho.to_vec();
                closed.push(rho[0]);
                let mut sol = dirichlet(&closed, dx, lo, hi);
                sol.phi.pop();
                sol.e.pop();
                Ok(sol)
            } else {
                Ok(dirichlet(rho, dx, lo, hi))
            }
        }
    }
}

/// Mean-free source `1 - rho - mean(1 - rho)`.
pub fn periodic_source(rho: &[f64]) -> Vec<f64> {
    let s: Vec<f64> = rho.iter().map(|r| 1.0 - r).collect();
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    s.iter().map(|x| x - mean).collect()
}

fn periodic(rho: &[f64], dx: f64) -> FieldSolution {
    let n = rho.len();
    let s = periodic_source(rho);
    let at = |k: isize| s[k.rem_euclid(n as isize) as usize];
    // gauge phi_0 = 0; the equation at node 0 is implied by the others
    let mut d: Vec<f64> = (1..n as isize).map(|i| numerov(at, i, dx)).collect();
    thomas(1.0, -2.0, 1.0, &mut d);
    let mut phi = Vec::with_capacity(n);
    phi.push(0.0);
    phi.extend(d);
    let mean = phi.iter().sum::<f64>() / n as f64;
    phi.iter_mut().for_each(|p| *p -= mean);

    let e = electric_field(&phi, dx, true);
    FieldSolution { phi, e }
}

fn dirichlet(rho: &[f64], dx: f64, lo: f64, hi: f64) -> FieldSolution {
    let n = rho.len();
    let s: Vec<f64> = rho.iter().map(|r| 1.0 - r).collect();
    let at = |k: isize| s[k as usize];
    let mut d: Vec<f64> = (1..n as isize - 1).map(|i| numerov(at, i, dx)).collect();
    if let Some(first) = d.first_mut() {
        *first -= lo;
    }
    if let Some(last) = d.last_mut() {
        *last -= hi;
    }
    thomas(1.0, -2.0, 1.0, &mut d);
    let mut phi = Vec::with_capacity(n);
    phi.push(lo);
    phi.extend(d);
    phi.push(hi);
    let e = electric_field(&phi, dx, false);
    FieldSolution { phi, e }
}

/// `E = -phi'`: fourth-order central differences, with second-order
/// one-sided differences at the ends of a non-periodic node set.
pub fn electric_field(phi: &[f64], dx: f64, periodic: bool) -> Vec<f64> {
    let n = phi.len();
    if periodic {
        let p = |k: isize| phi[k.rem_euclid(n as isize) as usize];
        return (0..n as isize)
            .map(|i| -(-p(i + 2) + 8.0 * p(i + 1) - 8.0 * p(i - 1) + p(i - 2)) / (12.0 * dx))
            .collect();
    }
    (0..n)
        .map(|i| {
            let dphi = if i == 0 {
                (-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (2.0 * dx)
            } else if i == n - 1 {
                (3.0 * phi[n - 1] - 4.0 * phi[n - 2] + phi[n - 3]) / (2.0 * dx)
            } else if i == 1 || i == n - 2 {
                (phi[i + 1] - phi[i - 1]) / (2.0 * dx)
            } else {
                (-phi[i + 2] + 8.0 * phi[i + 1] - 8.0 * phi[i - 1] + phi[i - 2]) / (12.0 * dx)
            };
            -dphi
        })
        .collect()
}
