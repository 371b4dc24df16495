//! The Fokker–Planck operator `P(f) = div_v (M grad_v (f / M))`.
//!
//! Each velocity axis uses the conservative flux
//!
//! ```text
//! F_{j+1/2} = (e^{a} f_{j+1} - e^{-a} f_j) / h,   a = h (v_{j+1/2} - u) / (2T),
//! ```
//!
//! which is the divergence form with the geometric mean of `M` on the face.
//! The scheme is second order, the sampled Maxwellian is an exact discrete
//! equilibrium, the boundary faces carry no flux, and the matrix has
//! non-negative off-diagonals with zero column sums.

use serde::{Deserialize, Serialize};

use super::projection::ConservativeProjector;
use crate::error::{Error, Result};
use crate::fields::{Maxwellian, Moments, VelocityGrid};

/// Penalty strength and VPFP collision frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenalizationConfig {
    pub beta: f64,
    pub mu: f64,
}

impl PenalizationConfig {
    pub fn new(beta: f64, mu: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
        }
        Ok(Self { beta, mu })
    }
}

/// Largest `coeff * max(-diag P)` handled by Jacobi sweeps.
const WEAK_COUPLING: f64 = 0.05;
const WEAK_SWEEPS: usize = 40;

/// Face coefficients of `P` for one `(u, T)`.
#[derive(Debug, Clone)]
pub struct FpStencil {
    grid: VelocityGrid,
    /// Per axis, `(e^{a}, e^{-a})` on the `nv - 1` interior faces.
    faces: Vec<Vec<(f64, f64)>>,
}

impl FpStencil {
    pub fn new(grid: &VelocityGrid, u: [f64; 2], t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() || !u.iter().all(|x| x.is_finite()) {
            return Err(Error::NonPhysicalTemperature);
        }
        let h = grid.spacing();
        let faces = (0..grid.dims())
            .map(|axis| {
                (0..grid.nv() - 1)
                    .map(|j| {
                        let mid = grid.node(j) + 0.5 * h;
                        let a = h * (mid - u[axis]) / (2.0 * t);
                        (a.exp(), (-a).exp())
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            faces,
        })
    }

    pub fn from_moments(grid: &VelocityGrid, m: &Moments) -> Result<Self> {
        if !m.is_physical(grid.dims()) {
            return Err(Error::NonPhysicalTemperature);
        }
        Self::new(grid, m.velocity(), m.temperature(grid.dims()))
    }

    /// Linear index stride of `axis`.
    fn stride(&self, axis: usize) -> usize {
        self.grid.nv().pow((self.grid.dims() - 1 - axis) as u32)
    }

    /// Position of `idx` along `axis`.
    fn position(&self, idx: usize, axis: usize) -> usize {
        (idx / self.stride(axis)) % self.grid.nv()
    }

    /// `out = P f` without any conservation correction.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        let nv = self.grid.nv();
        let h2 = self.grid.spacing().powi(2);
        out.iter_mut().for_each(|o| *o = 0.0);
        for axis in 0..self.grid.dims() {
            let s = self.stride(axis);
            let faces = &self.faces[axis];
            for idx in 0..f.len() {
                let j = self.position(idx, axis);
                if j + 1 < nv {
                    let (ep, em) = faces[j];
                    let flux = (ep * f[idx + s] - em * f[idx]) / h2;
                    out[idx] += flux;
                    out[idx + s] -= flux;
                }
            }
        }
    }

    /// `-diag(P)`, non-negative.
    fn diagonal(&self) -> Vec<f64> {
        let nv = self.grid.nv();
        let h2 = self.grid.spacing().powi(2);
        let mut d = vec![0.0; self.grid.len()];
        for axis in 0..self.grid.dims() {
            let faces = &self.faces[axis];
            for (idx, di) in d.iter_mut().enumerate() {
                let j = self.position(idx, axis);
                if j + 1 < nv {
                    *di += faces[j].1 / h2;
                }
                if j > 0 {
                    *di += faces[j - 1].0 / h2;
                }
            }
        }
        d
    }

    /// Jacobi iteration for `(I - coeff P) y = rhs`; `None` unless it converges
    /// to round-off within a few sweeps.
    fn solve_weak(&self, rhs: &[f64], coeff: f64, diag: &[f64]) -> Option<Vec<f64>> {
        let mut y = rhs.to_vec();
        let mut py = vec![0.0; y.len()];
        let scale = rhs.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        for _ in 0..WEAK_SWEEPS {
            self.apply(&y, &mut py);
            let mut change = 0.0_f64;
            for i in 0..y.len() {
                let next = (rhs[i] + coeff * (py[i] + diag[i] * y[i])) / (1.0 + coeff * diag[i]);
                change = change.max((next - y[i]).abs());
                y[i] = next;
            }
            if change <= 1e-15 * scale {
                return Some(y);
            }
        }
        None
    }

    /// Solves `(I - coeff P) y = rhs`: Jacobi sweeps when the coupling is weak,
    /// banded Gaussian elimination otherwise.
    ///
    /// `I - coeff P` is column diagonally dominant, so elimination without
    /// pivoting is stable.
    pub fn solve_shifted(&self, rhs: &[f64], coeff: f64) -> Result<Vec<f64>> {
        let diag = self.diagonal();
        if coeff * diag.iter().fold(0.0_f64, |m, d| m.max(*d)) <= WEAK_COUPLING {
            if let Some(y) = self.solve_weak(rhs, coeff, &diag) {
                return Ok(y);
            }
        }
        Ok(self.solve_banded(rhs, coeff))
    }

    fn solve_banded(&self, rhs: &[f64], coeff: f64) -> Vec<f64> {
        let n = rhs.len();
        let nv = self.grid.nv();
        let bw = self.stride(0).max(1);
        let width = 2 * bw + 1;
        let h2 = self.grid.spacing().powi(2);
        // band[i * width + (j + bw - i)] = A_ij
        let mut band = vec![0.0; n * width];
        let at = |i: usize, j: usize| i * width + j + bw - i;
        for i in 0..n {
            band[at(i, i)] = 1.0;
        }
        for axis in 0..self.grid.dims() {
            let s = self.stride(axis);
            for idx in 0..n {
                let j = self.position(idx, axis);
                if j + 1 < nv {
                    let (ep, em) = self.faces[axis][j];
                    let (a, b) = (coeff * ep / h2, coeff * em / h2);
                    // flux = a f[idx+s] - b f[idx]; out[idx] += flux; out[idx+s] -= flux
                    band[at(idx, idx + s)] -= a;
                    band[at(idx, idx)] += b;
                    band[at(idx + s, idx + s)] += a;
                    band[at(idx + s, idx)] -= b;
                }
            }
        }
        let mut y = rhs.to_vec();
        for k in 0..n {
            let pivot = band[at(k, k)];
            let last = (k + bw).min(n - 1);
            for i in k + 1..=last {
                let l = band[at(i, k)] / pivot;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..=last {
                    band[at(i, j)] -= l * band[at(k, j)];
                }
                y[i] -= l * y[k];
            }
        }
        for k in (0..n).rev() {
            let last = (k + bw).min(n - 1);
            let mut acc = y[k];
            for j in k + 1..=last {
                acc -= band[at(k, j)] * y[j];
            }
            y[k] = acc / band[at(k, k)];
        }
        y
    }
}

/// Conservative `P(f)` with the Maxwellian of `m`; the result carries no
/// mass, momentum or energy.
pub fn fp_p(f: &[f64], m: &Moments, grid: &VelocityGrid) -> Result<Vec<f64>> {
    if f.len() != grid.len() {
        return Err(Error::PlanGridMismatch);
    }
    let stencil = FpStencil::from_moments(grid, m)?;
    let mut out = vec![0.0; f.len()];
    stencil.apply(f, &mut out);
    let max = Maxwellian::isotropic(m, grid.dims())?;
    ConservativeProjector::new(&max, grid)?.annihilate(&mut out);
    Ok(out)
}

/// Solves `(I - coeff P) y = rhs` with `P` frozen at the moments `m`.
///
/// The solution is checked against the relative residual tolerance `1e-10`.
pub fn implicit_fp_solve(
    rhs: &[f64],
    m: &Moments,
    coeff: f64,
    grid: &VelocityGrid,
) -> Result<Vec<f64>> {
    if rhs.len() != grid.len() {
        return Err(Error::PlanGridMismatch);
    }
    if !(coeff >= 0.0) || !coeff.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "implicit coefficient must be >= 0, got {coeff}"
        )));
    }
    if coeff == 0.0 {
        return Ok(rhs.to_vec());
    }
    let stencil = FpStencil::from_moments(grid, m)?;
    let y = stencil.solve_shifted(rhs, coeff)?;
    let residual = shifted_residual(&stencil, &y, rhs, coeff);
    if !(residual < IMPLICIT_TOL) {
        return Err(Error::ImplicitDiverged {
            residual,
            iterations: 1,
        });
    }
    Ok(y)
}

pub const IMPLICIT_TOL: f64 = 1e-10;

/// `||(I - coeff P) y - rhs|| / ||rhs||` in the Euclidean norm.
pub fn shifted_residual(stencil: &FpStencil, y: &[f64], rhs: &[f64], coeff: f64) -> f64 {
    let mut py = vec![0.0; y.len()];
    stencil.apply(y, &mut py);
    let (mut num, mut den) = (0.0, 0.0);
    for ((yi, pi), ri) in y.iter().zip(&py).zip(rhs) {
        num += (yi - coeff * pi - ri).powi(2);
        den += ri * ri;
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}
