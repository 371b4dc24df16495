//! Fast spectral evaluation of the Landau collision operator in two velocity
//! dimensions.
//!
//! The operator is written in its Fokker–Planck-like form
//!
//! ```text
//! Q(f, f) = div_v ( A[f] grad_v f - b[f] f ),
//! A[f] = Phi * f,   b[f] = (div Phi) * f,   div Phi(z) = (1 - d_v) |z|^gamma z,
//! ```
//!
//! with `Phi(z) = |z|^{gamma+2} (I - z z^T / |z|^2)`. Both convolutions are
//! evaluated with FFTs on a zero-padded grid of twice the size, which makes
//! them exact discrete (aperiodic) convolutions; the outer divergence and the
//! gradient are spectral derivatives on the periodic velocity box. A final
//! projection removes the small momentum and energy defects left by the
//! spectral truncation.

use num_complex::Complex64;
use rayon::prelude::*;

use super::fft2::{signed_index, Fft2};
use super::projection::ConservativeProjector;
use crate::error::{Error, Result};
use crate::fields::{slice_moments, DistField, Maxwellian, VelocityGrid};

/// Precomputed kernel spectra for one velocity grid.
#[derive(Debug, Clone)]
pub struct SpectralPlan {
    grid: VelocityGrid,
    gamma: f64,
    support_radius: f64,
    padded: Fft2,
    periodic: Fft2,
    /// Spectra of (A11, A12), (A22, b1), (b2, 0), each pair packed as `K1 + i K2`.
    packed: [Vec<Complex64>; 3],
    wavenumbers: Vec<f64>,
    steady_state: bool,
}

impl SpectralPlan {
    /// Plan for the Maxwell-molecule kernel (`gamma = 0`) with full-box support.
    pub fn maxwell_molecules(grid: &VelocityGrid) -> Result<Self> {
        Self::new(grid, 0.0, grid.v_bound())
    }

    /// `gamma >= 0` (hard potentials and Maxwell molecules). The kernel is cut
    /// to the cube `|z_i| <= 2 support_radius`.
    pub fn new(grid: &VelocityGrid, gamma: f64, support_radius: f64) -> Result<Self> {
        if grid.dims() != 2 {
            return Err(Error::InvalidGrid(
                "the Landau kernel is implemented for d_v = 2 only".into(),
            ));
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "only gamma >= 0 kernels are supported, got {gamma}"
            )));
        }
        if !(support_radius > 0.0) || support_radius > grid.v_bound() {
            return Err(Error::InvalidParameter(format!(
                "support radius must lie in (0, L_v], got {support_radius}"
            )));
        }
        let nv = grid.nv();
        let np = 2 * nv;
        let h = grid.spacing();
        let cut = 2.0 * support_radius + 1e-12;
        let dims = 2.0;

        let padded = Fft2::new(np);
        let mut tmp = Vec::new();
        let mut kernels: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); np * np]; 5];
        for p in 0..np {
            let zp = offset(p, np) * h;
            for q in 0..np {
                let zq = offset(q, np) * h;
                if zp.abs() > cut || zq.abs() > cut {
                    continue;
                }
                let r2 = zp * zp + zq * zq;
                let rg = if r2 > 0.0 { r2.powf(0.5 * gamma) } else { 0.0 };
                // |z|^gamma (|z|^2 I - z z^T) and (1 - d) |z|^gamma z
                let w = h * h;
                let idx = p * np + q;
                kernels[0][idx].re = w * rg * zq * zq;
                kernels[1][idx].re = -w * rg * zp * zq;
                kernels[2][idx].re = w * rg * zp * zp;
                kernels[3][idx].re = w * (1.0 - dims) * rg * zp;
                kernels[4][idx].re = w * (1.0 - dims) * rg * zq;
            }
        }
        for k in kernels.iter_mut() {
            padded.forward(k, &mut tmp);
        }
        let i = Complex64::new(0.0, 1.0);
        let pack = |a: &[Complex64], b: Option<&[Complex64]>| -> Vec<Complex64> {
            match b {
                Some(b) => a.iter().zip(b).map(|(x, y)| x + i * y).collect(),
                None => a.to_vec(),
            }
        };
        let packed = [
            pack(&kernels[0], Some(&kernels[1])),
            pack(&kernels[2], Some(&kernels[3])),
            pack(&kernels[4], None),
        ];
        let period = 2.0 * grid.v_bound();
        let wavenumbers = (0..nv)
            .map(|m| 2.0 * std::f64::consts::PI * signed_index(m, nv) / period)
            .collect();
        Ok(Self {
            grid: grid.clone(),
            gamma,
            support_radius,
            padded,
            periodic: Fft2::new(nv),
            packed,
            wavenumbers,
            steady_state: false,
        })
    }

    /// Evaluates `Q(f) - Q(M[f])` instead of `Q(f)`, so the sampled local
    /// Maxwellian is an exact discrete equilibrium.
    pub fn with_steady_state(mut self, on: bool) -> Self {
        self.steady_state = on;
        self
    }

    pub fn steady_state(&self) -> bool {
        self.steady_state
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.grid.len() {
            return Err(Error::PlanGridMismatch);
        }
        Ok(())
    }

    /// Returns `(A11, A12, A22, b1, b2)` sampled on the velocity grid.
    fn coefficients(&self, f: &[f64]) -> [Vec<f64>; 5] {
        let nv = self.grid.nv();
        let np = self.padded.n();
        let mut tmp = Vec::new();
        let mut spec = vec![Complex64::new(0.0, 0.0); np * np];
        for a in 0..nv {
            for b in 0..nv {
                spec[a * np + b].re = f[a * nv + b];
            }
        }
        self.padded.forward(&mut spec, &mut tmp);

        let mut out: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; nv * nv]);
        let mut buf = vec![Complex64::new(0.0, 0.0); np * np];
        for (pair, kernel) in self.packed.iter().enumerate() {
            for ((o, s), k) in buf.iter_mut().zip(&spec).zip(kernel) {
                *o = s * k;
            }
            self.padded.inverse(&mut buf, &mut tmp);
            for a in 0..nv {
                for b in 0..nv {
                    let c = buf[a * np + b];
                    out[2 * pair][a * nv + b] = c.re;
                    if 2 * pair + 1 < 5 {
                        out[2 * pair + 1][a * nv + b] = c.im;
                    }
                }
            }
        }
        out
    }

    /// Largest eigenvalue of the collision diffusion tensor `A[f](v)` over the grid.
    pub fn max_diffusion(&self, f: &[f64]) -> Result<f64> {
        self.check(f)?;
        let [a11, a12, a22, _, _] = self.coefficients(f);
        Ok(a11
            .iter()
            .zip(&a12)
            .zip(&a22)
            .map(|((a, b), c)| 0.5 * (a + c) + (0.25 * (a - c) * (a - c) + b * b).sqrt())
            .fold(0.0, f64::max))
    }

    /// Spectral `Q(f, f)` without the conservation correction.
    pub fn q_raw(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check(f)?;
        let nv = self.grid.nv();
        let [a11, a12, a22, b1, b2] = self.coefficients(f);
        let k = &self.wavenumbers;
        let i = Complex64::new(0.0, 1.0);
        let mut tmp = Vec::new();

        // grad f, packed as d1 f + i d2 f
        let mut spec: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.periodic.forward(&mut spec, &mut tmp);
        let mut grad = vec![Complex64::new(0.0, 0.0); nv * nv];
        for p in 0..nv {
            for q in 0..nv {
                let s = spec[p * nv + q];
                grad[p * nv + q] = i * k[p] * s - k[q] * s;
            }
        }
        self.periodic.inverse(&mut grad, &mut tmp);

        // flux J = A grad f - b f, packed as J1 + i J2
        let mut flux: Vec<Complex64> = (0..nv * nv)
            .map(|n| {
                let (g1, g2) = (grad[n].re, grad[n].im);
                let j1 = a11[n] * g1 + a12[n] * g2 - b1[n] * f[n];
                let j2 = a12[n] * g1 + a22[n] * g2 - b2[n] * f[n];
                Complex64::new(j1, j2)
            })
            .collect();
        self.periodic.forward(&mut flux, &mut tmp);

        // unpack the two real spectra and take the divergence
        let mut div = vec![Complex64::new(0.0, 0.0); nv * nv];
        for p in 0..nv {
            for q in 0..nv {
                let z = flux[p * nv + q];
                let zc = flux[((nv - p) % nv) * nv + (nv - q) % nv].conj();
                let j1 = 0.5 * (z + zc);
                let j2 = -0.5 * i * (z - zc);
                div[p * nv + q] = i * k[p] * j1 + i * k[q] * j2;
            }
        }
        self.periodic.inverse(&mut div, &mut tmp);
        Ok(div.into_iter().map(|c| c.re).collect())
    }
}

#[inline]
fn offset(p: usize, n: usize) -> f64 {
    if p < n / 2 {
        p as f64
    } else {
        p as f64 - n as f64
    }
}

/// `Q(f, f)` for one velocity slice, projected so that mass, momentum and
/// energy are conserved to round-off.
pub fn landau_q(f: &[f64], plan: &SpectralPlan) -> Result<Vec<f64>> {
    plan.check(f)?;
    let grid = plan.grid();
    let m = slice_moments(f, grid)?;
    let mut q = plan.q_raw(f)?;
    if m.rho == 0.0 {
        return Ok(q);
    }
    let max = Maxwellian::isotropic(&m, grid.dims())?;
    if plan.steady_state {
        let qm = plan.q_raw(&Maxwellian::discrete(&m, grid)?.sample(grid))?;
        for (a, b) in q.iter_mut().zip(qm) {
            *a -= b;
        }
    }
    ConservativeProjector::new(&max, grid)?.annihilate(&mut q);
    Ok(q)
}

/// [`landau_q`] at every x-node.
pub fn landau_field(f: &DistField, plan: &SpectralPlan) -> Result<ndarray::Array2<f64>> {
    if f.grid.velocity() != plan.grid() {
        return Err(Error::PlanGridMismatch);
    }
    let rows: Vec<Vec<f64>> = (0..f.grid.nx())
        .into_par_iter()
        .map(|i| landau_q(f.slice(i), plan))
        .collect::<Result<_>>()?;
    Ok(super::stack_rows(rows, f.grid.velocity().len()))
}
