use std::f64::consts::PI;

use super::grid::VelocityGrid;
use super::moments::{slice_moments, Moments};
use crate::error::{Error, Result};

/// Gaussian equilibrium with diagonal temperature tensor (rotation fixed to identity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maxwellian {
    rho: f64,
    u: [f64; 2],
    temps: [f64; 2],
    dims: usize,
}

impl Maxwellian {
    pub fn isotropic(m: &Moments, dims: usize) -> Result<Self> {
        let t = m.temperature(dims);
        Self::anisotropic(m.rho, m.velocity(), [t, t], dims)
    }

    /// Isotropic Maxwellian whose midpoint-rule moments on `grid` equal `m`,
    /// found by fixed-point correction of the continuous parameters.
    pub fn discrete(m: &Moments, grid: &VelocityGrid) -> Result<Self> {
        let dims = grid.dims();
        let (rho, u, t) = (m.rho, m.velocity(), m.temperature(dims));
        let mut max = Self::from_primitive(rho, u, t, dims)?;
        for _ in 0..50 {
            let d = slice_moments(&max.sample(grid), grid)?;
            let (du, dt) = (d.velocity(), d.temperature(dims));
            let next = Self::from_primitive(
                max.rho * rho / d.rho,
                [max.u[0] + u[0] - du[0], max.u[1] + u[1] - du[1]],
                max.temps[0] * t / dt,
                dims,
            )?;
            let change = (next.rho / max.rho - 1.0).abs()
                + (next.temps[0] / max.temps[0] - 1.0).abs()
                + (next.u[0] - max.u[0]).abs()
                + (next.u[1] - max.u[1]).abs();
            max = next;
            if change < 1e-15 {
                break;
            }
        }
        Ok(max)
    }

    pub fn from_primitive(rho: f64, u: [f64; 2], temperature: f64, dims: usize) -> Result<Self> {
        Self::anisotropic(rho, u, [temperature, temperature], dims)
    }

    /// `rho / ((2 pi)^{d/2} sqrt(det Theta)) exp(-1/2 (v-u)^T Theta^{-1} (v-u))`
    /// with `Theta = diag(temps)`.
    pub fn anisotropic(rho: f64, u: [f64; 2], temps: [f64; 2], dims: usize) -> Result<Self> {
        let active = &temps[..dims];
        if active.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::NonPhysicalTemperature);
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Maxwellian density must be positive, got {rho}"
            )));
        }
        let mut u = u;
        let mut temps = temps;
        if dims == 1 {
            u[1] = 0.0;
            temps[1] = 1.0;
        }
        Ok(Self { rho, u, temps, dims })
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    pub fn drift(&self) -> [f64; 2] {
        self.u
    }

    #[inline]
    pub fn temperatures(&self) -> [f64; 2] {
        self.temps
    }

    #[inline]
    pub fn eval(&self, v: [f64; 2]) -> f64 {
        let w0 = v[0] - self.u[0];
        if self.dims == 1 {
            return self.rho / (2.0 * PI * self.temps[0]).sqrt()
                * (-0.5 * w0 * w0 / self.temps[0]).exp();
        }
        let w1 = v[1] - self.u[1];
        let det = self.temps[0] * self.temps[1];
        self.rho / (2.0 * PI * det.sqrt())
            * (-0.5 * (w0 * w0 / self.temps[0] + w1 * w1 / self.temps[1])).exp()
    }

    pub fn fill(&self, grid: &VelocityGrid, out: &mut [f64]) {
        debug_assert_eq!(out.len(), grid.len());
        for (idx, o) in out.iter_mut().enumerate() {
            *o = self.eval(grid.coords(idx));
        }
    }

    pub fn sample(&self, grid: &VelocityGrid) -> Vec<f64> {
        let mut out = vec![0.0; grid.len()];
        self.fill(grid, &mut out);
        out
    }
}
