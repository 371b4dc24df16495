use serde::{Deserialize, Serialize};

use super::grid::VelocityGrid;
use crate::error::{Error, Result};

/// Conservative moments `(rho, rho u, E)` of one velocity slice.
///
/// The energy is `E = 1/2 rho (|u|^2 + d_v T)`, i.e. the `|v|^2 / 2` moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub rho: f64,
    /// Momentum; the second component is zero when `d_v = 1`.
    pub mom: [f64; 2],
    pub energy: f64,
}

impl Moments {
    pub const ZERO: Moments = Moments {
        rho: 0.0,
        mom: [0.0, 0.0],
        energy: 0.0,
    };

    /// Builds the moment vector of a Maxwellian with density, drift and temperature.
    pub fn from_primitive(rho: f64, u: [f64; 2], temperature: f64, dims: usize) -> Self {
        let u2 = u[0] * u[0] + u[1] * u[1];
        Self {
            rho,
            mom: [rho * u[0], rho * u[1]],
            energy: 0.5 * rho * (u2 + dims as f64 * temperature),
        }
    }

    #[inline]
    pub fn velocity(&self) -> [f64; 2] {
        [self.mom[0] / self.rho, self.mom[1] / self.rho]
    }

    /// `T = (2E/rho - |u|^2) / d_v`.
    #[inline]
    pub fn temperature(&self, dims: usize) -> f64 {
        let u = self.velocity();
        (2.0 * self.energy / self.rho - u[0] * u[0] - u[1] * u[1]) / dims as f64
    }

    pub fn is_physical(&self, dims: usize) -> bool {
        self.rho > 0.0 && self.temperature(dims) > 0.0
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.rho, self.mom[0], self.mom[1], self.energy]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self {
            rho: a[0],
            mom: [a[1], a[2]],
            energy: a[3],
        }
    }
}

/// Midpoint-rule moments of a velocity slice.
pub fn slice_moments(f: &[f64], grid: &VelocityGrid) -> Result<Moments> {
    debug_assert_eq!(f.len(), grid.len());
    let (mut m0, mut m1, mut m2, mut e) = (0.0, 0.0, 0.0, 0.0);
    for (idx, &val) in f.iter().enumerate() {
        if !val.is_finite() {
            return Err(Error::NonFiniteField);
        }
        let v = grid.coords(idx);
        m0 += val;
        m1 += val * v[0];
        m2 += val * v[1];
        e += val * (v[0] * v[0] + v[1] * v[1]);
    }
    let w = grid.cell_volume();
    Ok(Moments {
        rho: m0 * w,
        mom: [m1 * w, m2 * w],
        energy: 0.5 * e * w,
    })
}

/// Discrete Boltzmann entropy `-sum f ln f dv` over the positive part of `f`.
pub fn slice_entropy(f: &[f64], grid: &VelocityGrid) -> f64 {
    let s: f64 = f
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum();
    s * grid.cell_volume()
}

/// Per-node moments plus the velocity dimension they were taken in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub dims: usize,
    pub nodes: Vec<Moments>,
}

impl MomentSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn rho(&self) -> Vec<f64> {
        self.nodes.iter().map(|m| m.rho).collect()
    }

    pub fn velocity(&self) -> Vec<[f64; 2]> {
        self.nodes.iter().map(Moments::velocity).collect()
    }

    pub fn temperature(&self) -> Vec<f64> {
        self.nodes.iter().map(|m| m.temperature(self.dims)).collect()
    }

    /// Weighted totals `sum_i w_i U_i`.
    pub fn totals(&self, weights: &[f64]) -> Moments {
        let mut acc = [0.0; 4];
        for (m, w) in self.nodes.iter().zip(weights) {
            for (a, v) in acc.iter_mut().zip(m.as_array()) {
                *a += w * v;
            }
        }
        Moments::from_array(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_closure_holds_by_construction() {
        for dims in [1, 2] {
            let m = Moments::from_primitive(0.7, [0.3, if dims == 2 { -0.2 } else { 0.0 }], 1.3, dims);
            let u = m.velocity();
            let rebuilt = 0.5 * m.rho * (u[0] * u[0] + u[1] * u[1] + dims as f64 * m.temperature(dims));
            assert!((rebuilt - m.energy).abs() <= 1e-12 * m.energy.abs());
            assert!((m.temperature(dims) - 1.3).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_field_has_zero_moments() {
        let g = VelocityGrid::new(2, 8, 4.0).unwrap();
        let m = slice_moments(&vec![0.0; g.len()], &g).unwrap();
        assert_eq!(m, Moments::ZERO);
    }

    #[test]
    fn non_finite_field_is_rejected() {
        let g = VelocityGrid::new(1, 8, 4.0).unwrap();
        let mut f = vec![1.0; 8];
        f[3] = f64::NAN;
        assert!(matches!(slice_moments(&f, &g), Err(Error::NonFiniteField)));
    }
}
