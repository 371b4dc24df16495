use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fields::{Maxwellian, Moments, VelocityGrid};

/// Corrects a velocity slice inside `span{M, v M, |v|^2/2 M}` so its discrete
/// collision-invariant moments hit a prescribed target.
///
/// The coefficients solve the Gram system `G a = defect` with
/// `G_kl = sum psi_k psi_l M dv`, so the correction is the least-squares
/// combination of the basis that removes the defect.
#[derive(Debug, Clone)]
pub struct ConservativeProjector {
    basis: Vec<Vec<f64>>,
    gram: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    grid: VelocityGrid,
}

fn invariants(v: [f64; 2], dims: usize) -> [f64; 4] {
    let e = 0.5 * (v[0] * v[0] + v[1] * v[1]);
    match dims {
        1 => [1.0, v[0], e, 0.0],
        _ => [1.0, v[0], v[1], e],
    }
}

impl ConservativeProjector {
    pub fn new(max: &Maxwellian, grid: &VelocityGrid) -> Result<Self> {
        let dims = grid.dims();
        let nb = dims + 2;
        let mut basis = vec![vec![0.0; grid.len()]; nb];
        for idx in 0..grid.len() {
            let v = grid.coords(idx);
            let m = max.eval(v);
            let psi = invariants(v, dims);
            for k in 0..nb {
                basis[k][idx] = psi[k] * m;
            }
        }
        let w = grid.cell_volume();
        let mut g = DMatrix::zeros(nb, nb);
        for idx in 0..grid.len() {
            let psi = invariants(grid.coords(idx), dims);
            for k in 0..nb {
                for l in 0..nb {
                    g[(k, l)] += psi[k] * basis[l][idx] * w;
                }
            }
        }
        let gram = g.cholesky().ok_or(Error::NonPhysicalTemperature)?;
        Ok(Self {
            basis,
            gram,
            grid: grid.clone(),
        })
    }

    /// Discrete moments `sum psi g dv` in basis order.
    fn moment_vector(&self, g: &[f64]) -> DVector<f64> {
        let dims = self.grid.dims();
        let nb = dims + 2;
        let mut acc = DVector::zeros(nb);
        for (idx, &val) in g.iter().enumerate() {
            let psi = invariants(self.grid.coords(idx), dims);
            for k in 0..nb {
                acc[k] += psi[k] * val;
            }
        }
        acc * self.grid.cell_volume()
    }

    fn to_vector(&self, m: &Moments) -> DVector<f64> {
        match self.grid.dims() {
            1 => DVector::from_vec(vec![m.rho, m.mom[0], m.energy]),
            _ => DVector::from_vec(vec![m.rho, m.mom[0], m.mom[1], m.energy]),
        }
    }

    /// Shifts `g` so that its moments equal `target`. A second pass removes
    /// the round-off left by large corrections.
    pub fn enforce(&self, g: &mut [f64], target: &Moments) {
        self.correct(g, target);
        self.correct(g, target);
    }

    fn correct(&self, g: &mut [f64], target: &Moments) {
        let defect = self.moment_vector(g) - self.to_vector(target);
        let coeff = self.gram.solve(&defect);
        for (k, b) in self.basis.iter().enumerate() {
            let c = coeff[k];
            if c != 0.0 {
                for (gi, bi) in g.iter_mut().zip(b) {
                    *gi -= c * bi;
                }
            }
        }
    }

    /// Removes every collision-invariant moment from `g`.
    pub fn annihilate(&self, g: &mut [f64]) {
        self.enforce(g, &Moments::ZERO);
    }
}
