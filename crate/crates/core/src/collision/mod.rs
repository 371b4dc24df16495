//! Collision operators: the fast spectral Landau operator, the Fokker–Planck
//! penalization operator, the penalization split and the implicit FP solve.

mod fft2;
mod fokker_planck;
mod landau;
mod projection;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use fokker_planck::{
    fp_p, implicit_fp_solve, shifted_residual, FpStencil, PenalizationConfig, IMPLICIT_TOL,
};
pub use landau::{landau_field, landau_q, SpectralPlan};
pub use projection::ConservativeProjector;

use crate::error::{Error, Result};
use crate::fields::{moments_of, slice_moments, DistField};

/// `(Q(f,f) - beta P(f), beta P(f))` for one velocity slice, with `P` built
/// on the slice's own moments.
pub fn penalized_rhs(
    f: &[f64],
    plan: &SpectralPlan,
    cfg: &PenalizationConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let q = landau_q(f, plan)?;
    let m = slice_moments(f, plan.grid())?;
    let p = if m.rho == 0.0 {
        vec![0.0; f.len()]
    } else {
        fp_p(f, &m, plan.grid())?
    };
    let stiff: Vec<f64> = p.iter().map(|x| cfg.beta * x).collect();
    let nonstiff = q.iter().zip(&stiff).map(|(a, b)| a - b).collect();
    Ok((nonstiff, stiff))
}

/// How the penalty strength `beta` is chosen for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum BetaPolicy {
    /// A fixed constant.
    Fixed(f64),
    /// `factor * max_x rho`.
    Density(f64),
    /// `factor * max_{x,v} lambda_max(A[f])`, the largest collision diffusivity.
    Stiffness(f64),
}

impl Default for BetaPolicy {
    fn default() -> Self {
        BetaPolicy::Stiffness(2.0)
    }
}

impl BetaPolicy {
    pub fn beta(&self, f: &DistField, plan: &SpectralPlan) -> Result<f64> {
        let beta = match *self {
            BetaPolicy::Fixed(b) => b,
            BetaPolicy::Density(c) => {
                let m = moments_of(f)?;
                c * m.rho().into_iter().fold(0.0, f64::max)
            }
            BetaPolicy::Stiffness(c) => {
                let mut worst = 0.0_f64;
                for i in 0..f.grid.nx() {
                    worst = worst.max(plan.max_diffusion(f.slice(i))?);
                }
                c * worst
            }
        };
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "penalty strength must be > 0, got {beta}"
            )));
        }
        Ok(beta)
    }
}

pub(crate) fn stack_rows(rows: Vec<Vec<f64>>, width: usize) -> Array2<f64> {
    let n = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((n, width), flat).expect("rows have equal width")
}
