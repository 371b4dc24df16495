//! Globally stiffly accurate IMEX Runge–Kutta time stepping.
//!
//! Stage `k` of a step:
//!
//! 1. evaluate the transport and non-stiff collision tendencies of the
//!    previous stage;
//! 2. `f~ = f^n + dt sum_i a~_ki T_i` (transport only);
//! 3. take the target moments from `f~`;
//! 4. solve `(I - a_kk dt (s/eps) P) f^(k) = f_bar` with
//!    `f_bar = f~ + dt sum_i a~_ki N_i + dt sum_i a_ki S_i`, where `P` is
//!    frozen at the target moments, then restore the target moments exactly;
//! 5. `f^{n+1} = f^(s)`.
//!
//! `N = (Q - beta P) / eps` and `s = beta` for the penalised Landau model;
//! `N = 0` and `s = mu` for Vlasov–Poisson–Fokker–Planck.

mod tableau;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use tableau::{builtin_tableaux, ImexTableau};

use crate::collision::{fp_p, ConservativeProjector, FpStencil, PenalizationConfig};
use crate::error::{Error, Result};
use crate::fields::{slice_moments, DistField, Maxwellian, Moments, PhaseGrid};

/// Per-step parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub dt: f64,
    pub epsilon: f64,
    pub penalization: PenalizationConfig,
    /// When set, drivers choose `dt` from the transport CFL condition.
    pub cfl_target: Option<f64>,
}

impl StepConfig {
    pub fn new(dt: f64, epsilon: f64, penalization: PenalizationConfig) -> Result<Self> {
        let cfg = Self {
            dt,
            epsilon,
            penalization,
            cfl_target: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if let Some(c) = self.cfl_target {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidParameter(format!("CFL must be > 0, got {c}")));
            }
        }
        Ok(())
    }
}

/// The model-specific pieces of the stage loop.
pub trait StageOps: Sync {
    /// `-v . grad_x f - E . grad_v f`, or `None` for a homogeneous model.
    fn transport(&self, f: &DistField) -> Result<Option<Array2<f64>>>;
    /// The explicitly treated collision part, already divided by `eps`.
    fn nonstiff(&self, f: &DistField, cfg: &StepConfig) -> Result<Option<Array2<f64>>>;
    /// Strength `s` of the implicit term `(s / eps) P`.
    fn stiff_strength(&self, cfg: &StepConfig) -> f64;
}

/// Diagnostics of one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepReport {
    /// Largest relative gap between the moments of `f^(k)` and `f~^(k)`.
    pub stage_moment_defect: f64,
}

/// Largest CFL-stable step: `cfl / max(max|v| / dx, max|E| / dv)`.
pub fn cfl_dt(grid: &PhaseGrid, e_max: f64, cfl: f64) -> f64 {
    let vg = grid.velocity();
    let v_max = vg.v_bound() - 0.5 * vg.spacing();
    let rate_x = if grid.dx_dims() == 1 { v_max / grid.dx() } else { 0.0 };
    let rate_v = e_max.abs() / vg.spacing();
    let rate = rate_x.max(rate_v);
    if rate == 0.0 {
        f64::INFINITY
    } else {
        cfl / rate
    }
}

fn relative_gap(a: &Moments, b: &Moments) -> f64 {
    let scale = b.rho.abs().max(b.energy.abs()).max(f64::MIN_POSITIVE);
    a.as_array()
        .iter()
        .zip(b.as_array())
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max)
}

fn needed(a: &[Vec<f64>], i: usize) -> bool {
    (i + 1..a.len()).any(|j| a[j][i] != 0.0)
}

/// Advances `f` by one step.
pub fn imex_step<O: StageOps>(
    f: &DistField,
    tab: &ImexTableau,
    cfg: &StepConfig,
    ops: &O,
) -> Result<DistField> {
    imex_step_report(f, tab, cfg, ops).map(|(g, _)| g)
}

/// [`imex_step`] with diagnostics.
pub fn imex_step_report<O: StageOps>(
    f: &DistField,
    tab: &ImexTableau,
    cfg: &StepConfig,
    ops: &O,
) -> Result<(DistField, StepReport)> {
    cfg.validate()?;
    let s = tab.stages();
    let dt = cfg.dt;
    let strength = ops.stiff_strength(cfg);
    let grid = &f.grid;
    let vg = grid.velocity();
    let mut transport: Vec<Option<Array2<f64>>> = vec![None; s];
    let mut nonstiff: Vec<Option<Array2<f64>>> = vec![None; s];
    let mut stiff: Vec<Option<Array2<f64>>> = vec![None; s];
    let mut report = StepReport::default();
    let mut prev: Option<DistField> = None;

    for k in 0..s {
        // Step 1: explicit tendencies of the previous stage
        if let Some(p) = prev.as_ref() {
            let i = k - 1;
            if needed(&tab.a_exp, i) {
                transport[i] = ops.transport(p)?;
                nonstiff[i] = ops.nonstiff(p, cfg)?;
            }
        }

        // Step 2: transport update
        let mut tilde = f.values.clone();
        for i in 0..k {
            let a = tab.a_exp[k][i];
            if a != 0.0 {
                if let Some(t) = &transport[i] {
                    tilde.scaled_add(dt * a, t);
                }
            }
        }

        // Step 3: target moments
        let targets = (0..grid.nx())
            .map(|n| slice_moments(tilde.row(n).as_slice().expect("contiguous"), vg))
            .collect::<Result<Vec<_>>>()?;

        // Step 4: implicit collision stage
        let mut bar = tilde;
        for i in 0..k {
            let (ae, ai) = (tab.a_exp[k][i], tab.a_imp[k][i]);
            if ae != 0.0 {
                if let Some(n) = &nonstiff[i] {
                    bar.scaled_add(dt * ae, n);
                }
            }
            if ai != 0.0 {
                if let Some(st) = &stiff[i] {
                    bar.scaled_add(dt * ai, st);
                }
            }
        }
        let akk = tab.a_imp[k][k];
        let coeff = akk * dt * strength / cfg.epsilon;
        let stage = if coeff > 0.0 {
            let mut out = bar.clone();
            out.as_slice_mut()
                .expect("standard layout")
                .par_chunks_mut(vg.len())
                .zip(targets.par_iter())
                .try_for_each(|(row, m)| -> Result<()> {
                    let stencil = FpStencil::from_moments(vg, m)?;
                    let y = stencil.solve_shifted(row, coeff)?;
                    row.copy_from_slice(&y);
                    let max = Maxwellian::isotropic(m, vg.dims())?;
                    ConservativeProjector::new(&max, vg)?.enforce(row, m);
                    Ok(())
                })?;
            out
        } else {
            bar.clone()
        };
        if stage.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteField);
        }
        for (n, m) in targets.iter().enumerate() {
            let got = slice_moments(stage.row(n).as_slice().expect("contiguous"), vg)?;
            report.stage_moment_defect = report.stage_moment_defect.max(relative_gap(&got, m));
        }

        if needed(&tab.a_imp, k) && strength > 0.0 {
            stiff[k] = Some(if akk != 0.0 {
                (&stage - &bar) / (akk * dt)
            } else {
                let field = DistField::new(grid.clone(), stage.clone(), f.time)?;
                stiff_direct(&field, strength / cfg.epsilon)?
            });
        }
        prev = Some(DistField {
            grid: grid.clone(),
            values: stage,
            time: f.time + tab.c_imp[k] * dt,
        });
    }
    let mut out = prev.expect("at least one stage");
    out.time = f.time + dt;
    Ok((out, report))
}

/// `scale * P(f)` at every node, with `P` built on each node's moments.
fn stiff_direct(f: &DistField, scale: f64) -> Result<Array2<f64>> {
    let vg = f.grid.velocity();
    let rows = (0..f.grid.nx())
        .into_par_iter()
        .map(|i| {
            let m = slice_moments(f.slice(i), vg)?;
            let p = fp_p(f.slice(i), &m, vg)?;
            Ok(p.into_iter().map(|x| scale * x).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(Array2::from_shape_vec(f.values.dim(), rows.concat()).expect("shape"))
}
