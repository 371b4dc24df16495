use ndarray::Array2;
use rayon::prelude::*;

use super::{next_step, stops, wants_output, ModelKind, ModelRun, Snapshot, Trajectory};
use crate::collision::{penalized_rhs, stack_rows, PenalizationConfig, SpectralPlan};
use crate::error::{Error, Result};
use crate::fields::{moments_of, DistField, Moments, PhaseGrid};
use crate::timestep::{cfl_dt, imex_step, ImexTableau, StageOps, StepConfig};
use crate::transport::{poisson_solve, weno_flux_v, weno_flux_x, PoissonConfig};
use crate::vrmc::zeta;

/// Transport, field and collision pieces of a kinetic model.
pub struct KineticOps {
    poisson: PoissonConfig,
    /// `Some` for the Landau models, `None` for Fokker–Planck.
    plan: Option<SpectralPlan>,
}

impl KineticOps {
    pub fn landau(poisson: PoissonConfig, plan: SpectralPlan) -> Self {
        Self {
            poisson,
            plan: Some(plan),
        }
    }

    pub fn fokker_planck(poisson: PoissonConfig) -> Self {
        Self {
            poisson,
            plan: None,
        }
    }

    /// Self-consistent field at the x-nodes; zero without a spatial dimension.
    pub fn efield(&self, f: &DistField) -> Result<Vec<f64>> {
        if f.grid.dx_dims() == 0 {
            return Ok(vec![0.0; f.grid.nx()]);
        }
        let rho = moments_of(f)?.rho();
        Ok(poisson_solve(&rho, &self.poisson, &f.grid)?.e)
    }
}

impl StageOps for KineticOps {
    fn transport(&self, f: &DistField) -> Result<Option<Array2<f64>>> {
        if f.grid.dx_dims() == 0 {
            return Ok(None);
        }
        let e = self.efield(f)?;
        let mut t = weno_flux_x(f)?;
        t += &weno_flux_v(f, &e)?;
        Ok(Some(t))
    }

    fn nonstiff(&self, f: &DistField, cfg: &StepConfig) -> Result<Option<Array2<f64>>> {
        let Some(plan) = &self.plan else {
            return Ok(None);
        };
        let scale = 1.0 / cfg.epsilon;
        let rows = (0..f.grid.nx())
            .into_par_iter()
            .map(|i| {
                let (ns, _) = penalized_rhs(f.slice(i), plan, &cfg.penalization)?;
                Ok(ns.into_iter().map(|x| x * scale).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(Some(stack_rows(rows, f.grid.velocity().len())))
    }

    fn stiff_strength(&self, cfg: &StepConfig) -> f64 {
        if self.plan.is_some() {
            cfg.penalization.beta
        } else {
            cfg.penalization.mu
        }
    }
}

fn total_entropy(f: &DistField) -> f64 {
    f.entropy()
        .iter()
        .zip(f.grid.x_weights())
        .map(|(h, w)| h * w)
        .sum()
}

pub(crate) fn field_energy(e: &[f64], grid: &PhaseGrid) -> f64 {
    0.5 * e.iter().zip(grid.x_weights()).map(|(e, w)| w * e * e).sum::<f64>()
}

fn totals(f: &DistField) -> Result<Moments> {
    Ok(moments_of(f)?.totals(&f.grid.x_weights()))
}

/// Vlasov–Poisson–Landau (`vpl`, `hom-landau`) with Fokker–Planck penalization.
pub fn run_vpl(run: &ModelRun) -> Result<Trajectory> {
    if !matches!(run.model, ModelKind::Vpl | ModelKind::HomLandau) {
        return Err(Error::InvalidParameter(format!(
            "run_vpl cannot run model {}",
            run.model
        )));
    }
    run_kinetic(run)
}

/// Vlasov–Poisson–Fokker–Planck (`vpfp`, `hom-fp`), collisions `(mu / eps) P(f)`.
pub fn run_vpfp(run: &ModelRun) -> Result<Trajectory> {
    if !matches!(run.model, ModelKind::Vpfp | ModelKind::HomFp) {
        return Err(Error::InvalidParameter(format!(
            "run_vpfp cannot run model {}",
            run.model
        )));
    }
    run_kinetic(run)
}

fn run_kinetic(run: &ModelRun) -> Result<Trajectory> {
    run.validate()?;
    let grid: PhaseGrid = run.grid.build(run.model)?;
    let tab = ImexTableau::by_name(&run.tableau)?;
    let mut f = run.ic.eval(&run.z, &grid)?;
    let landau = matches!(run.model, ModelKind::Vpl | ModelKind::HomLandau);
    let (ops, beta) = if landau {
        let radius = run.kernel.support_radius.unwrap_or(grid.velocity().v_bound());
        let plan = SpectralPlan::new(grid.velocity(), run.kernel.gamma, radius)?
            .with_steady_state(run.kernel.steady_state);
        let beta = run.beta.beta(&f, &plan)?;
        (KineticOps::landau(run.poisson_config(), plan), Some(beta))
    } else {
        (KineticOps::fokker_planck(run.poisson_config()), None)
    };
    let penalization = PenalizationConfig::new(beta.unwrap_or(1.0), run.mu)?;
    let homogeneous = grid.dx_dims() == 0;

    let mut traj = Trajectory {
        model: run.model,
        grid: grid.clone(),
        times: Vec::new(),
        totals: Vec::new(),
        entropy: Vec::new(),
        zeta: Vec::new(),
        field_energy: Vec::new(),
        snapshots: Vec::new(),
        beta,
    };
    let mut efield = ops.efield(&f)?;
    let record = |f: &DistField, e: &[f64], traj: &mut Trajectory, t: f64| -> Result<()> {
        traj.times.push(t);
        traj.totals.push(totals(f)?);
        traj.entropy.push(total_entropy(f));
        if !homogeneous {
            traj.zeta.push(zeta(e, &grid)?);
            traj.field_energy.push(field_energy(e, &grid));
        }
        if wants_output(run, t) {
            traj.snapshots.push(Snapshot {
                time: t,
                f: Some(f.clone()),
                moments: moments_of(f)?,
                efield: e.to_vec(),
            });
        }
        Ok(())
    };
    record(&f, &efield, &mut traj, 0.0)?;

    let cap = run.dt.unwrap_or(f64::INFINITY);
    let mut t = 0.0;
    let mut step = 0usize;
    for stop in stops(run) {
        loop {
            let e_max = efield.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
            let dt_max = cap.min(cfl_dt(&grid, e_max, run.cfl));
            let (dt, hit) = next_step(t, stop, dt_max);
            let cfg = StepConfig::new(dt, run.epsilon, penalization)?;
            let abort = |e: Error| Error::SolverAbort {
                step,
                time: t,
                reason: e.to_string(),
            };
            f = imex_step(&f, &tab, &cfg, &ops).map_err(abort)?;
            efield = ops.efield(&f).map_err(abort)?;
            step += 1;
            t = if hit { stop } else { t + dt };
            f.time = t;
            record(&f, &efield, &mut traj, t)?;
            if hit {
                break;
            }
        }
    }
    Ok(traj)
}
