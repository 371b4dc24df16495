//! Euler–Poisson finite-volume solver: component-wise WENO5 reconstruction,
//! local Lax–Friedrichs flux, SSP-RK2 in time, field source from the Poisson
//! solve.
//!
//! State per x-node: `(rho, rho u_x, rho u_y, E)` with `E = 1/2 rho |u|^2 + d_v/2 p`
//! and `p = rho T`, i.e. `gamma = 1 + 2 / d_v`.

use super::kinetic::field_energy;
use super::{next_step, stops, wants_output, ModelKind, ModelRun, Snapshot, Trajectory};
use crate::error::{Error, Result};
use crate::fields::{MomentSet, Moments, PhaseGrid};
use crate::transport::{poisson_solve, weno5, PoissonConfig};
use crate::vrmc::zeta;

type State = [f64; 4];

fn pressure(u: &State, dims: usize) -> f64 {
    let kinetic = 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0];
    2.0 / dims as f64 * (u[3] - kinetic)
}

fn physical(u: &State, dims: usize) -> bool {
    u[0] > 0.0 && pressure(u, dims) > 0.0 && u.iter().all(|v| v.is_finite())
}

fn flux(u: &State, dims: usize) -> State {
    let p = pressure(u, dims);
    let vx = u[1] / u[0];
    [u[1], u[1] * vx + p, u[2] * vx, vx * (u[3] + p)]
}

fn signal_speed(u: &State, dims: usize) -> f64 {
    let gamma = 1.0 + 2.0 / dims as f64;
    (u[1] / u[0]).abs() + (gamma * pressure(u, dims) / u[0]).sqrt()
}

fn to_states(m: &MomentSet) -> Vec<State> {
    m.nodes.iter().map(|n| n.as_array()).collect()
}

fn from_states(u: &[State], dims: usize) -> MomentSet {
    MomentSet {
        dims,
        nodes: u.iter().map(|s| Moments::from_array(*s)).collect(),
    }
}

fn check(u: &[State], dims: usize) -> Result<()> {
    for (node, s) in u.iter().enumerate() {
        if !(s[0] > 0.0) {
            return Err(Error::VacuumState { node, rho: s[0] });
        }
        if !physical(s, dims) {
            return Err(Error::NonPhysicalTemperature);
        }
    }
    Ok(())
}

/// Time derivative of the fluid state and the field it was computed with.
pub fn ep_rhs(m: &MomentSet, grid: &PhaseGrid, poisson: &PoissonConfig) -> Result<(MomentSet, Vec<f64>)> {
    let dims = m.dims;
    let u = to_states(m);
    let n = u.len();
    if n != grid.nx() {
        return Err(Error::ShapeMismatch(format!(
            "state has {n} nodes, grid has {}",
            grid.nx()
        )));
    }
    check(&u, dims)?;
    let e = poisson_solve(&m.rho(), poisson, grid)?.e;
    let periodic = grid.x_periodic();
    let cell = |k: isize| -> &State {
        let n = n as isize;
        let k = if periodic { k.rem_euclid(n) } else { k.clamp(0, n - 1) };
        &u[k as usize]
    };
    let recon = |k: isize, c: usize, left: bool| -> f64 {
        if left {
            weno5(cell(k - 3)[c], cell(k - 2)[c], cell(k - 1)[c], cell(k)[c], cell(k + 1)[c])
        } else {
            weno5(cell(k + 2)[c], cell(k + 1)[c], cell(k)[c], cell(k - 1)[c], cell(k - 2)[c])
        }
    };
    // face k sits between cells k - 1 and k
    let faces: Vec<State> = (0..=n as isize)
        .map(|k| {
            let mut l: State = std::array::from_fn(|c| recon(k, c, true));
            let mut r: State = std::array::from_fn(|c| recon(k, c, false));
            if !physical(&l, dims) || !physical(&r, dims) {
                l = *cell(k - 1);
                r = *cell(k);
            }
            let (fl, fr) = (flux(&l, dims), flux(&r, dims));
            let a = signal_speed(&l, dims).max(signal_speed(&r, dims));
            std::array::from_fn(|c| 0.5 * (fl[c] + fr[c]) - 0.5 * a * (r[c] - l[c]))
        })
        .collect();
    let dx = grid.dx();
    let rhs: Vec<State> = (0..n)
        .map(|i| {
            let mut d: State = std::array::from_fn(|c| -(faces[i + 1][c] - faces[i][c]) / dx);
            d[1] += u[i][0] * e[i];
            d[3] += u[i][1] * e[i];
            d
        })
        .collect();
    Ok((from_states(&rhs, dims), e))
}

fn axpy(a: &[State], b: &[State], s: f64) -> Vec<State> {
    a.iter()
        .zip(b)
        .map(|(x, y)| std::array::from_fn(|c| x[c] + s * y[c]))
        .collect()
}

/// One SSP-RK2 (Heun) step.
pub fn ep_step(m: &MomentSet, grid: &PhaseGrid, poisson: &PoissonConfig, dt: f64) -> Result<MomentSet> {
    let dims = m.dims;
    let u0 = to_states(m);
    let (k0, _) = ep_rhs(m, grid, poisson)?;
    let u1 = axpy(&u0, &to_states(&k0), dt);
    check(&u1, dims)?;
    let (k1, _) = ep_rhs(&from_states(&u1, dims), grid, poisson)?;
    let u2 = axpy(&u1, &to_states(&k1), dt);
    let out: Vec<State> = u0
        .iter()
        .zip(&u2)
        .map(|(a, b)| std::array::from_fn(|c| 0.5 * (a[c] + b[c])))
        .collect();
    check(&out, dims)?;
    Ok(from_states(&out, dims))
}

/// Largest stable step `cfl dx / max(|u_x| + c)`.
pub fn ep_dt(m: &MomentSet, grid: &PhaseGrid, cfl: f64) -> f64 {
    let speed = m
        .nodes
        .iter()
        .map(|n| signal_speed(&n.as_array(), m.dims))
        .fold(0.0, f64::max);
    cfl * grid.dx() / speed
}

/// Euler–Poisson run; the initial moments are the closed-form moments of
/// the kinetic initial condition.
pub fn run_ep(run: &ModelRun) -> Result<Trajectory> {
    if run.model != ModelKind::Ep {
        return Err(Error::InvalidParameter(format!(
            "run_ep cannot run model {}",
            run.model
        )));
    }
    run.validate()?;
    let grid = run.grid.build(run.model)?;
    let poisson = run.poisson_config();
    let mut m = run.ic.moments(&run.z, &grid)?;
    check(&to_states(&m), m.dims)?;
    let weights = grid.x_weights();
    let mut traj = Trajectory {
        model: run.model,
        grid: grid.clone(),
        times: Vec::new(),
        totals: Vec::new(),
        entropy: Vec::new(),
        zeta: Vec::new(),
        field_energy: Vec::new(),
        snapshots: Vec::new(),
        beta: None,
    };
    let record = |m: &MomentSet, traj: &mut Trajectory, t: f64| -> Result<()> {
        let e = poisson_solve(&m.rho(), &poisson, &grid)?.e;
        traj.times.push(t);
        traj.totals.push(m.totals(&weights));
        traj.zeta.push(zeta(&e, &grid)?);
        traj.field_energy.push(field_energy(&e, &grid));
        if wants_output(run, t) {
            traj.snapshots.push(Snapshot {
                time: t,
                f: None,
                moments: m.clone(),
                efield: e,
            });
        }
        Ok(())
    };
    record(&m, &mut traj, 0.0)?;
    let cap = run.dt.unwrap_or(f64::INFINITY);
    let mut t = 0.0;
    let mut step = 0usize;
    for stop in stops(run) {
        loop {
            let (dt, hit) = next_step(t, stop, cap.min(ep_dt(&m, &grid, run.cfl)));
            m = ep_step(&m, &grid, &poisson, dt).map_err(|e| Error::SolverAbort {
                step,
                time: t,
                reason: e.to_string(),
            })?;
            step += 1;
            t = if hit { stop } else { t + dt };
            record(&m, &mut traj, t)?;
            if hit {
                break;
            }
        }
    }
    Ok(traj)
}
