//! Experiment orchestration behind the `kuq` command line: sample sweeps
//! into archives, collision-frequency calibration, control-variate
//! estimation and report tables.

mod config;
mod report;

use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;

use crate::archive::{ArchiveWriter, Manifest, SampleArchive};
use crate::calibrate::{calibrate_mu, Calibration, Norm};
use crate::collision::SpectralPlan;
use crate::error::{Error, Result};
use crate::fields::{PhaseGrid, RandomSpace};
use crate::models::{run_model, ModelKind, Trajectory};
use crate::vrmc::{
    estimate_covariances, fit_weights, sample_mean, vrmc_estimate, zeta, RidgePolicy, SampleSet, WeightMode,
};

pub use config::{load_config, preset, Quantity, RunConfig};
pub use report::{read_report, write_tables, EstimateReport, ReferenceInfo, TimeEntry, TABLES};

/// Process exit status for an error: 3 when a solver aborted, 1 for I/O
/// failures, 2 for every validation error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SolverAbort { .. }
        | Error::NonFiniteField
        | Error::NonPhysicalTemperature
        | Error::ImplicitDiverged { .. }
        | Error::VacuumState { .. } => 3,
        Error::Io { .. } => 1,
        _ => 2,
    }
}

/// Number of values a quantity contributes to each archive row.
pub fn quantity_len(q: Quantity, grid: &PhaseGrid) -> usize {
    match q {
        Quantity::F => grid.nx() * grid.velocity().len(),
        Quantity::Rho | Quantity::Temperature => grid.nx(),
        Quantity::Zeta => 1,
    }
}

/// Quadrature weight of every value of a quantity, used for integrated
/// covariances and L1 errors.
pub fn quadrature(q: Quantity, grid: &PhaseGrid) -> Vec<f64> {
    let xw = grid.x_weights();
    match q {
        Quantity::F => {
            let cell = grid.velocity().cell_volume();
            let nv = grid.velocity().len();
            xw.iter().flat_map(|w| std::iter::repeat_n(w * cell, nv)).collect()
        }
        Quantity::Rho | Quantity::Temperature => xw,
        Quantity::Zeta => vec![1.0],
    }
}

/// One `[times, width]` archive row block from a trajectory.
pub fn sample_rows(traj: &Trajectory, quantities: &[Quantity], times: &[f64]) -> Result<Array2<f64>> {
    let width: usize = quantities.iter().map(|q| quantity_len(*q, &traj.grid)).sum();
    let mut out = Array2::zeros((times.len(), width));
    for (r, &t) in times.iter().enumerate() {
        let snap = traj
            .snapshot_at(t)
            .ok_or_else(|| Error::TrajectoryMismatch(format!("no snapshot at t = {t}")))?;
        let mut row = Vec::with_capacity(width);
        for q in quantities {
            match q {
                Quantity::F => {
                    let f = snap
                        .f
                        .as_ref()
                        .ok_or_else(|| Error::TrajectoryMismatch(format!("{} stores no f", traj.model)))?;
                    row.extend(f.values.iter());
                }
                Quantity::Rho => row.extend(snap.moments.rho()),
                Quantity::Temperature => row.extend(snap.moments.temperature()),
                Quantity::Zeta => row.push(zeta(&snap.efield, &traj.grid)?),
            }
        }
        out.row_mut(r).assign(&ndarray::ArrayView1::from(&row));
    }
    Ok(out)
}

/// Draw counts and seeds of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub samples: usize,
    pub seed: u64,
    /// `(L, seed)` of the independent draws averaged into `mean.bin`.
    pub mean: Option<(usize, u64)>,
}

/// Draws evaluated in parallel before their rows are summed in order.
const MEAN_CHUNK: usize = 64;

fn solve(cfg: &RunConfig, z: &[f64]) -> Result<Array2<f64>> {
    let mut run = cfg.run.clone();
    run.z = z.to_vec();
    let traj = run_model(&run)?;
    sample_rows(&traj, &cfg.quantities, &run.output_times)
}

/// Runs the model at `samples` draws of `z` (and optionally the mean draws)
/// and writes a committed archive at `out`.
///
/// Draws are solved in parallel; rows are written and summed in draw order,
/// so the archive bytes do not depend on the thread count.
pub fn run_sweep(cfg: &RunConfig, sweep: &Sweep, out: &Path) -> Result<SampleArchive> {
    let run = &cfg.run;
    if run.output_times.is_empty() {
        return Err(Error::InvalidParameter("archives need at least one output time".into()));
    }
    if sweep.samples == 0 && sweep.mean.is_none() {
        return Err(Error::InvalidParameter("nothing to run: no samples and no mean draws".into()));
    }
    let grid = run.grid.build(run.model)?;
    let space = RandomSpace::new(run.ic.z_bounds(), sweep.seed)?;
    let layout: Vec<(&str, usize)> = cfg
        .quantities
        .iter()
        .map(|q| (q.name(), quantity_len(*q, &grid)))
        .collect();
    let mut manifest = Manifest::new(
        run.model.name(),
        run.ic.id(),
        run.grid.clone(),
        run.epsilon,
        run.mu,
        space.clone(),
        run.output_times.clone(),
        &layout,
    );
    manifest.config =
        Some(serde_json::to_value(cfg).map_err(|e| Error::Manifest(format!("config does not serialise: {e}")))?);

    let draws = space.draw(sweep.samples);
    let rows = draws
        .par_iter()
        .map(|z| solve(cfg, z))
        .collect::<Result<Vec<_>>>()?;
    let mut writer = ArchiveWriter::create(out, manifest)?;
    for (k, (z, data)) in draws.iter().zip(&rows).enumerate() {
        writer.write_sample(k, z, data)?;
    }
    if let Some((l, seed)) = sweep.mean {
        if l == 0 {
            return Err(Error::InvalidParameter("mean needs at least one draw".into()));
        }
        let draws = space.with_seed(seed).draw(l);
        let mut sum = Array2::<f64>::zeros(rows.first().map_or((run.output_times.len(), 0), |r| r.dim()));
        for chunk in draws.chunks(MEAN_CHUNK) {
            let block = chunk.par_iter().map(|z| solve(cfg, z)).collect::<Result<Vec<_>>>()?;
            for b in block {
                if sum.dim() != b.dim() {
                    sum = Array2::zeros(b.dim());
                }
                sum += &b;
            }
        }
        writer.write_mean(&(sum / l as f64), l, seed)?;
    }
    writer.finish()
}

/// Candidate frequencies from a spec over `1/mu`: `lo..hi` (integers),
/// `log:lo:hi:n` (log-spaced) or a comma-separated list.
pub fn parse_mu_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::InvalidParameter(format!("mu grid `{spec}`: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let inv: Vec<f64> = if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected log:lo:hi:n"));
        }
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| bad("n must be an integer"))?;
        if n < 2 || !(lo > 0.0) || !(hi > lo) {
            return Err(bad("needs 0 < lo < hi and n >= 2"));
        }
        (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect()
    } else if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad("range bounds must be integers"))?;
        let hi: usize = hi.trim().parse().map_err(|_| bad("range bounds must be integers"))?;
        if lo == 0 || hi < lo {
            return Err(bad("needs 1 <= lo <= hi"));
        }
        (lo..=hi).map(|k| k as f64).collect()
    } else {
        spec.split(',').map(num).collect::<Result<_>>()?
    };
    if inv.is_empty() || inv.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
        return Err(bad("values of 1/mu must be positive"));
    }
    Ok(inv.iter().map(|m| 1.0 / m).collect())
}

fn archive_model(archive: &SampleArchive) -> Result<ModelKind> {
    archive.manifest.model.parse()
}

fn archive_config(archive: &SampleArchive) -> Option<RunConfig> {
    archive
        .manifest
        .config
        .as_ref()
        .and_then(|v| serde_json::from_value(v.clone()).ok())
}

fn archive_grid(archive: &SampleArchive) -> Result<PhaseGrid> {
    archive.manifest.grid.build(archive_model(archive)?)
}

/// Calibrates `mu` against the Landau operator over every velocity slice of
/// every stored distribution in the archive.
pub fn calibrate_archive(root: &Path, mu_grid: &[f64], norm: Norm) -> Result<Calibration> {
    let archive = crate::archive::validate_archive(root)?;
    let grid = archive_grid(&archive)?;
    let q = archive.manifest.quantity(Quantity::F.name())?.clone();
    let kernel = archive_config(&archive).map(|c| c.run.kernel).unwrap_or_default();
    let velocity = grid.velocity();
    let radius = kernel.support_radius.unwrap_or(velocity.v_bound());
    let plan = SpectralPlan::new(velocity, kernel.gamma, radius)?;
    let nv = velocity.len();
    let mut dataset = Vec::new();
    for k in 0..archive.len() {
        let (_, data) = archive.read_sample(k)?;
        for row in data.rows() {
            let f = &row.as_slice().expect("row-major")[q.offset..q.offset + q.len];
            dataset.extend(f.chunks_exact(nv).map(<[f64]>::to_vec));
        }
    }
    calibrate_mu(&dataset, &plan, norm, mu_grid)
}

/// Inputs of one control-variate estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRequest {
    pub high: PathBuf,
    pub lows: Vec<PathBuf>,
    /// Archives holding each surrogate's mean record; defaults to the lows.
    pub means: Vec<PathBuf>,
    /// Defaults to the first quantity of the high-fidelity archive.
    pub quantity: Option<String>,
    pub mode: WeightMode,
    /// Dense high-fidelity archive whose sample mean is the reference.
    pub reference: Option<PathBuf>,
}

fn quantity_sets(archive: &SampleArchive, name: &str) -> Result<Vec<SampleSet>> {
    let q = archive.manifest.quantity(name)?.clone();
    archive
        .all_rows()?
        .into_iter()
        .map(|set| {
            let values = set.values.iter().map(|r| r[q.offset..q.offset + q.len].to_vec()).collect();
            SampleSet::new(set.z, values)
        })
        .collect()
}

fn same_layout(a: &SampleArchive, b: &SampleArchive, name: &str) -> Result<()> {
    if a.manifest.output_times != b.manifest.output_times {
        return Err(Error::Manifest(format!(
            "{} and {} have different output times",
            a.root().display(),
            b.root().display()
        )));
    }
    let (qa, qb) = (a.manifest.quantity(name)?, b.manifest.quantity(name)?);
    if qa.len != qb.len {
        return Err(Error::Manifest(format!(
            "`{name}` has {} values in {} but {} in {}",
            qa.len,
            a.root().display(),
            qb.len,
            b.root().display()
        )));
    }
    Ok(())
}

fn weighted_l1(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), w)| w * (x - y).abs()).sum()
}

fn weighted_sum(v: &[f64], w: &[f64]) -> f64 {
    v.iter().zip(w).map(|(x, w)| x * w).sum()
}

/// The control-variate estimate at every output time.
pub fn estimate(req: &EstimateRequest) -> Result<EstimateReport> {
    if req.lows.is_empty() {
        return Err(Error::InvalidParameter("at least one --low archive is needed".into()));
    }
    let mean_paths = if req.means.is_empty() { &req.lows } else { &req.means };
    if mean_paths.len() != req.lows.len() {
        return Err(Error::InvalidParameter(format!(
            "{} mean archives for {} surrogates",
            mean_paths.len(),
            req.lows.len()
        )));
    }
    let high = crate::archive::validate_archive(&req.high)?;
    let name = match &req.quantity {
        Some(q) => q.clone(),
        None => high
            .manifest
            .quantities
            .first()
            .map(|q| q.name.clone())
            .ok_or_else(|| Error::Manifest("archive has no quantities".into()))?,
    };
    let lows = req
        .lows
        .iter()
        .map(crate::archive::validate_archive)
        .collect::<Result<Vec<_>>>()?;
    for low in &lows {
        high.check_pairing(low)?;
        same_layout(&high, low, &name)?;
    }
    let mean_archives = mean_paths
        .iter()
        .map(crate::archive::validate_archive)
        .collect::<Result<Vec<_>>>()?;
    for m in &mean_archives {
        same_layout(&high, m, &name)?;
    }
    let reference = req
        .reference
        .as_ref()
        .map(crate::archive::validate_archive)
        .transpose()?;
    if let Some(r) = &reference {
        same_layout(&high, r, &name)?;
    }

    let quantity: Quantity = name.parse()?;
    let weights = quadrature(quantity, &archive_grid(&high)?);
    let high_sets = quantity_sets(&high, &name)?;
    let low_sets = lows.iter().map(|a| quantity_sets(a, &name)).collect::<Result<Vec<_>>>()?;
    let ref_means = match &reference {
        Some(r) => Some(quantity_sets(r, &name)?.iter().map(sample_mean).collect::<Vec<_>>()),
        None => None,
    };

    let policy = RidgePolicy::default();
    let mut times = Vec::with_capacity(high_sets.len());
    for (t, h) in high_sets.iter().enumerate() {
        let ls: Vec<&SampleSet> = low_sets.iter().map(|s| &s[t]).collect();
        let means = mean_archives
            .iter()
            .map(|a| a.control_mean(&name, t))
            .collect::<Result<Vec<_>>>()?;
        let cov = estimate_covariances(h, &ls)?;
        let fitted = fit_weights(&cov, req.mode, &weights, &policy)?;
        let mrefs: Vec<_> = means.iter().collect();
        let res = vrmc_estimate(h, &ls, &mrefs, &fitted.field)?;
        let predicted = match fitted.mode {
            WeightMode::Global => fitted.predicted_variance[0],
            _ => weighted_sum(&fitted.predicted_variance, &weights),
        };
        let (mc_error, vrmc_error) = match &ref_means {
            Some(r) => (
                Some(weighted_l1(&res.mc, &r[t], &weights)),
                Some(weighted_l1(&res.estimate, &r[t], &weights)),
            ),
            None => (None, None),
        };
        times.push(TimeEntry {
            time: high.manifest.output_times[t],
            lambda: fitted.field.mean(),
            var_mc: weighted_sum(&res.var_mc, &weights),
            var_cv: weighted_sum(&res.var_cv, &weights),
            predicted_variance: predicted,
            regularized: fitted.fits.iter().any(|f| f.regularization > 0.0),
            degenerate: fitted.fits.iter().any(|f| f.degenerate),
            mc_error,
            vrmc_error,
            estimate: res.estimate,
            mc: res.mc,
        });
    }
    Ok(EstimateReport {
        high: req.high.display().to_string(),
        lows: req.lows.iter().map(|p| p.display().to_string()).collect(),
        quantity: name,
        mode: req.mode.resolve(high.len()),
        k: high.len(),
        l: means_l(&mean_archives),
        reference: reference.map(|r| ReferenceInfo {
            archive: r.root().display().to_string(),
            k_ref: r.len(),
        }),
        times,
    })
}

fn means_l(archives: &[SampleArchive]) -> Vec<usize> {
    archives
        .iter()
        .map(|a| a.manifest.mean.as_ref().map_or(0, |m| m.l))
        .collect()
}
