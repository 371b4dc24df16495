use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::{fp_p, landau_q, SpectralPlan};
use crate::error::{Error, Result};
use crate::fields::{slice_moments, DistField, VelocityGrid};
use crate::models::Trajectory;

/// Norm used to compare collision operators or distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    L1,
    Linf,
}

impl Norm {
    /// Norm of `a - b` with quadrature weight `w` per entry (ignored for `Linf`).
    fn distance(self, a: &[f64], b: &[f64], w: f64) -> f64 {
        let d = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Norm::L1 => d.sum::<f64>() * w,
            Norm::Linf => d.fold(0.0, f64::max),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "linf" => Ok(Norm::Linf),
            _ => Err(Error::InvalidParameter(format!("unknown norm `{s}`"))),
        }
    }
}

/// Outcome of a grid search over the collision frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub mu_star: f64,
    /// `(mu, mean error)` in ascending `mu`.
    pub curve: Vec<(f64, f64)>,
    pub norm: Norm,
}

impl Calibration {
    /// Two-column table `(1/mu, error)`, one row per candidate.
    pub fn table(&self) -> String {
        let mut out = String::from("mu_inv,error\n");
        for (mu, e) in &self.curve {
            out.push_str(&format!("{},{:e}\n", 1.0 / mu, e));
        }
        out
    }
}

/// Relative band inside which two objective values count as equal.
const TIE_TOL: f64 = 1e-12;

/// Picks the candidate `mu` minimising the dataset mean of `||mu P(f) - Q(f, f)||`.
///
/// Ties are broken toward the smallest `mu`.
pub fn calibrate_mu(
    dataset: &[Vec<f64>],
    plan: &SpectralPlan,
    norm: Norm,
    mu_grid: &[f64],
) -> Result<Calibration> {
    calibrate_against(dataset, plan.grid(), |f| landau_q(f, plan), norm, mu_grid)
}

/// Grid search of `mu P(f)` against an arbitrary target operator.
pub fn calibrate_against<T>(
    dataset: &[Vec<f64>],
    grid: &VelocityGrid,
    target: T,
    norm: Norm,
    mu_grid: &[f64],
) -> Result<Calibration>
where
    T: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if mu_grid.is_empty() {
        return Err(Error::InvalidParameter("empty mu grid".into()));
    }
    if let Some(mu) = mu_grid.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
        return Err(Error::InvalidParameter(format!("mu candidates must be positive, got {mu}")));
    }
    let pairs = dataset
        .par_iter()
        .map(|f| operator_pair(f, grid, &target))
        .collect::<Result<Vec<_>>>()?;

    let mut mus = mu_grid.to_vec();
    mus.sort_by(f64::total_cmp);
    mus.dedup();
    let w = grid.cell_volume();
    let curve: Vec<(f64, f64)> = mus
        .par_iter()
        .map(|&mu| {
            let errs: Vec<f64> = pairs
                .iter()
                .map(|(p, q)| {
                    let mp: Vec<f64> = p.iter().map(|x| mu * x).collect();
                    norm.distance(&mp, q, w)
                })
                .collect();
            (mu, sorted_sum(errs) / pairs.len() as f64)
        })
        .collect();

    let mut best = curve[0];
    for &(mu, e) in &curve[1..] {
        if e < best.1 - TIE_TOL * best.1.abs() {
            best = (mu, e);
        }
    }
    Ok(Calibration {
        mu_star: best.0,
        curve,
        norm,
    })
}

/// Order-independent sum: magnitudes are added in ascending order.
fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn operator_pair<T>(f: &[f64], grid: &VelocityGrid, target: &T) -> Result<(Vec<f64>, Vec<f64>)>
where
    T: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if f.len() != grid.len() {
        return Err(Error::PlanGridMismatch);
    }
    let m = slice_moments(f, grid)?;
    Ok((fp_p(f, &m, grid)?, target(f)?))
}

/// Velocity slices of every stored snapshot, in time order.
pub fn calibration_dataset(traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.snapshots
        .iter()
        .filter_map(|s| s.f.as_ref())
        .flat_map(|f| (0..f.grid.nx()).map(move |i| f.slice(i).to_vec()))
        .collect()
}

/// `1/k` for `k` in `lo..=hi`, the inverse-frequency sweep.
pub fn inverse_mu_grid(lo: usize, hi: usize) -> Vec<f64> {
    (lo.max(1)..=hi).map(|k| 1.0 / k as f64).collect()
}

/// Phase-space distance `||f_a(t) - f_b(t)||` at every shared snapshot time.
pub fn model_discrepancy(a: &Trajectory, b: &Trajectory, norm: Norm) -> Result<Vec<(f64, f64)>> {
    if a.grid != b.grid {
        return Err(Error::TrajectoryMismatch("grids differ".into()));
    }
    if a.snapshots.len() != b.snapshots.len() {
        return Err(Error::TrajectoryMismatch(format!(
            "{} vs {} snapshots",
            a.snapshots.len(),
            b.snapshots.len()
        )));
    }
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(sa, sb)| {
            if sa.time != sb.time {
                return Err(Error::TrajectoryMismatch(format!(
                    "snapshot times {} and {}",
                    sa.time, sb.time
                )));
            }
            let (Some(fa), Some(fb)) = (&sa.f, &sb.f) else {
                return Err(Error::TrajectoryMismatch(format!(
                    "no distribution stored at t = {}",
                    sa.time
                )));
            };
            Ok((sa.time, field_distance(fa, fb, norm)))
        })
        .collect()
}

/// Phase-space norm of `a - b` on a shared grid.
pub fn field_distance(a: &DistField, b: &DistField, norm: Norm) -> f64 {
    let cell = a.grid.velocity().cell_volume();
    let per_x: Vec<f64> = (0..a.grid.nx())
        .map(|i| norm.distance(a.slice(i), b.slice(i), cell))
        .collect();
    match norm {
        Norm::L1 => per_x.iter().zip(a.grid.x_weights()).map(|(d, w)| d * w).sum(),
        Norm::Linf => per_x.into_iter().fold(0.0, f64::max),
    }
}
