//! Solver front-ends: Vlasov–Poisson–Landau (high fidelity),
//! Vlasov–Poisson–Fokker–Planck (low fidelity, collision frequency `mu`),
//! Euler–Poisson (hydrodynamic limit) and the space-homogeneous variants.

mod ep;
mod ic;
mod kinetic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use ep::{ep_dt, ep_rhs, ep_step, run_ep};
pub use ic::{GaussianComponent, InitialCondition};
pub use kinetic::{run_vpfp, run_vpl, KineticOps};

use crate::collision::BetaPolicy;
use crate::error::{Error, Result};
use crate::fields::{DistField, MomentSet, Moments, PhaseGrid};
use crate::transport::{PoissonBc, PoissonConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Vpl,
    Vpfp,
    Ep,
    HomLandau,
    HomFp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Vpl,
        ModelKind::Vpfp,
        ModelKind::Ep,
        ModelKind::HomLandau,
        ModelKind::HomFp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Vpl => "vpl",
            ModelKind::Vpfp => "vpfp",
            ModelKind::Ep => "ep",
            ModelKind::HomLandau => "hom-landau",
            ModelKind::HomFp => "hom-fp",
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        matches!(self, ModelKind::HomLandau | ModelKind::HomFp)
    }

    pub fn is_kinetic(&self) -> bool {
        !matches!(self, ModelKind::Ep)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model `{s}`")))
    }
}

/// Grid description as it appears in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "defaults::nx")]
    pub nx: usize,
    #[serde(default = "defaults::x_bounds")]
    pub x_bounds: [f64; 2],
    #[serde(default = "defaults::yes")]
    pub x_periodic: bool,
    #[serde(default = "defaults::dv")]
    pub dv: usize,
    #[serde(default = "defaults::nv")]
    pub nv: usize,
    #[serde(default = "defaults::v_bound")]
    pub v_bound: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nx: defaults::nx(),
            x_bounds: defaults::x_bounds(),
            x_periodic: true,
            dv: defaults::dv(),
            nv: defaults::nv(),
            v_bound: defaults::v_bound(),
        }
    }
}

impl GridSpec {
    /// The phase grid for `model`; homogeneous models always get a single x-node.
    pub fn build(&self, model: ModelKind) -> Result<PhaseGrid> {
        if model.is_homogeneous() {
            PhaseGrid::homogeneous(self.dv, self.nv, self.v_bound)
        } else {
            PhaseGrid::new(self.nx, self.x_bounds, self.x_periodic, self.dv, self.nv, self.v_bound)
        }
    }
}

/// Collision kernel `|z|^(gamma + 2) (I - z z / |z|^2)` cut at `support_radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(default)]
    pub gamma: f64,
    /// Defaults to the velocity half-width.
    #[serde(default)]
    pub support_radius: Option<f64>,
    /// Subtract `Q(M[f])` so that local Maxwellians are exact equilibria.
    #[serde(default = "defaults::steady_state")]
    pub steady_state: bool,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            support_radius: None,
            steady_state: true,
        }
    }
}

mod defaults {
    pub fn steady_state() -> bool {
        true
    }

    pub fn nx() -> usize {
        64
    }
    pub fn x_bounds() -> [f64; 2] {
        [0.0, 4.0 * std::f64::consts::PI]
    }
    pub fn yes() -> bool {
        true
    }
    pub fn dv() -> usize {
        2
    }
    pub fn nv() -> usize {
        32
    }
    pub fn v_bound() -> f64 {
        6.0
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn tableau() -> String {
        "ars222".into()
    }
    pub fn cfl() -> f64 {
        0.4
    }
    pub fn poisson() -> super::PoissonBc {
        super::PoissonBc::Periodic
    }
}

/// Everything that determines one deterministic solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRun {
    pub model: ModelKind,
    #[serde(default)]
    pub grid: GridSpec,
    pub ic: InitialCondition,
    #[serde(default)]
    pub z: Vec<f64>,
    #[serde(default = "defaults::one")]
    pub epsilon: f64,
    #[serde(default = "defaults::one")]
    pub mu: f64,
    #[serde(default)]
    pub beta: BetaPolicy,
    #[serde(default = "defaults::tableau")]
    pub tableau: String,
    pub t_final: f64,
    /// Upper bound on the step; required for homogeneous models.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "defaults::cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub output_times: Vec<f64>,
    #[serde(default = "defaults::poisson")]
    pub poisson: PoissonBc,
    #[serde(default)]
    pub kernel: KernelSpec,
}

impl ModelRun {
    /// A run with default numerics.
    pub fn new(model: ModelKind, ic: InitialCondition, z: Vec<f64>, t_final: f64) -> Self {
        Self {
            model,
            grid: GridSpec::default(),
            ic,
            z,
            epsilon: 1.0,
            mu: 1.0,
            beta: BetaPolicy::default(),
            tableau: defaults::tableau(),
            t_final,
            dt: None,
            cfl: defaults::cfl(),
            output_times: Vec::new(),
            poisson: PoissonBc::Periodic,
            kernel: KernelSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParameter(what));
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return bad(format!("t_final must be > 0, got {}", self.t_final));
        }
        if self.model != ModelKind::Ep && (!(self.epsilon > 0.0) || !self.epsilon.is_finite()) {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if matches!(self.model, ModelKind::Vpfp | ModelKind::HomFp) && !(self.mu > 0.0) {
            return bad(format!("mu must be > 0, got {}", self.mu));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return bad(format!("dt must be > 0, got {dt}"));
            }
        } else if self.model.is_homogeneous() {
            return bad("homogeneous models need an explicit dt".into());
        }
        if !(self.cfl > 0.0) || !self.cfl.is_finite() {
            return bad(format!("cfl must be > 0, got {}", self.cfl));
        }
        if self.output_times.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("output times must be strictly increasing".into());
        }
        if self
            .output_times
            .iter()
            .any(|t| !(*t >= 0.0 && *t <= self.t_final))
        {
            return bad(format!("output times must lie in [0, {}]", self.t_final));
        }
        if !self.model.is_homogeneous() && self.grid.nx < 5 {
            return bad(format!("{} needs nx >= 5", self.model));
        }
        self.ic.validate()
    }

    pub fn poisson_config(&self) -> PoissonConfig {
        PoissonConfig { bc: self.poisson }
    }
}

/// State stored at a requested output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    /// The distribution (kinetic models only).
    pub f: Option<DistField>,
    pub moments: MomentSet,
    /// Electric field at the x-nodes (zero for homogeneous models).
    pub efield: Vec<f64>,
}

/// Output of one run: dense scalar diagnostics at every step plus sparse
/// snapshots at the output times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub model: ModelKind,
    pub grid: PhaseGrid,
    pub times: Vec<f64>,
    /// Spatially integrated moments.
    pub totals: Vec<Moments>,
    /// Spatially integrated kinetic entropy `-int f ln f` (empty for EP).
    pub entropy: Vec<f64>,
    /// `log10 ||E||_{L2}` (empty for homogeneous models).
    pub zeta: Vec<f64>,
    /// Field energy `1/2 int E^2 dx` (empty for homogeneous models).
    pub field_energy: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Penalty strength used by the Landau models.
    pub beta: Option<f64>,
}

/// Largest drift of the conserved totals from their initial values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    pub mass_relative: f64,
    pub momentum_abs: f64,
    /// Kinetic plus field energy.
    pub energy_abs: f64,
}

impl Trajectory {
    pub fn conservation(&self) -> ConservationReport {
        let field = |k: usize| self.field_energy.get(k).copied().unwrap_or(0.0);
        let m0 = self.totals[0];
        let e0 = m0.energy + field(0);
        let mut rep = ConservationReport {
            mass_relative: 0.0,
            momentum_abs: 0.0,
            energy_abs: 0.0,
        };
        for (k, m) in self.totals.iter().enumerate() {
            rep.mass_relative = rep.mass_relative.max((m.rho - m0.rho).abs() / m0.rho.abs());
            rep.momentum_abs = rep
                .momentum_abs
                .max((m.mom[0] - m0.mom[0]).abs())
                .max((m.mom[1] - m0.mom[1]).abs());
            rep.energy_abs = rep.energy_abs.max((m.energy + field(k) - e0).abs());
        }
        rep
    }

    /// Largest one-step entropy decrease (zero when the entropy never drops).
    pub fn max_entropy_decrease(&self) -> f64 {
        self.entropy
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }

    /// The snapshot stored at time `t`, if any.
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.time - t).abs() < 1e-12 * t.abs().max(1.0))
    }
}

/// Runs any model.
pub fn run_model(run: &ModelRun) -> Result<Trajectory> {
    match run.model {
        ModelKind::Vpl | ModelKind::HomLandau => run_vpl(run),
        ModelKind::Vpfp | ModelKind::HomFp => run_vpfp(run),
        ModelKind::Ep => run_ep(run),
    }
}

/// Moves `t` to `stop` when `t` is within round-off of it.
pub(crate) fn next_step(t: f64, stop: f64, dt: f64) -> (f64, bool) {
    let remaining = stop - t;
    if remaining <= dt * (1.0 + 1e-9) {
        (remaining, true)
    } else if remaining < 2.0 * dt {
        // split the remainder evenly instead of leaving a sliver
        (0.5 * remaining, false)
    } else {
        (dt, false)
    }
}

/// Output times after `t`, and the final time.
pub(crate) fn stops(run: &ModelRun) -> Vec<f64> {
    let mut s: Vec<f64> = run.output_times.iter().copied().filter(|t| *t > 0.0).collect();
    if s.last().is_none_or(|t| *t < run.t_final) {
        s.push(run.t_final);
    }
    s
}

pub(crate) fn wants_output(run: &ModelRun, t: f64) -> bool {
    run.output_times.iter().any(|o| (o - t).abs() <= 1e-12 * t.abs().max(1.0))
}
