use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{DistField, Maxwellian, MomentSet, Moments, PhaseGrid};

/// One anisotropic Gaussian of a custom initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianComponent {
    pub rho: f64,
    pub u: [f64; 2],
    pub temps: [f64; 2],
}

/// The named initial data. Every id is a spatial profile times a normalised
/// mixture of Gaussians in velocity, so fluid moments are available in
/// closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "id", deny_unknown_fields)]
pub enum InitialCondition {
    /// Two bumps of width `sigma` at `s(z) +- (d, 0)`, total mass `rho0`,
    /// `s(z) = z_1 (sin 2 pi z_2, cos 2 pi z_2)`, `z in [-1, 1] x [0, 1]`.
    TwoBubble {
        #[serde(default = "defaults::rho0")]
        rho0: f64,
        #[serde(default = "defaults::bubble_d")]
        d: f64,
        #[serde(default = "defaults::sigma")]
        sigma: f64,
    },
    /// `(1 + (4 + 2z) alpha cos kx) M_{1,0,1}`, `z in [0, 1]`.
    LinearLd {
        #[serde(default = "defaults::linear_alpha")]
        alpha: f64,
        #[serde(default = "defaults::k")]
        k: f64,
    },
    /// `(1 + (1 + 3z) alpha cos kx) M_{1,0,1}`, `z in [0, 1]`.
    NonlinearLd {
        #[serde(default = "defaults::nonlinear_alpha")]
        alpha: f64,
        #[serde(default = "defaults::k")]
        k: f64,
    },
    /// `(1 + (4 + 2z) alpha cos kx)` times two counter-streaming Maxwellians
    /// at `+-(d, 0)` with temperature `t0`, `z in [0, 1]`.
    TwoStream {
        #[serde(default = "defaults::linear_alpha")]
        alpha: f64,
        #[serde(default = "defaults::stream_d")]
        d: f64,
        #[serde(default = "defaults::t0")]
        t0: f64,
        #[serde(default = "defaults::stream_k")]
        k: f64,
    },
    /// `(1 + alpha cos kx)` times an explicit table of Gaussians; `z` is unused.
    Custom {
        components: Vec<GaussianComponent>,
        #[serde(default)]
        alpha: f64,
        #[serde(default = "defaults::k")]
        k: f64,
    },
}

mod defaults {
    pub fn rho0() -> f64 {
        0.75
    }
    pub fn bubble_d() -> f64 {
        1.5
    }
    pub fn sigma() -> f64 {
        2.0
    }
    pub fn linear_alpha() -> f64 {
        0.01
    }
    pub fn nonlinear_alpha() -> f64 {
        0.1
    }
    pub fn k() -> f64 {
        0.5
    }
    pub fn stream_d() -> f64 {
        1.3
    }
    pub fn t0() -> f64 {
        0.3
    }
    pub fn stream_k() -> f64 {
        2.0 / 13.0
    }
}

/// Spatial profile `rho_bar (1 + amp cos kx)` and velocity mixture with unit total weight.
struct Separated {
    rho_bar: f64,
    amp: f64,
    k: f64,
    mixture: Vec<GaussianComponent>,
}

impl InitialCondition {
    pub fn two_bubble() -> Self {
        InitialCondition::TwoBubble {
            rho0: defaults::rho0(),
            d: defaults::bubble_d(),
            sigma: defaults::sigma(),
        }
    }

    pub fn linear_ld() -> Self {
        InitialCondition::LinearLd {
            alpha: defaults::linear_alpha(),
            k: defaults::k(),
        }
    }

    pub fn nonlinear_ld() -> Self {
        InitialCondition::NonlinearLd {
            alpha: defaults::nonlinear_alpha(),
            k: defaults::k(),
        }
    }

    pub fn two_stream() -> Self {
        InitialCondition::TwoStream {
            alpha: defaults::linear_alpha(),
            d: defaults::stream_d(),
            t0: defaults::t0(),
            k: defaults::stream_k(),
        }
    }

    /// The homogeneous anisotropic two-Gaussian datum
    /// `3/(16 pi) (exp[-(v_x-1.5)^2/2 - (v_y-0.5)^2/4] + exp[-(v_x+1.5)^2 - (v_y+2.5)^2/2])`.
    pub fn anisotropic_pair() -> Self {
        let c = 3.0 / (16.0 * PI);
        InitialCondition::Custom {
            components: vec![
                GaussianComponent {
                    rho: c * 2.0 * PI * 2.0_f64.sqrt(),
                    u: [1.5, 0.5],
                    temps: [1.0, 2.0],
                },
                GaussianComponent {
                    rho: c * 2.0 * PI * 0.5_f64.sqrt(),
                    u: [-1.5, -2.5],
                    temps: [0.5, 1.0],
                },
            ],
            alpha: 0.0,
            k: defaults::k(),
        }
    }

    /// Looks up an id with its default parameters.
    pub fn by_name(id: &str) -> Result<Self> {
        match id {
            "two_bubble" => Ok(Self::two_bubble()),
            "linear_ld" => Ok(Self::linear_ld()),
            "nonlinear_ld" => Ok(Self::nonlinear_ld()),
            "two_stream" => Ok(Self::two_stream()),
            "anisotropic_pair" => Ok(Self::anisotropic_pair()),
            other => Err(Error::UnknownInitialCondition(other.to_string())),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            InitialCondition::TwoBubble { .. } => "two_bubble",
            InitialCondition::LinearLd { .. } => "linear_ld",
            InitialCondition::NonlinearLd { .. } => "nonlinear_ld",
            InitialCondition::TwoStream { .. } => "two_stream",
            InitialCondition::Custom { .. } => "custom",
        }
    }

    /// Bounds of the random parameters `z`.
    pub fn z_bounds(&self) -> Vec<[f64; 2]> {
        match self {
            InitialCondition::TwoBubble { .. } => vec![[-1.0, 1.0], [0.0, 1.0]],
            _ => vec![[0.0, 1.0]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("{}: {what}", self.id())));
        match *self {
            InitialCondition::TwoBubble { rho0, d, sigma } => {
                if !(rho0 > 0.0) || !(sigma > 0.0) || !d.is_finite() {
                    return bad("needs rho0 > 0, sigma > 0 and finite d");
                }
            }
            InitialCondition::LinearLd { alpha, k } => {
                if !(alpha >= 0.0) || 6.0 * alpha >= 1.0 || !(k > 0.0) {
                    return bad("needs 0 <= 6 alpha < 1 and k > 0");
                }
            }
            InitialCondition::NonlinearLd { alpha, k } => {
                if !(alpha >= 0.0) || 4.0 * alpha >= 1.0 || !(k > 0.0) {
                    return bad("needs 0 <= 4 alpha < 1 and k > 0");
                }
            }
            InitialCondition::TwoStream { alpha, d, t0, k } => {
                if !(alpha >= 0.0) || 6.0 * alpha >= 1.0 || !(k > 0.0) || !(t0 > 0.0) || !d.is_finite() {
                    return bad("needs 0 <= 6 alpha < 1, k > 0, t0 > 0 and finite d");
                }
            }
            InitialCondition::Custom {
                ref components,
                alpha,
                k,
            } => {
                if components.is_empty() {
                    return bad("needs at least one component");
                }
                if components
                    .iter()
                    .any(|c| !(c.rho > 0.0) || !(c.temps[0] > 0.0) || !(c.temps[1] > 0.0))
                {
                    return bad("components need rho > 0 and positive temperatures");
                }
                if !(alpha.abs() < 1.0) || !(k > 0.0) {
                    return bad("needs |alpha| < 1 and k > 0");
                }
            }
        }
        Ok(())
    }

    fn separate(&self, z: &[f64], dims: usize) -> Result<Separated> {
        self.validate()?;
        let bounds = self.z_bounds();
        let inside = z.len() == bounds.len()
            && z.iter().zip(&bounds).all(|(v, b)| *v >= b[0] && *v <= b[1]);
        if !inside {
            return Err(Error::InvalidParameter(format!(
                "{}: z = {z:?} outside {bounds:?}",
                self.id()
            )));
        }
        let gauss = |u: [f64; 2], t: f64| GaussianComponent {
            rho: 1.0,
            u,
            temps: [t, t],
        };
        let sep = match *self {
            InitialCondition::TwoBubble { rho0, d, sigma } => {
                if dims != 2 {
                    return Err(Error::InvalidParameter("two_bubble needs d_v = 2".into()));
                }
                let phase = 2.0 * PI * z[1];
                let s = [z[0] * phase.sin(), z[0] * phase.cos()];
                let t = 0.5 * sigma;
                Separated {
                    rho_bar: rho0,
                    amp: 0.0,
                    k: 1.0,
                    mixture: vec![
                        GaussianComponent { rho: 0.5, ..gauss([s[0] - d, s[1]], t) },
                        GaussianComponent { rho: 0.5, ..gauss([s[0] + d, s[1]], t) },
                    ],
                }
            }
            InitialCondition::LinearLd { alpha, k } => Separated {
                rho_bar: 1.0,
                amp: (4.0 + 2.0 * z[0]) * alpha,
                k,
                mixture: vec![gauss([0.0, 0.0], 1.0)],
            },
            InitialCondition::NonlinearLd { alpha, k } => Separated {
                rho_bar: 1.0,
                amp: (1.0 + 3.0 * z[0]) * alpha,
                k,
                mixture: vec![gauss([0.0, 0.0], 1.0)],
            },
            InitialCondition::TwoStream { alpha, d, t0, k } => Separated {
                rho_bar: 1.0,
                amp: (4.0 + 2.0 * z[0]) * alpha,
                k,
                mixture: vec![
                    GaussianComponent { rho: 0.5, ..gauss([d, 0.0], t0) },
                    GaussianComponent { rho: 0.5, ..gauss([-d, 0.0], t0) },
                ],
            },
            InitialCondition::Custom {
                ref components,
                alpha,
                k,
            } => {
                let total: f64 = components.iter().map(|c| c.rho).sum();
                Separated {
                    rho_bar: total,
                    amp: alpha,
                    k,
                    mixture: components
                        .iter()
                        .map(|c| GaussianComponent { rho: c.rho / total, ..*c })
                        .collect(),
                }
            }
        };
        Ok(sep)
    }

    /// Samples the initial distribution at the random parameters `z`.
    pub fn eval(&self, z: &[f64], grid: &PhaseGrid) -> Result<DistField> {
        let dims = grid.dv_dims();
        let sep = self.separate(z, dims)?;
        let vg = grid.velocity();
        let mut profile = vec![0.0; vg.len()];
        for c in &sep.mixture {
            let m = Maxwellian::anisotropic(c.rho, c.u, c.temps, dims)?;
            for (p, idx) in profile.iter_mut().zip(0..) {
                *p += m.eval(vg.coords(idx));
            }
        }
        let density = spatial_density(&sep, grid);
        let values = Array2::from_shape_fn(grid.shape(), |(i, k)| density[i] * profile[k]);
        DistField::from_initial(grid.clone(), values)
    }

    /// Fluid moments of the initial distribution, integrated over the whole
    /// velocity space in closed form.
    pub fn moments(&self, z: &[f64], grid: &PhaseGrid) -> Result<MomentSet> {
        let dims = grid.dv_dims();
        let sep = self.separate(z, dims)?;
        let mut mean_u = [0.0; 2];
        let mut mean_e = 0.0;
        for c in &sep.mixture {
            let u = if dims == 1 { [c.u[0], 0.0] } else { c.u };
            let tr = if dims == 1 { c.temps[0] } else { c.temps[0] + c.temps[1] };
            mean_u[0] += c.rho * u[0];
            mean_u[1] += c.rho * u[1];
            mean_e += 0.5 * c.rho * (u[0] * u[0] + u[1] * u[1] + tr);
        }
        let nodes = spatial_density(&sep, grid)
            .into_iter()
            .map(|rho| Moments {
                rho,
                mom: [rho * mean_u[0], rho * mean_u[1]],
                energy: rho * mean_e,
            })
            .collect();
        Ok(MomentSet { dims, nodes })
    }
}

fn spatial_density(sep: &Separated, grid: &PhaseGrid) -> Vec<f64> {
    (0..grid.nx())
        .map(|i| {
            let x = if grid.dx_dims() == 0 { 0.0 } else { grid.x_node(i) };
            sep.rho_bar * (1.0 + sep.amp * (sep.k * x).cos())
        })
        .collect()
}
