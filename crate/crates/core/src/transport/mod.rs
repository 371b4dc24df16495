//! Phase-space transport (WENO5 in x and v) and the self-consistent field.

mod poisson;
mod weno;

pub use poisson::{
    electric_field, periodic_source, poisson_solve, FieldSolution, PoissonBc, PoissonConfig,
};
pub use weno::{weno5, weno_flux_v, weno_flux_x, WENO_EPS};
