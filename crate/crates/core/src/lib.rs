//! Multifidelity uncertainty quantification for collisional plasma kinetics.
//!
//! Deterministic solvers for the Vlasov–Poisson–Landau (high fidelity),
//! Vlasov–Poisson–Fokker–Planck and Euler–Poisson (low fidelity) models, a
//! collision-frequency calibration, and a control-variate Monte Carlo
//! estimator with optimal weights. Solver outputs are exchanged through an
//! on-disk sample archive.

pub mod archive;
pub mod calibrate;
pub mod collision;
pub mod error;
pub mod fields;
pub mod harness;
pub mod models;
pub mod timestep;
pub mod transport;
pub mod vrmc;

pub use error::{Error, Result};
