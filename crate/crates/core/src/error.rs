use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite field")]
    NonFiniteField,
    #[error("non-physical temperature")]
    NonPhysicalTemperature,
    #[error("plan/grid mismatch")]
    PlanGridMismatch,
    #[error("implicit stage diverged (relative residual {residual:.3e} after {iterations} iterations)")]
    ImplicitDiverged { residual: f64, iterations: usize },
    #[error("no spatial dimension")]
    NoSpatialDimension,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("vacuum state at x-node {node} (rho = {rho:e})")]
    VacuumState { node: usize, rho: f64 },
    #[error("solver aborted at step {step} (t = {time}): {reason}")]
    SolverAbort { step: usize, time: f64, reason: String },
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("sample pairing mismatch at sample {index}")]
    PairingMismatch { index: usize },
    #[error("checksum mismatch in {}", path.display())]
    ChecksumMismatch { path: PathBuf },
    #[error("malformed payload {}: {reason}", path.display())]
    MalformedPayload { path: PathBuf, reason: String },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("unknown initial condition `{0}`")]
    UnknownInitialCondition(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("trajectory mismatch: {0}")]
    TrajectoryMismatch(String),
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest error: {0}")]
    Manifest(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
