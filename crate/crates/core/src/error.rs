use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("no bracket: lambda(beta_max = {beta_max:e}) = {lambda} <= 1")]
    NoBracket { beta_max: f64, lambda: f64 },

    #[error("lambda(beta) not monotone: lambda({beta_lo}) = {lambda_lo} > lambda({beta_hi}) = {lambda_hi}")]
    NonMonotone {
        beta_lo: f64,
        lambda_lo: f64,
        beta_hi: f64,
        lambda_hi: f64,
    },

    #[error("positivity violated: {name} = {value:e}")]
    PositivityViolation { name: &'static str, value: f64 },

    #[error("domain too small: eigenfunction mass {boundary_mass:e} near the boundary of radius {domain_radius}")]
    DomainTooSmall {
        boundary_mass: f64,
        domain_radius: f64,
    },

    #[error("r = {r} outside tabulated range [{first}, {last}]")]
    TableRange { r: f64, first: f64, last: f64 },

    #[error("momentum grid not guarded: min |p^2 - mu| = {min_gap:e} < {epsilon:e}")]
    GuardViolation { min_gap: f64, epsilon: f64 },

    #[error("radial functions live on different grids")]
    GridMismatch,

    #[error("z = {re} + {im}i lies within {distance:e} of a pole of tanh")]
    PoleProximity { re: f64, im: f64, distance: f64 },

    #[error("V^(1/2) phi vanishes identically; t(p) undefined")]
    ZeroNorm,

    #[error("no positive minorant constant: 1 - R({p}) = {value:e}")]
    MinorantViolation { p: f64, value: f64 },

    #[error("{what} did not converge: refinement change {delta:e}")]
    Unconverged { what: &'static str, delta: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI. Each failure class gets its own code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::TableRange { .. } | Error::InvalidArgument(_) => 2,
            Error::AssumptionViolation(_) => 3,
            Error::NoBracket { .. } | Error::NonMonotone { .. } => 4,
            Error::PositivityViolation { .. } => 5,
            Error::DomainTooSmall { .. } => 6,
            Error::Io { .. } | Error::Json(_) => 8,
            Error::GuardViolation { .. }
            | Error::GridMismatch
            | Error::PoleProximity { .. }
            | Error::ZeroNorm
            | Error::MinorantViolation { .. }
            | Error::Unconverged { .. } => 9,
        }
    }

    /// Stable machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "ConfigError",
            Error::AssumptionViolation(_) => "AssumptionViolation",
            Error::NoBracket { .. } => "NoBracket",
            Error::NonMonotone { .. } => "NonMonotone",
            Error::PositivityViolation { .. } => "PositivityViolation",
            Error::DomainTooSmall { .. } => "DomainTooSmall",
            Error::TableRange { .. } => "TableRange",
            Error::GuardViolation { .. } => "GuardViolation",
            Error::GridMismatch => "GridMismatch",
            Error::PoleProximity { .. } => "PoleProximity",
            Error::ZeroNorm => "ZeroNorm",
            Error::MinorantViolation { .. } => "MinorantViolation",
            Error::Unconverged { .. } => "Unconverged",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io { .. } => "IoError",
            Error::Json(_) => "JsonError",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
