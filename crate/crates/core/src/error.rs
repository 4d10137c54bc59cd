use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid coupling configuration: {0}")]
    InvalidConfig(String),

    #[error("special times need zero detuning, got Omega = {omega}")]
    NotResonant { omega: f64 },

    #[error("cat state has zero norm (alpha = {alpha_abs}, Phi = {phase})")]
    DegenerateCat { alpha_abs: f64, phase: f64 },

    #[error("coherent amplitude |{value}| exceeds the cap {cap}")]
    AmplitudeCap { value: f64, cap: f64 },

    #[error("branch count {count} outside 1..={cap}")]
    BranchCount { count: usize, cap: usize },

    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("exponent with real part {exponent} exceeds the overflow guard")]
    OverflowGuard { exponent: f64 },

    #[error("Fock space of dimension {dim} exceeds the guard {limit}")]
    CutoffTooLarge { dim: u64, limit: u64 },

    #[error("truncation deficiency {deficiency:e} exceeds tolerance {tol:e} at cutoff {n_max}")]
    TruncationBreach { deficiency: f64, tol: f64, n_max: usize },

    #[error("oracle check failed at t = {t} with cutoff {n_max}: {reason}")]
    OracleFailure { t: f64, n_max: usize, reason: String },

    #[error("Fock states have different cutoffs")]
    CutoffMismatch,

    #[error("{0}")]
    InvalidArgument(String),
}

impl Error {
    /// Process exit status for this error: 3 for oracle and truncation
    /// failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::TruncationBreach { .. } | Error::OracleFailure { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
