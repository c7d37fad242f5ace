use thiserror::Error;

/// Every failure mode surfaced by the library.
///
/// Numeric payloads are carried as `f64` regardless of the working scalar so that
/// errors stay `'static` and printable.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("kernel evaluated at negative time t = {0}")]
    NegativeTime(f64),

    #[error("delta-type kernels are distributions and cannot be evaluated pointwise")]
    PointwiseDeltaEvaluation,

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence { estimate: f64, tolerance: f64 },

    #[error("frequency range spans {decades:.3} decades, at least one is required")]
    RangeTooNarrow { decades: f64 },

    #[error("operation requires a power-law kernel")]
    NonPowerLawKernel,

    #[error("C_theta * H(0) vanishes: no transition at any finite gain")]
    DegenerateGeometry,

    #[error("no sign change of the characteristic function in the scan window [0, {window}]")]
    NoBracket { window: f64 },

    #[error("gain {gain} is at or above the critical gain {critical}")]
    UnstableRegime { gain: f64, critical: f64 },

    #[error("no feedback damping: the linearized oscillator is undamped and its variance diverges")]
    Undamped,

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("iterative solver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("Fock truncation overflow: top level population {population:e} at t = {time}")]
    TruncationOverflow { population: f64, time: f64 },

    #[error("non-physical state at t = {time}: {reason}")]
    NonPhysicalState { time: f64, reason: String },

    #[error("negative frequency {0} where omega >= 0 is required")]
    NegativeFrequency(f64),

    #[error("kernel-to-bath mapping is poor: residual {residual:e}, fitted exponent {exponent}")]
    PoorFit { residual: f64, exponent: f64 },

    #[error("atomic detuning Delta_a must be non-zero")]
    ZeroDetuning,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable tag used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NegativeTime(_) => "NegativeTime",
            Error::PointwiseDeltaEvaluation => "PointwiseDeltaEvaluation",
            Error::QuadratureNonConvergence { .. } => "QuadratureNonConvergence",
            Error::RangeTooNarrow { .. } => "RangeTooNarrow",
            Error::NonPowerLawKernel => "NonPowerLawKernel",
            Error::DegenerateGeometry => "DegenerateGeometry",
            Error::NoBracket { .. } => "NoBracket",
            Error::UnstableRegime { .. } => "UnstableRegime",
            Error::Undamped => "Undamped",
            Error::DegenerateData(_) => "DegenerateData",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::TruncationOverflow { .. } => "TruncationOverflow",
            Error::NonPhysicalState { .. } => "NonPhysicalState",
            Error::NegativeFrequency(_) => "NegativeFrequency",
            Error::PoorFit { .. } => "PoorFit",
            Error::ZeroDetuning => "ZeroDetuning",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
