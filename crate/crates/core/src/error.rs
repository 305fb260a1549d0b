use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("integration diverged at t = {t}")]
    Diverged { t: f64 },

    #[error("need at least {needed} samples, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("frequency band [{f_lo}, {f_hi}] contains too few periodogram bins")]
    EmptyBand { f_lo: f64, f_hi: f64 },

    #[error("spectrum in band is a single line ({fraction:.3} of band power in one bin); no slope to fit")]
    SpectralLine { fraction: f64 },

    #[error("power-law fit rejected: R^2 = {r2:.4} below gate {gate}")]
    FitRejected { r2: f64, gate: f64 },

    #[error("memory state left [0, 1] (w = {w}); drive is saturating")]
    Saturation { w: f64 },

    #[error("Lambert W argument {x} is below -1/e")]
    LambertDomain { x: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("maze has no path from entrance to exit")]
    NoPath,

    #[error("ambiguous path: {0}")]
    AmbiguousPath(String),

    #[error("cell ({row}, {col}) is outside a {rows}x{cols} array")]
    IndexOutOfRange { row: usize, col: usize, rows: usize, cols: usize },

    #[error("cell resistance {resistance} is inside the read guard band")]
    AmbiguousBit { resistance: f64 },

    #[error("target is not realizable; infeasible entries: {entries:?}")]
    Unrealizable { entries: Vec<(usize, usize)> },

    #[error("weight change {delta} is unreachable from the mid-range state")]
    Unreachable { delta: f64 },

    #[error("plant model denominator crossed zero at t = {t}")]
    DenominatorCrossing { t: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field: field.into(), reason: reason.into() }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Diverged { .. }
                | Error::EmptyBand { .. }
                | Error::SpectralLine { .. }
                | Error::FitRejected { .. }
                | Error::Saturation { .. }
                | Error::Singular(_)
                | Error::Eigen(_)
                | Error::AmbiguousPath(_)
                | Error::AmbiguousBit { .. }
                | Error::DenominatorCrossing { .. }
        )
    }
}
