use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no Bessel Gaussian field of order {nu} exists in dimension {d} (requires nu >= {})", *d as f64 / 2.0 - 1.0)]
    NonexistentField { d: usize, nu: f64 },

    #[error(
        "quadrature did not converge: estimated error {achieved:e} exceeds tolerance {requested:e} (value {value})"
    )]
    Quadrature { value: f64, achieved: f64, requested: f64 },

    #[error("observable is not finite at quadrature node x = {node}: got {value}")]
    NonFiniteObservable { node: f64, value: f64 },

    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("grid for t = {t} has {points} lattice points, above the cap of {cap}; increase h")]
    GridTooLarge { t: f64, points: usize, cap: usize },

    #[error("work budget exceeded at t = {t}: {needed:e} point-wave-replications > cap {cap:e}")]
    BudgetExceeded { t: f64, needed: f64, cap: f64 },

    #[error("sample variance is zero; the normalized functional is degenerate")]
    ZeroVariance,

    #[error("rate fit needs at least 3 scales spanning a factor of 8 (got {count} spanning {span:.3})")]
    InsufficientSpan { count: usize, span: f64 },

    #[error("case not covered by the spectral central limit theorem: {0}")]
    ExcludedCase(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {value}")))
    }
}
