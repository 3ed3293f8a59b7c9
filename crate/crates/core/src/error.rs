use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("model `{0}` is not admissible for this operation")]
    ModelNotAdmissible(String),

    /// The discretized operator has an eigenvalue too close to one for the
    /// determinant to be resolved in double precision.
    #[error("near-singular determinant: largest eigenvalue {eig_max} leaves gap {gap:e} below 1")]
    NearSingular { eig_max: f64, gap: f64 },

    #[error("endpoint equation has no sign change on [{lo}, {hi}] (h(lo) = {h_lo}, h(hi) = {h_hi})")]
    EndpointBracket { lo: f64, hi: f64, h_lo: f64, h_hi: f64 },

    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
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
