use thiserror::Error;

/// Errors raised by the library surface.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{name} = {value} is outside its valid domain ({domain})")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("modulus must have degree >= 1")]
    ZeroModulus,

    #[error("malformed bit string: {0}")]
    Parse(String),

    #[error("infeasible configuration: {0}")]
    Infeasible(#[from] Infeasibility),
}

/// Reasons a numerical pipeline or likely-set construction cannot proceed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Infeasibility {
    #[error("no effective events (N_t = 0)")]
    NoEvents,
    #[error("test sample exhausts the effective events (N_t <= T)")]
    SampleExhausted,
    #[error("raw key length below 2 bits")]
    KeyTooShort,
    #[error("error rate sum must lie below 0.5")]
    ErrorRateTooHigh,
    #[error("Chernoff equation has no root in (0, 1)")]
    NoChernoffRoot,
    #[error("phase-slice window count below one")]
    WindowCount,
    #[error("single-photon yield lower bound is zero")]
    ZeroSinglePhoton,
    #[error("single-photon fraction is zero")]
    ZeroDelta1,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_domain(
    name: &'static str,
    value: f64,
    ok: bool,
    domain: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain,
        })
    }
}
