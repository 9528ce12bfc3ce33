use thiserror::Error;

/// Errors raised by the radial Liouville solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite sample at node {index} (r = {r})")]
    NonFiniteSample { index: usize, r: f64 },

    #[error("potential not defined at r = {r}: {reason}")]
    Domain { r: f64, reason: String },

    #[error("mass did not converge at r_max = {r_max} (tail estimate {tail})")]
    MassNotConverged { r_max: f64, tail: f64 },

    #[error("profile blew up at r = {r} (psi = {psi})")]
    BlowUp { r: f64, psi: f64 },

    #[error("integrator step size underflow at r = {r}")]
    StepUnderflow { r: f64 },

    #[error(
        "target beta = {target} outside bracket: scanned beta in [{beta_min}, {beta_max}] \
         over s in [{s_lo}, {s_hi}]; likely nonexistence, a solution requires n > beta - 2"
    )]
    TargetOutsideBracket {
        target: f64,
        beta_min: f64,
        beta_max: f64,
        s_lo: f64,
        s_hi: f64,
    },

    #[error("root finder did not converge after {iterations} iterations (|residual| = {residual})")]
    RootNotConverged { iterations: usize, residual: f64 },

    #[error("energy outside the admissible set: {0}")]
    OutsideAdmissibleSet(String),

    #[error(
        "infimum -inf: energy dropped by {drop} without the gradient shrinking; \
         the integrability hypothesis at the origin is likely violated"
    )]
    UnboundedEnergy { drop: f64 },

    #[error("incompatible solutions: {0}")]
    Incompatible(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
