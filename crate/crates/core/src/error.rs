use thiserror::Error;

/// Errors raised by the numerical engine.
///
/// Scalars carried inside variants are widened to `f64` so that the error
/// type does not depend on the scalar parameter of the routine that failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at a pole of a meromorphic function.
    #[error("pole at x = {0}")]
    Pole(f64),

    /// A derivative of higher order than the evaluator supports was requested.
    #[error("derivative of order {requested} requested, evaluator supports up to {available}")]
    Capability { requested: usize, available: usize },

    /// A filter parameter violates the validity condition of its construction.
    #[error("invalid filter parameter: {0}")]
    Validity(String),

    /// A filter or window could not be constructed from the given inputs.
    #[error("construction error: {0}")]
    Construction(String),

    /// The input is degenerate (for example a window that vanishes identically).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An iterative or adaptive computation hit its budget before meeting its
    /// tolerance. The best estimate found so far is reported.
    #[error(
        "no convergence: {message} (best estimate {estimate}, error estimate {error_estimate})"
    )]
    Convergence {
        message: String,
        estimate: f64,
        error_estimate: f64,
    },

    /// A nominally real quantity came out with a significant imaginary part,
    /// which points at a parity violation in a filter or integrand.
    #[error("imaginary residue {residue} exceeds allowance {allowance}")]
    Parity { residue: f64, allowance: f64 },

    /// The filter is not smooth enough for the requested derivative cascade.
    #[error("smoothness error: {0}")]
    Smoothness(String),

    /// No law with the requested moments exists.
    #[error("infeasible moments: {0}")]
    Infeasible(String),

    /// A computation would exceed its memory budget.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A bracket audit found a violation beyond tolerance.
    #[error("audit failure at {location}: violation {violation} exceeds tolerance {tolerance}")]
    Audit {
        location: String,
        violation: f64,
        tolerance: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
