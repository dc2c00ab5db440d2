use num_complex::Complex64;
use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {what} = {value} is not allowed")]
    Domain { what: &'static str, value: f64 },

    /// A constructor was handed parameters violating a type invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    /// Laplace-transform evaluation at (or numerically on top of) a kernel pole.
    #[error("kernel transform is singular at s = {s}")]
    KernelPole { s: Complex64 },

    /// Two characteristic poles closer than the supported separation.
    #[error("degenerate poles: separation {separation:.3e} below tolerance")]
    DegeneratePoles { separation: f64 },

    /// A configuration whose long-time dynamics diverges.
    #[error("unstable configuration: {0}")]
    Unstable(String),

    /// An estimator was called with no data.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Simulation configuration rejected before any work was done.
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}
