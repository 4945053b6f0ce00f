use thiserror::Error;

/// Unified error type for the whole library.
///
/// Numerical routines distinguish hard domain violations (caller bugs)
/// from capability limits (the requested computation exceeds what double
/// precision or the implemented quadratures can certify).
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid parameters (bad weight spec, alpha <= 0, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Gamma evaluated at a non-positive integer.
    #[error("pole error: gamma pole at x = {0}")]
    Pole(f64),

    /// Result (or a required intermediate) exceeds the representable range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Jet order beyond the double-precision cap.
    #[error("jet order {requested} exceeds cap {cap}: Cauchy products degrade in double precision")]
    JetOrder { requested: usize, cap: usize },

    /// Contour evaluation produced a non-finite node value or the transform
    /// failed a structural precondition.
    #[error("contour failure: {0}; try a different ContourSpec")]
    ContourFailure(String),

    /// A quadrature did not reach its target accuracy.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Subordination tail-mass search exceeded its cap.
    #[error("tail mass not converged: {0}")]
    TailMass(String),

    /// Linear solve hit a (numerically) singular matrix.
    #[error("singular operator: {0}")]
    Singular(String),

    /// Text input did not match the weight / generator grammar.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
