//! Crate-wide error type.
//!
//! Numerical failures carry enough context (stage, offending value) to be
//! actionable from the CLI without a backtrace.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A series or iteration exceeded its term budget before meeting tolerance.
    #[error("series did not converge: {0}")]
    NonConvergence(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// Grid parameters that cannot support the requested operation.
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    /// Evaluation time/ordering outside the admissible range.
    #[error("degenerate time argument: {0}")]
    DegenerateTime(String),

    /// Problem coefficients violate a solvability requirement.
    #[error("degenerate coefficients: {0}")]
    DegenerateCoefficients(String),

    /// A marching step produced a (near-)singular local system.
    #[error("singular marching step: {0}")]
    SingularStep(String),

    /// Point lies outside the domain piece it was evaluated in.
    #[error("point outside domain: {0}")]
    OutOfDomain(String),

    /// Dense/banded linear solve failed.
    #[error("linear solve failure: {0}")]
    LinearSolveFailure(String),

    /// Expression parse error with byte offset into the source.
    #[error("syntax error at offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },

    /// Unknown variable or function name in an expression.
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    /// Runtime evaluation error (domain error, non-finite result, ...).
    #[error("evaluation error: {0}")]
    Eval(String),

    /// Symbolic differentiation hit an unsupported construct.
    #[error("unsupported derivative: {0}")]
    UnsupportedDerivative(String),

    /// Problem data fails a validation check (compatibility, ranges, ...).
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// I/O error while reading configs or tables.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
