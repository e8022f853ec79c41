//! Numerical solver for a mixed parabolic-hyperbolic boundary-value problem.
//!
//! The equation is fractional-diffusive (Caputo derivative of order
//! lambda in (0,1] in time) on the unit square and a wave equation on three
//! characteristic triangles attached to its left, bottom and right edges. A
//! non-local condition couples the two lateral wave regions along
//! characteristics. The solver follows the constructive uniqueness argument:
//! boundary traces reduce to a weakly singular 2x2 Volterra system, solved by
//! product-integration marching; the parabolic region is then reconstructed
//! from a Green's-function representation built on Wright-type functions.

pub mod assembler;
pub mod error;
pub mod exprlang;
pub mod fracquad;
pub mod func;
pub mod greens;
pub mod hyperbolic;
pub mod oracle;
pub mod specfun;
pub mod tau1solver;
pub mod volterra;

pub use assembler::{
    solve_problem, verify_conditions, Diagnostics, DiscretizationConfig, ProblemSpec,
    SamplePoint, SolutionField,
};
pub use error::{Error, Result};
pub use func::Func;
pub use hyperbolic::{Domain, TraceTable};
