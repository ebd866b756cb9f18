//! Numerical laboratory for Jensen-type inequalities of self-adjoint
//! matrices: the spectral functional calculus, operator columns and their
//! unitary dilations, pinchings, defect computations for the operator and
//! trace forms of the inequality, states and conditional expectations, and a
//! randomized counterexample search.

pub mod bendat_sherman;
pub mod columns;
pub mod error;
pub mod functions;
pub mod interval;
pub mod json;
pub mod pinching;
pub mod probe;
pub mod sampling;
pub mod spectral;
pub mod states;
pub mod tolerance;
pub mod verifiers;

pub use error::{Error, Result};
pub use interval::Interval;
pub use spectral::{CMatrix, HermitianMatrix, RealFunction};
pub use tolerance::ToleranceProfile;
