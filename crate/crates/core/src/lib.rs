//! Exact computations for non-central extensions of the algebra of vector
//! fields on `R^{N-1} x S^1`, their gauge extensions, and the lowest-energy
//! Fock realization by normal-ordered Heisenberg fields.

pub mod algebra;
pub mod current;
pub mod fock;
pub mod linalg;
pub mod realize;
pub mod scalar;
pub mod spacetime;
pub mod verify;

pub use scalar::GaussianRational;
