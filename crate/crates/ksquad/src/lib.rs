//! Regularization and secular normal forms for the spatial Kepler and
//! lunar three-body problems.
//!
//! The crate provides, in dependency order:
//!
//! - quaternion algebra and the Hopf-type map ([`quat`]),
//! - symplectic verification numerics: two-forms, pullbacks, Poisson
//!   brackets, an implicit midpoint integrator, periodic averaging
//!   ([`verify`]),
//! - classical Kepler machinery: Kepler equation, Delaunay elements
//!   ([`kepler`]),
//! - the quaternionic regularization of the spatial Kepler problem and the
//!   planar Levi-Civita map it restricts to ([`ksreg`]),
//! - action-angle coordinates adapted to the regularized flow, planar and
//!   spatial ([`lcf`]),
//! - Jacobi splitting and regularization of the lunar spatial three-body
//!   problem ([`threebody`]),
//! - the quadrupolar secular Hamiltonian, its closed forms and charts, the
//!   fictitious outer mass, and the conjugacy check between the regularized
//!   and classical secular flows ([`quadrupolar`]),
//! - seeded sampling helpers shared by tests, benches, and the verification
//!   suites ([`sampling`]).

pub mod error;
pub mod kepler;
pub mod ksreg;
pub mod lcf;
pub mod quadrupolar;
pub mod quat;
pub mod sampling;
pub mod threebody;
pub mod verify;

pub use error::{Error, Result};
