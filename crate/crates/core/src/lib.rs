//! Exterior-algebra machinery for De Donder–Weyl Hamiltonian field theory on
//! the extended multisymplectic phase space, with numerical checks of the
//! decomposition, lifting and Hamilton–Jacobi integrability results.
//!
//! - [`exterior`]: sparse multivectors and forms, decomposability, Hodge
//!   duality, Schouten bracket.
//! - [`phase_space`]: adapted coordinates on the phase space, the
//!   multisymplectic form and scalar fields.
//! - [`hamvec`]: decomposable Hamiltonian n-vector fields for `H = -𝓗 - p`.
//! - [`dynamics`]: Klein–Gordon Legendre map, leapfrog integrator and lifts
//!   of solutions.
//! - [`hjt`]: covariant Hamilton–Jacobi checks and the no-go probe on the
//!   phase space without energy coordinate.

pub mod dynamics;
pub mod error;
pub mod exterior;
pub mod hamvec;
pub mod hjt;
pub mod linalg;
pub mod phase_space;

pub use error::{Error, Result};
pub use exterior::{contract, Form, GradedBasis, Metric, Multivector, VectorField};
pub use phase_space::{PhasePoint, PhaseSpaceShape, ScalarField};
