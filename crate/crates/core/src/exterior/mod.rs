//! Grade-indexed sparse exterior algebra.
//!
//! Conventions used throughout the crate:
//! - wedge products are full alternating sums, so `(e1∧e2)(dx1, dx2) = 1`;
//! - `X ⌟ w` inserts the factors of `X` into the first slots of `w`;
//! - in phase-space charts the coordinate order is x-block, v-block,
//!   p-block (μ-major), then the energy direction, with `ε_{1…n} = +1`.

mod alternating;
mod basis;
mod decompose;
mod hodge;
mod schouten;

pub use alternating::{combinations, contract, Alternating, Contravariant, Covariant, Form, Multivector};
pub use basis::{GradedBasis, Metric};
pub use decompose::{annihilator, is_decomposable, DecomposabilityReport, DecomposabilitySummary};
pub use hodge::hodge_star;
pub use schouten::{
    fd_step, involutivity_check, jacobian, lie_bracket, schouten_decomposable, FnField,
    InvolutivityReport, VectorField,
};

/// Exterior product of two elements sharing a basis.
pub fn wedge<K>(a: &Alternating<K>, b: &Alternating<K>) -> crate::Result<Alternating<K>> {
    a.wedge(b)
}
