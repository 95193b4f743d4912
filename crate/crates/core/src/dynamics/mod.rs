//! Klein–Gordon dynamics in De Donder–Weyl form: Legendre map, lattice
//! evolution, and tangent lifts of solutions into the phase space.

mod grid;
mod kg;
mod lift;
mod model;

pub use grid::{integrate_kg, stability_bound, FieldSolution, GridSpec, InitialData};
pub use kg::{kg_dw_hamiltonian, legendre, JetPoint, KGParams};
pub use lift::{
    grid_section_jet, lift, lift_involutivity, lift_section, verify_prop2, verify_prop2_jet,
    GridLiftField, Prop2Report, SectionJet,
};
pub use model::{FieldJet, FieldModel, PlaneWave, TaylorModel};
