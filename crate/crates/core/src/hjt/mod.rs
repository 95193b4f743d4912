//! Covariant Hamilton–Jacobi theory: integrability conditions for maps
//! `T: E → P`, the generalised HJ equation, the Klein–Gordon construction,
//! and the obstruction to decomposability without the energy coordinate.

mod kg;
mod nogo;
mod tmap;

pub use kg::{kg_s, kg_s_family, KgFoliation};
pub use nogo::{
    no_go_probe, ConsistencyReport, QuadraticPotential, Verdict, CONSISTENT_TOLERANCE, CRITICAL_TOLERANCE,
    INCONSISTENT_THRESHOLD,
};
pub use tmap::{
    check_t_conditions, energy_closedness, hj_residual, s_closedness, ConditionReport, SFamily, TConditions, TMap,
    TValue,
};
