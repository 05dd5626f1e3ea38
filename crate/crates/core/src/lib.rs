//! Orbit-space reduction of symmetric polynomial vector fields and
//! continuation of symmetry-breaking branches of relative equilibria.

pub mod bifurcation;
pub mod cli;
pub mod groups;
pub mod invariants;
pub mod linalg;
pub mod number;
pub mod poly;
pub mod reduction;
pub mod scenario;
pub mod simulate;
