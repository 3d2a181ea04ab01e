//! Construction and verification of M-stationarity certificates for
//! mathematical programs with complementarity constraints.
//!
//! Given first-order data at a feasible point, [`certify_m_stationarity`]
//! enumerates the branches of the biactive set, computes branch multipliers by
//! linear programming and combines them into a single multiplier satisfying
//! the M-stationarity sign condition. The [`oracle`] module holds independent
//! brute-force checks of each step.

pub mod cones;
pub mod error;
pub mod model;
pub mod oracle;
pub mod solvers;
pub mod stationarity;

pub use cones::{BranchAssignment, LinearizedCone, PolarMembership};
pub use error::{Error, Result};
pub use model::{
    check_feasibility, classify_indices, evaluate_affine, AffineInstance, FeasibilityReport, FirstOrderData,
    IndexSets, ProblemData, Tolerances,
};
pub use stationarity::{
    certify_m_stationarity, check_stationarity_system, classify_multiplier, schinabeck_combine,
    synthesize_branch_multipliers, CertifyOptions, MultiplierClass, MultiplierVector, StationarityVerdict,
    VerdictKind,
};
