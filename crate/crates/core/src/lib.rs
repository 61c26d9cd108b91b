//! Certified Lipschitz global optimization.
//!
//! Optimizers that return, after every evaluation, both a recommendation and
//! an error certificate upper-bounding `max f − f(recommendation)`, together
//! with grid estimators of the packing-number complexity that governs how
//! many evaluations certification needs, and an adversarial audit that checks
//! the lower-bound construction against real runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod complexity;
pub mod error;
pub mod function;
pub mod geometry;
pub mod optimizers;
pub mod partition;
pub mod registry;
pub mod scale;
pub mod sweep;
pub mod trace;

pub use error::{Error, Result};
pub use function::{ArgmaxSet, KnownMax, TestFunction};
pub use geometry::{diameter, Domain, Norm, Point};
pub use optimizers::{cdoo_run, ncdoo_run, ps_run_1d, ps_run_grid, CandidateSet, Solver};
pub use partition::{
    bisection_partition, verify_assumptions, BisectionPartition, CellKey, Partition,
};
pub use scale::ComplexityScale;
pub use trace::{
    certificate_validity, sigma_from_trace, zeta_from_trace, AlgorithmKind, Record, RunTrace,
    SampleCount,
};

/// Absolute tolerance for certificate checks on registry functions.
pub const CERTIFICATE_TOL: f64 = 1e-9;
