//! Lower-bound perturbations and the audit that replays them against
//! certified runs.

mod audit;
mod bump;
mod wedges;

pub use audit::{
    audit_certified_run, audit_scales, AuditCase, AuditPoint, AuditReport, AuditVerdict,
    EXTRA_SCALES, GLOBAL_CANDIDATE_CAP,
};
pub use bump::{adversary_constant, build_bump, lower_bound_constant, BumpPerturbation};
pub use wedges::{build_wedges_1d, WedgePair1D};
