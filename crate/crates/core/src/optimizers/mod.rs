//! Certified DOO, non-certified DOO and certified Piyavskii–Shubert.

mod doo;
mod leaf_set;
mod piyavskii;

use std::sync::Arc;

pub use doo::{cdoo_run, cdoo_run_detailed, ncdoo_run, DooOutcome, Selection};
pub use leaf_set::{ActiveLeafSet, Leaf};
pub use piyavskii::{ps_run_1d, ps_run_grid, CandidateSet, Envelope1D, Vertex};

use crate::error::Result;
use crate::function::TestFunction;
use crate::geometry::{Domain, Norm, Point};
use crate::partition::Partition;
use crate::trace::{AlgorithmKind, RunTrace};

/// A configured optimizer that can be re-run on perturbed functions.
#[derive(Clone)]
pub enum Solver {
    Cdoo(Arc<dyn Partition>),
    Ncdoo(Arc<dyn Partition>),
    Ps1d {
        lo: f64,
        hi: f64,
        x1: f64,
    },
    Psgrid {
        domain: Domain,
        x1: Point,
        candidates: Arc<CandidateSet>,
    },
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Solver({})", self.kind())
    }
}

impl Solver {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Solver::Cdoo(_) => AlgorithmKind::Cdoo,
            Solver::Ncdoo(_) => AlgorithmKind::Ncdoo,
            Solver::Ps1d { .. } => AlgorithmKind::Ps1d,
            Solver::Psgrid { .. } => AlgorithmKind::Psgrid,
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            Solver::Cdoo(p) | Solver::Ncdoo(p) => p.domain().clone(),
            Solver::Ps1d { lo, hi, .. } => Domain::Rectangle {
                lower: vec![*lo],
                upper: vec![*hi],
            },
            Solver::Psgrid { domain, .. } => domain.clone(),
        }
    }

    pub fn norm(&self) -> Norm {
        match self {
            Solver::Cdoo(p) | Solver::Ncdoo(p) => p.norm(),
            Solver::Ps1d { .. } => Norm::Sup,
            Solver::Psgrid { candidates, .. } => candidates.norm(),
        }
    }

    /// Runs the solver. `eps` is ignored by the non-certified variant.
    pub fn run(&self, f: &TestFunction, lip: f64, eps: f64, budget: usize) -> Result<RunTrace> {
        match self {
            Solver::Cdoo(p) => cdoo_run(f, p.as_ref(), lip, eps, budget),
            Solver::Ncdoo(p) => ncdoo_run(f, p.as_ref(), lip, budget),
            Solver::Ps1d { lo, hi, x1 } => ps_run_1d(f, (*lo, *hi), lip, eps, *x1, budget),
            Solver::Psgrid {
                domain,
                x1,
                candidates,
            } => ps_run_grid(f, domain, lip, eps, x1, candidates, budget),
        }
    }
}
