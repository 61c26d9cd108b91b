use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::geometry::diameter;
use crate::partition::{CellKey, Partition};
use crate::trace::{AlgorithmKind, RunTrace, TraceBuilder, TraceHeader};

use super::leaf_set::{ActiveLeafSet, Leaf};

/// A leaf popped by the selection step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub key: CellKey,
    pub value: f64,
    pub b_value: f64,
    /// Evaluations made before this selection.
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct DooOutcome {
    pub trace: RunTrace,
    pub selections: Vec<Selection>,
}

/// Certified DOO: optimistic tree search emitting an error certificate after
/// every evaluation. Stops at the first `ξ_n ≤ eps` or after `budget`
/// evaluations.
pub fn cdoo_run(
    f: &TestFunction,
    partition: &dyn Partition,
    lip: f64,
    eps: f64,
    budget: usize,
) -> Result<RunTrace> {
    Ok(doo_engine(f, partition, lip, Some(eps), budget)?.trace)
}

/// [`cdoo_run`] that also returns the sequence of selected leaves.
pub fn cdoo_run_detailed(
    f: &TestFunction,
    partition: &dyn Partition,
    lip: f64,
    eps: f64,
    budget: usize,
) -> Result<DooOutcome> {
    doo_engine(f, partition, lip, Some(eps), budget)
}

/// Non-certified DOO: same queries and recommendations as [`cdoo_run`], no
/// certificates, runs until `budget`.
pub fn ncdoo_run(
    f: &TestFunction,
    partition: &dyn Partition,
    lip: f64,
    budget: usize,
) -> Result<RunTrace> {
    Ok(doo_engine(f, partition, lip, None, budget)?.trace)
}

fn doo_engine(
    f: &TestFunction,
    partition: &dyn Partition,
    lip: f64,
    eps: Option<f64>,
    budget: usize,
) -> Result<DooOutcome> {
    if !(lip.is_finite() && lip > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "L must be positive, got {lip}"
        )));
    }
    if lip < f.lip_bound() {
        return Err(Error::InvalidArgument(format!(
            "L = {lip} is below the function's Lipschitz bound {}",
            f.lip_bound()
        )));
    }
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    if let Some(eps) = eps {
        let eps0 = lip * diameter(partition.domain(), partition.norm())?;
        if !(eps > 0.0 && eps <= eps0) {
            return Err(Error::InvalidArgument(format!(
                "eps must lie in (0, eps0] = (0, {eps0}], got {eps}"
            )));
        }
    }
    if !partition.is_feasible(CellKey::ROOT) {
        return Err(Error::InfeasibleRoot);
    }

    let consts = partition.constants();
    let slack = |depth: u32| lip * consts.r * consts.delta.powi(depth as i32);
    let certified = eps.is_some();
    let mut trace = TraceBuilder::new(TraceHeader {
        algorithm: if certified {
            AlgorithmKind::Cdoo
        } else {
            AlgorithmKind::Ncdoo
        },
        function: f.label().to_string(),
        lip,
        eps,
        budget,
        seed: None,
    });
    let mut selections = Vec::new();
    let seal = |trace: TraceBuilder, selections, note: Option<&str>| {
        let mut t = trace.finish();
        if let Some(note) = note {
            t.annotate(note);
        }
        DooOutcome {
            trace: t,
            selections,
        }
    };

    let x1 = partition.representative(CellKey::ROOT);
    let f1 = f.eval(&x1);
    let xi1 = slack(0);
    trace.push(x1, f1, |_| certified.then_some(xi1));
    if eps.is_some_and(|e| xi1 <= e) {
        return Ok(seal(trace, selections, None));
    }

    let mut leaves = ActiveLeafSet::new();
    leaves.insert(Leaf {
        key: CellKey::ROOT,
        value: f1,
        b_value: f1 + slack(0),
    });

    while trace.len() < budget {
        let Some(parent) = leaves.pop() else {
            return Ok(seal(trace, selections, Some("no active leaves left")));
        };
        selections.push(Selection {
            key: parent.key,
            value: parent.value,
            b_value: parent.b_value,
            evaluations: trace.len(),
        });
        let children = match partition.children(parent.key) {
            Ok(ch) => ch,
            Err(Error::DepthOverflow { depth, .. }) => {
                let note = format!("cell index overflow at depth {depth}");
                return Ok(seal(trace, selections, Some(&note)));
            }
            Err(e) => return Err(e),
        };
        for child in children {
            if !partition.is_feasible(child) {
                continue;
            }
            let x = partition.representative(child);
            let fx = f.eval(&x);
            let xi = trace
                .push(x, fx, |best| certified.then_some(parent.b_value - best))
                .xi;
            leaves.insert(Leaf {
                key: child,
                value: fx,
                b_value: fx + slack(child.depth),
            });
            if let (Some(e), Some(xi)) = (eps, xi) {
                if xi <= e {
                    return Ok(seal(trace, selections, None));
                }
            }
            if trace.len() >= budget {
                break;
            }
        }
    }
    let note = certified.then_some("budget exhausted before the certificate reached eps");
    Ok(seal(trace, selections, note))
}
