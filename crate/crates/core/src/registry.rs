//! Named test functions with exact metadata, and default solver settings.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::{ArgmaxSet, KnownMax, TestFunction};
use crate::geometry::{Domain, Norm};
use crate::optimizers::{CandidateSet, Solver};
use crate::partition::bisection_partition;
use crate::trace::AlgorithmKind;

/// Cap on psgrid candidate sets built by [`default_solver`].
pub const CANDIDATE_CAP: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct RegistryEntry {
    pub label: &'static str,
    pub description: String,
    pub dim: usize,
    pub domain: Domain,
    pub norm: Norm,
    /// Known Lipschitz bound of the class.
    pub lip: f64,
    /// Exact Lipschitz constant of the function.
    pub lip_f: f64,
    pub function: TestFunction,
}

impl RegistryEntry {
    pub fn max_value(&self) -> f64 {
        self.function
            .max_value()
            .expect("registry functions carry their maximum")
    }

    pub fn is_rectangle(&self) -> bool {
        matches!(self.domain, Domain::Rectangle { .. })
    }

    pub fn supports(&self, kind: AlgorithmKind) -> bool {
        match kind {
            AlgorithmKind::Cdoo | AlgorithmKind::Ncdoo => self.is_rectangle(),
            AlgorithmKind::Ps1d => self.dim == 1 && self.is_rectangle(),
            AlgorithmKind::Psgrid => true,
        }
    }

    pub fn algorithms(&self) -> Vec<AlgorithmKind> {
        AlgorithmKind::ALL
            .into_iter()
            .filter(|&k| self.supports(k))
            .collect()
    }
}

fn points(p: Vec<Vec<f64>>) -> ArgmaxSet {
    ArgmaxSet::Points { points: p }
}

type Eval = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

struct Spec {
    label: &'static str,
    description: String,
    domain: Domain,
    norm: Norm,
    lip_f: f64,
    max: KnownMax,
    eval: Eval,
}

fn build(lip: f64, s: Spec) -> Result<RegistryEntry> {
    let dim = s.domain.dim();
    let eval = s.eval;
    let function = TestFunction::new(s.label, lip, move |x| eval(x))?
        .with_exact_lip(s.lip_f)?
        .with_known_max(s.max);
    Ok(RegistryEntry {
        label: s.label,
        description: s.description,
        dim,
        domain: s.domain,
        norm: s.norm,
        lip,
        lip_f: s.lip_f,
        function,
    })
}

const MULTIBUMP_D1: [(f64, f64); 3] = [(0.2, 0.05), (0.55, 0.1), (0.8, 0.0)];
const MULTIBUMP_D2: [([f64; 2], f64); 3] =
    [([0.3, 0.3], 0.1), ([0.7, 0.35], 0.05), ([0.45, 0.75], 0.08)];

/// Every registry function for the class bound `lip`.
pub fn registry(lip: f64) -> Result<Vec<RegistryEntry>> {
    if !(lip.is_finite() && lip > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "L must be positive, got {lip}"
        )));
    }
    let l = lip;
    let specs = vec![
        Spec {
            label: "constant-d1",
            description: "f = 0 on [0,1]".into(),
            domain: Domain::unit_cube(1),
            norm: Norm::Sup,
            lip_f: 0.0,
            max: KnownMax {
                value: 0.0,
                argmax: ArgmaxSet::Everywhere,
            },
            eval: Box::new(|_| 0.0),
        },
        Spec {
            label: "constant-d2",
            description: "f = 0 on [0,1]^2, sup norm".into(),
            domain: Domain::unit_cube(2),
            norm: Norm::Sup,
            lip_f: 0.0,
            max: KnownMax {
                value: 0.0,
                argmax: ArgmaxSet::Everywhere,
            },
            eval: Box::new(|_| 0.0),
        },
        Spec {
            label: "tent-d1",
            description: "f = -L|x - 1/2| on [0,1]".into(),
            domain: Domain::unit_cube(1),
            norm: Norm::Sup,
            lip_f: l,
            max: KnownMax {
                value: 0.0,
                argmax: points(vec![vec![0.5]]),
            },
            eval: Box::new(move |x| -l * (x[0] - 0.5).abs()),
        },
        Spec {
            label: "halftent-d1",
            description: "f = -(L/2)|x - 0.3| on [0,1]".into(),
            domain: Domain::unit_cube(1),
            norm: Norm::Sup,
            lip_f: l / 2.0,
            max: KnownMax {
                value: 0.0,
                argmax: points(vec![vec![0.3]]),
            },
            eval: Box::new(move |x| -0.5 * l * (x[0] - 0.3).abs()),
        },
        Spec {
            label: "cone-d2",
            description: "f = L||x||_2 on the closed euclidean unit ball".into(),
            domain: Domain::ball(vec![0.0, 0.0], 1.0, Norm::Euclidean)?,
            norm: Norm::Euclidean,
            lip_f: l,
            max: KnownMax {
                value: l,
                argmax: ArgmaxSet::Sphere {
                    center: vec![0.0, 0.0],
                    radius: 1.0,
                    norm: Norm::Euclidean,
                },
            },
            eval: Box::new(move |x| l * Norm::Euclidean.length(x)),
        },
        Spec {
            label: "multibump-d1",
            description:
                "f = L max_j (h_j - |x - c_j|/2), c = (0.2, 0.55, 0.8), h = (0.05, 0.1, 0)".into(),
            domain: Domain::unit_cube(1),
            norm: Norm::Sup,
            lip_f: l / 2.0,
            max: KnownMax {
                value: 0.1 * l,
                argmax: points(vec![vec![0.55]]),
            },
            eval: Box::new(move |x| {
                let m = MULTIBUMP_D1
                    .iter()
                    .map(|&(c, h)| h - 0.5 * (x[0] - c).abs())
                    .fold(f64::NEG_INFINITY, f64::max);
                l * m
            }),
        },
        Spec {
            label: "multibump-d2",
            description: "f = L max_j (h_j - ||x - c_j||_inf/2) on [0,1]^2, three cones".into(),
            domain: Domain::unit_cube(2),
            norm: Norm::Sup,
            lip_f: l / 2.0,
            max: KnownMax {
                value: 0.1 * l,
                argmax: points(vec![vec![0.3, 0.3]]),
            },
            eval: Box::new(move |x| {
                let m = MULTIBUMP_D2
                    .iter()
                    .map(|(c, h)| h - 0.5 * Norm::Sup.distance(x, c))
                    .fold(f64::NEG_INFINITY, f64::max);
                l * m
            }),
        },
        Spec {
            label: "ramp-d1",
            description: "f = -L x on [0,1]".into(),
            domain: Domain::unit_cube(1),
            norm: Norm::Sup,
            lip_f: l,
            max: KnownMax {
                value: 0.0,
                argmax: points(vec![vec![0.0]]),
            },
            eval: Box::new(move |x| -l * x[0]),
        },
    ];
    specs.into_iter().map(|s| build(lip, s)).collect()
}

/// Looks up one entry by label.
pub fn lookup(label: &str, lip: f64) -> Result<RegistryEntry> {
    registry(lip)?
        .into_iter()
        .find(|e| e.label == label)
        .ok_or_else(|| {
            let known: Vec<&str> = registry(lip)
                .map(|r| r.iter().map(|e| e.label).collect())
                .unwrap_or_default();
            Error::InvalidArgument(format!(
                "unknown function {label:?}; known: {}",
                known.join(", ")
            ))
        })
}

/// Candidate grid step giving `L · r_cov ≤ eps / 2`.
pub fn candidate_step(domain: &Domain, norm: Norm, lip: f64, eps: f64) -> f64 {
    let d = domain.dim();
    let k = match domain {
        Domain::Rectangle { .. } => Norm::Sup.dominated_by(norm, d),
        Domain::Ball { norm: ball, .. } => {
            Norm::Sup.dominated_by(*ball, d) * ball.dominated_by(norm, d)
                + Norm::Sup.dominated_by(norm, d)
        }
    };
    eps / (lip * k)
}

/// Solver with the registry defaults: bisection for DOO, the interval
/// midpoint for ps1d, and for psgrid the domain centre with a candidate grid
/// fine enough that `L · r_cov ≤ eps / 2`.
pub fn default_solver(entry: &RegistryEntry, kind: AlgorithmKind, eps: f64) -> Result<Solver> {
    if !entry.supports(kind) {
        return Err(Error::Unsupported(format!("{kind} on {}", entry.label)));
    }
    Ok(match kind {
        AlgorithmKind::Cdoo => {
            Solver::Cdoo(Arc::new(bisection_partition(&entry.domain, entry.norm)?))
        }
        AlgorithmKind::Ncdoo => {
            Solver::Ncdoo(Arc::new(bisection_partition(&entry.domain, entry.norm)?))
        }
        AlgorithmKind::Ps1d => {
            let (lo, hi) = entry.domain.bounding_box();
            Solver::Ps1d {
                lo: lo[0],
                hi: hi[0],
                x1: 0.5 * (lo[0] + hi[0]),
            }
        }
        AlgorithmKind::Psgrid => {
            let step = candidate_step(&entry.domain, entry.norm, entry.lip, eps);
            let candidates = CandidateSet::grid(&entry.domain, entry.norm, step, CANDIDATE_CAP)?;
            Solver::Psgrid {
                domain: entry.domain.clone(),
                x1: entry.domain.center(),
                candidates: Arc::new(candidates),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata() {
        let reg = registry(1.0).unwrap();
        let labels: Vec<&str> = reg.iter().map(|e| e.label).collect();
        for want in [
            "constant-d1",
            "constant-d2",
            "tent-d1",
            "halftent-d1",
            "cone-d2",
            "multibump-d1",
            "multibump-d2",
        ] {
            assert!(labels.contains(&want), "{want}");
        }
        let tent = lookup("tent-d1", 1.0).unwrap();
        assert_eq!(tent.function.eval(&[0.5]), 0.0);
        let cone = lookup("cone-d2", 2.0).unwrap();
        assert_eq!(cone.max_value(), 2.0);
        assert_eq!(cone.function.eval(&[0.6, 0.8]), 2.0);
        assert_eq!(lookup("halftent-d1", 1.0).unwrap().lip_f, 0.5);
        assert!(lookup("nope", 1.0).is_err());
    }

    #[test]
    fn maxima_dominate_a_dense_grid() {
        for e in registry(1.0).unwrap() {
            let grid = crate::geometry::MidpointGrid::new(&e.domain, 0.005, 1 << 20).unwrap();
            let top = grid
                .points
                .iter()
                .map(|p| e.function.eval(p))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(top <= e.max_value() + 1e-12, "{}", e.label);
            assert!(top >= e.max_value() - 0.01, "{}", e.label);
            for a in e.function.known_max().unwrap().argmax.sample_points() {
                assert!(
                    (e.function.eval(&a) - e.max_value()).abs() < 1e-12,
                    "{}",
                    e.label
                );
            }
        }
    }

    #[test]
    fn psgrid_step_meets_target() {
        for e in registry(1.0).unwrap() {
            let Solver::Psgrid { candidates, .. } =
                default_solver(&e, AlgorithmKind::Psgrid, 0.1).unwrap()
            else {
                unreachable!()
            };
            assert!(candidates.covering_radius() <= 0.05 + 1e-12, "{}", e.label);
        }
        let cone = lookup("cone-d2", 1.0).unwrap();
        assert!(default_solver(&cone, AlgorithmKind::Cdoo, 0.1).is_err());
    }
}
