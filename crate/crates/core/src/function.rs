//! Black-box objective functions and their exact metadata.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Norm, Point};

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Description of the set of maximizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArgmaxSet {
    /// Finitely many maximizers.
    Points { points: Vec<Point> },
    /// The sphere `{x : ‖x − center‖ = radius}`.
    Sphere {
        center: Point,
        radius: f64,
        norm: Norm,
    },
    /// Every point of the domain.
    Everywhere,
}

impl ArgmaxSet {
    /// A finite set of representative maximizers.
    pub fn sample_points(&self) -> Vec<Point> {
        match self {
            ArgmaxSet::Points { points } => points.clone(),
            ArgmaxSet::Sphere { center, radius, .. } => {
                let mut p = center.clone();
                p[0] += radius;
                vec![p]
            }
            ArgmaxSet::Everywhere => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownMax {
    pub value: f64,
    pub argmax: ArgmaxSet,
}

/// A deterministic black-box evaluator with its Lipschitz metadata.
#[derive(Clone)]
pub struct TestFunction {
    label: String,
    evaluator: Evaluator,
    lip_bound: f64,
    exact_lip: Option<f64>,
    known_max: Option<KnownMax>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("lip_bound", &self.lip_bound)
            .field("exact_lip", &self.exact_lip)
            .field("known_max", &self.known_max)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    pub fn new(
        label: impl Into<String>,
        lip_bound: f64,
        evaluator: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lip_bound.is_finite() && lip_bound > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Lipschitz bound must be positive, got {lip_bound}"
            )));
        }
        Ok(TestFunction {
            label: label.into(),
            evaluator: Arc::new(evaluator),
            lip_bound,
            exact_lip: None,
            known_max: None,
        })
    }

    pub fn with_exact_lip(mut self, lip: f64) -> Result<Self> {
        if !(lip >= 0.0 && lip <= self.lip_bound) {
            return Err(Error::InvalidArgument(format!(
                "exact Lipschitz constant {lip} must lie in [0, {}]",
                self.lip_bound
            )));
        }
        self.exact_lip = Some(lip);
        Ok(self)
    }

    pub fn with_known_max(mut self, known: KnownMax) -> Self {
        self.known_max = Some(known);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }

    pub fn evaluator(&self) -> Evaluator {
        Arc::clone(&self.evaluator)
    }

    pub fn lip_bound(&self) -> f64 {
        self.lip_bound
    }

    pub fn exact_lip(&self) -> Option<f64> {
        self.exact_lip
    }

    pub fn known_max(&self) -> Option<&KnownMax> {
        self.known_max.as_ref()
    }

    pub fn max_value(&self) -> Option<f64> {
        self.known_max.as_ref().map(|k| k.value)
    }

    /// Membership in `F_L`: the best constant is strictly below `L`.
    pub fn in_strict_class(&self) -> bool {
        self.exact_lip.is_some_and(|lip| lip < self.lip_bound)
    }

    /// `f + c` with the same Lipschitz metadata and shifted maximum.
    pub fn shifted(&self, offset: f64) -> TestFunction {
        let inner = self.evaluator();
        TestFunction {
            label: format!("{}+{offset}", self.label),
            evaluator: Arc::new(move |x| inner(x) + offset),
            lip_bound: self.lip_bound,
            exact_lip: self.exact_lip,
            known_max: self.known_max.as_ref().map(|k| KnownMax {
                value: k.value + offset,
                argmax: k.argmax.clone(),
            }),
        }
    }
}
