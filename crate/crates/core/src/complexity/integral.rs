use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::geometry::{Domain, Norm};

use super::layers::{evaluate_grid, LayerDecomposition, DEFAULT_GRID_CAP};

/// Fewest grid points accepted by the midpoint rule.
pub const MIN_GRID_POINTS: usize = 16;
/// Fewest samples accepted by the Monte Carlo estimator.
pub const MIN_MC_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IntegralMethod {
    GridMidpoint,
    MonteCarlo { seed: u64, samples: usize },
}

impl IntegralMethod {
    pub fn label(&self) -> &'static str {
        match self {
            IntegralMethod::GridMidpoint => "grid-midpoint",
            IntegralMethod::MonteCarlo { .. } => "monte-carlo",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            IntegralMethod::GridMidpoint => None,
            IntegralMethod::MonteCarlo { seed, .. } => Some(*seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    /// Standard error, Monte Carlo only.
    pub stderr: Option<f64>,
    pub samples: usize,
}

fn integrand(gap: f64, eps: f64, dim: usize) -> f64 {
    (gap.max(0.0) + eps).powi(-(dim as i32))
}

/// Midpoint-rule value of `∫ dx / (max f − f(x) + ε)^d` over the grid of a
/// decomposition.
pub fn integral_from_decomposition(dec: &LayerDecomposition) -> Result<IntegralEstimate> {
    let n = dec.values.len();
    if n < MIN_GRID_POINTS {
        return Err(Error::InvalidArgument(format!(
            "integration grid has {n} points, fewer than {MIN_GRID_POINTS}"
        )));
    }
    let dim = dec.grid.spacing.len();
    let eps = dec.scale.eps;
    let sum: f64 = dec
        .values
        .iter()
        .map(|v| integrand(dec.max_value - v, eps, dim))
        .sum();
    Ok(IntegralEstimate {
        value: sum * dec.grid.cell_volume,
        stderr: None,
        samples: n,
    })
}

/// Estimates `∫_X dx / (max f − f(x) + ε)^d`.
///
/// `grid_step` sets the midpoint grid, and for Monte Carlo the grid used to
/// estimate `max f` when the function carries no metadata.
pub fn integral_estimate(
    f: &TestFunction,
    domain: &Domain,
    norm: Norm,
    lip: f64,
    eps: f64,
    method: IntegralMethod,
    grid_step: f64,
) -> Result<IntegralEstimate> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let dim = domain.dim();
    match method {
        IntegralMethod::GridMidpoint => {
            let (grid, values, max, _) =
                evaluate_grid(f, domain, norm, lip, grid_step, DEFAULT_GRID_CAP)?;
            if values.len() < MIN_GRID_POINTS {
                return Err(Error::InvalidArgument(format!(
                    "integration grid has {} points, fewer than {MIN_GRID_POINTS}",
                    values.len()
                )));
            }
            let sum: f64 = values.iter().map(|v| integrand(max - v, eps, dim)).sum();
            Ok(IntegralEstimate {
                value: sum * grid.cell_volume,
                stderr: None,
                samples: values.len(),
            })
        }
        IntegralMethod::MonteCarlo { seed, samples } => {
            if samples < MIN_MC_SAMPLES {
                return Err(Error::InvalidArgument(format!(
                    "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {samples}"
                )));
            }
            let max = match f.max_value() {
                Some(m) => m,
                None => evaluate_grid(f, domain, norm, lip, grid_step, DEFAULT_GRID_CAP)?.2,
            };
            let (lo, hi) = domain.bounding_box();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut points = Vec::with_capacity(samples);
            while points.len() < samples {
                let p: Vec<f64> = lo
                    .iter()
                    .zip(&hi)
                    .map(|(a, b)| a + (b - a) * rng.random::<f64>())
                    .collect();
                if domain.contains(&p) {
                    points.push(p);
                }
            }
            let h: Vec<f64> = points
                .par_iter()
                .map(|p| integrand(max - f.eval(p), eps, dim))
                .collect();
            let n = h.len() as f64;
            let mean = h.iter().sum::<f64>() / n;
            let var = h.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let vol = domain.volume();
            Ok(IntegralEstimate {
                value: vol * mean,
                stderr: Some(vol * (var / n).sqrt()),
                samples,
            })
        }
    }
}
