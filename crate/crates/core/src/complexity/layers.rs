use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::geometry::{Domain, MidpointGrid, Norm, Point};
use crate::scale::ComplexityScale;

/// Default cap on the number of grid points held in memory.
pub const DEFAULT_GRID_CAP: usize = 1 << 22;

/// Grid points of a domain, each assigned to `X_ε` (class 0) or to a
/// suboptimality layer `k ∈ 1..=m_ε` by its gap `max f − f(x)`.
#[derive(Debug, Clone)]
pub struct LayerDecomposition {
    pub scale: ComplexityScale,
    pub norm: Norm,
    pub grid: MidpointGrid,
    pub grid_step: f64,
    pub values: Vec<f64>,
    pub max_value: f64,
    /// True when `max_value` is a grid estimate rather than metadata.
    pub max_estimated: bool,
    /// `assignment[i] = 0` for `X_ε`, `k` for layer `(ε_k, ε_{k−1}]`.
    pub assignment: Vec<usize>,
}

impl LayerDecomposition {
    pub fn class_count(&self) -> usize {
        self.scale.m_eps + 1
    }

    pub fn gap(&self, i: usize) -> f64 {
        self.max_value - self.values[i]
    }

    /// Grid indices per class, each in lexicographic order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.class_count()];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub fn class_points(&self, class: usize) -> Vec<&Point> {
        self.assignment
            .iter()
            .zip(&self.grid.points)
            .filter(|(&c, _)| c == class)
            .map(|(_, p)| p)
            .collect()
    }

    /// Packing radius used for a class in `S_C`.
    pub fn radius(&self, class: usize, lip: f64) -> f64 {
        if class == 0 {
            self.scale.eps / lip
        } else {
            self.scale.eps_k(class) / lip
        }
    }
}

pub(crate) fn check_grid_step(lip: f64, eps: f64, grid_step: f64) -> Result<()> {
    let limit = eps / lip / 8.0;
    if !(grid_step > 0.0 && grid_step <= limit) {
        return Err(Error::InvalidArgument(format!(
            "grid step must lie in (0, eps/(8L)] = (0, {limit}], got {grid_step}"
        )));
    }
    Ok(())
}

/// Evaluates `f` on a midpoint grid in parallel and returns the grid, the
/// values and `max f` (metadata, or grid max plus `L` times the half-cell
/// radius, flagged as estimated).
pub(crate) fn evaluate_grid(
    f: &TestFunction,
    domain: &Domain,
    norm: Norm,
    lip: f64,
    grid_step: f64,
    cap: usize,
) -> Result<(MidpointGrid, Vec<f64>, f64, bool)> {
    let grid = MidpointGrid::new(domain, grid_step, cap)?;
    let values: Vec<f64> = grid.points.par_iter().map(|p| f.eval(p)).collect();
    let (max_value, estimated) = match f.max_value() {
        Some(m) => (m, false),
        None => {
            let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (top + lip * grid.half_cell_radius(norm), true)
        }
    };
    Ok((grid, values, max_value, estimated))
}

/// Classifies a grid over `domain` into `X_ε` and the dyadic layers.
pub fn layer_decomposition(
    f: &TestFunction,
    domain: &Domain,
    norm: Norm,
    lip: f64,
    eps: f64,
    grid_step: f64,
) -> Result<LayerDecomposition> {
    layer_decomposition_capped(f, domain, norm, lip, eps, grid_step, DEFAULT_GRID_CAP)
}

pub fn layer_decomposition_capped(
    f: &TestFunction,
    domain: &Domain,
    norm: Norm,
    lip: f64,
    eps: f64,
    grid_step: f64,
    cap: usize,
) -> Result<LayerDecomposition> {
    if lip < f.lip_bound() {
        return Err(Error::InvalidArgument(format!(
            "L = {lip} is below the function's Lipschitz bound {}",
            f.lip_bound()
        )));
    }
    let scale = ComplexityScale::for_domain(domain, norm, lip, eps)?;
    check_grid_step(lip, eps, grid_step)?;
    let (grid, values, max_value, max_estimated) =
        evaluate_grid(f, domain, norm, lip, grid_step, cap)?;
    let mut assignment = Vec::with_capacity(values.len());
    for (p, v) in grid.points.iter().zip(&values) {
        // tiny negative gaps come from rounding at the argmax
        let gap = (max_value - v).max(0.0);
        match scale.classify(gap) {
            Ok(None) => assignment.push(0),
            Ok(Some(k)) => assignment.push(k),
            Err(gap) => {
                return Err(Error::NotLipschitz {
                    lip,
                    detail: format!("gap {gap} at {p:?} exceeds eps0 = {}", scale.eps0),
                })
            }
        }
    }
    Ok(LayerDecomposition {
        scale,
        norm,
        grid,
        grid_step,
        values,
        max_value,
        max_estimated,
        assignment,
    })
}
