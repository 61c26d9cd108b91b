use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::geometry::{Domain, Norm};

use super::integral::{integral_estimate, integral_from_decomposition, IntegralMethod};
use super::layers::{layer_decomposition_capped, LayerDecomposition, DEFAULT_GRID_CAP};
use super::packing::greedy_packing_number;

/// Factor by which `S_C` may fall short of `c · integral`, absorbing the
/// greedy underestimate of packing numbers.
pub const SANDWICH_LOWER_SLACK: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityConfig {
    /// Defaults to `eps / (8 L)`.
    pub grid_step: Option<f64>,
    pub method: IntegralMethod,
    /// Volume-ratio constant of the domain; defaults to `2^{-d}`.
    pub gamma: Option<f64>,
    pub grid_cap: usize,
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        ComplexityConfig {
            grid_step: None,
            method: IntegralMethod::GridMidpoint,
            gamma: None,
            grid_cap: DEFAULT_GRID_CAP,
        }
    }
}

pub fn default_gamma(domain: &Domain) -> f64 {
    0.5f64.powi(domain.dim() as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichVerdict {
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub slack: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub function: String,
    pub dim: usize,
    pub norm: Norm,
    #[serde(rename = "L")]
    pub lip: f64,
    pub eps0: f64,
    pub eps: f64,
    pub m_eps: usize,
    pub schedule: Vec<f64>,
    pub grid_step: f64,
    pub grid_points: usize,
    /// Index 0 is `X_ε` at radius `ε/L`; index `k` is layer `k` at `ε_k/L`.
    pub packing_counts: Vec<usize>,
    #[serde(rename = "SC")]
    pub sc: usize,
    #[serde(rename = "SNC")]
    pub snc: usize,
    pub integral: f64,
    pub integral_stderr: Option<f64>,
    pub method: String,
    pub seed: Option<u64>,
    pub gamma: Option<f64>,
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: Option<f64>,
    pub max_estimated: bool,
    pub verdicts: Option<SandwichVerdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ComplexityReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Greedy packing counts per class of a decomposition, in class order.
pub fn packing_counts(dec: &LayerDecomposition, lip: f64) -> Vec<usize> {
    let classes = dec.classes();
    classes
        .par_iter()
        .enumerate()
        .map(|(k, idx)| {
            let pts: Vec<&[f64]> = idx.iter().map(|&i| dec.grid.points[i].as_slice()).collect();
            greedy_packing_number(&pts, dec.radius(k, lip), dec.norm)
        })
        .collect()
}

/// Builds the full report: packing counts, `S_C`, `S_NC`, the integral, the
/// sandwich constants and the sandwich verdict.
pub fn estimate_sc(
    f: &TestFunction,
    domain: &Domain,
    norm: Norm,
    lip: f64,
    eps: f64,
    config: &ComplexityConfig,
) -> Result<ComplexityReport> {
    let step = config.grid_step.unwrap_or(eps / lip / 8.0);
    let dec = layer_decomposition_capped(f, domain, norm, lip, eps, step, config.grid_cap)?;
    let counts = packing_counts(&dec, lip);
    let snc: usize = counts[1..].iter().sum();
    let sc = counts[0] + snc;
    let integral = match config.method {
        IntegralMethod::GridMidpoint => integral_from_decomposition(&dec)?,
        m => integral_estimate(f, domain, norm, lip, eps, m, step)?,
    };
    let dim = domain.dim();
    let gamma = Some(config.gamma.unwrap_or_else(|| default_gamma(domain)));
    let mut notes = Vec::new();
    if dec.max_estimated {
        notes.push("max f estimated from the grid plus L times the half-cell radius".to_string());
    }
    notes.push(format!(
        "sandwich lower inequality checked with slack factor {SANDWICH_LOWER_SLACK}"
    ));
    let mut report = ComplexityReport {
        function: f.label().to_string(),
        dim,
        norm,
        lip,
        eps0: dec.scale.eps0,
        eps: dec.scale.eps,
        m_eps: dec.scale.m_eps,
        schedule: dec.scale.schedule.clone(),
        grid_step: step,
        grid_points: dec.grid.points.len(),
        packing_counts: counts,
        sc,
        snc,
        integral: integral.value,
        integral_stderr: integral.stderr,
        method: config.method.label().to_string(),
        seed: config.method.seed(),
        gamma,
        c: 1.0 / norm.ball_volume(dim, 1.0 / lip),
        big_c: gamma.map(|g| 1.0 / (g * norm.ball_volume(dim, 1.0 / (128.0 * lip)))),
        max_estimated: dec.max_estimated,
        verdicts: None,
        notes,
    };
    report.verdicts = Some(sandwich_check(&report)?);
    Ok(report)
}

/// The non-certified complexity `S_NC`: the layer terms of `S_C` only.
pub fn estimate_snc(
    f: &TestFunction,
    domain: &Domain,
    norm: Norm,
    lip: f64,
    eps: f64,
    config: &ComplexityConfig,
) -> Result<usize> {
    let step = config.grid_step.unwrap_or(eps / lip / 8.0);
    let dec = layer_decomposition_capped(f, domain, norm, lip, eps, step, config.grid_cap)?;
    Ok(packing_counts(&dec, lip)[1..].iter().sum())
}

/// Checks `c · I ≤ slack · S_C` and `S_C ≤ C · I`.
pub fn sandwich_check(report: &ComplexityReport) -> Result<SandwichVerdict> {
    let gamma = report
        .gamma
        .ok_or_else(|| Error::MissingMetadata("gamma is required for the sandwich check".into()))?;
    let big_c = 1.0
        / (gamma
            * report
                .norm
                .ball_volume(report.dim, 1.0 / (128.0 * report.lip)));
    let lower_bound = report.c * report.integral;
    let upper_bound = big_c * report.integral;
    let sc = report.sc as f64;
    let lower_ok = lower_bound <= SANDWICH_LOWER_SLACK * sc;
    let upper_ok = sc <= upper_bound;
    Ok(SandwichVerdict {
        lower_bound,
        upper_bound,
        slack: SANDWICH_LOWER_SLACK,
        lower_ok,
        upper_ok,
        passed: lower_ok && upper_ok,
    })
}
