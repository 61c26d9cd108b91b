use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{diameter, Domain, Norm};

/// The dyadic accuracy schedule `ε_0 > ε_1 > … > ε_m = ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityScale {
    pub eps0: f64,
    pub eps: f64,
    pub m_eps: usize,
    pub schedule: Vec<f64>,
}

impl ComplexityScale {
    pub fn new(eps0: f64, eps: f64) -> Result<Self> {
        if !(eps0.is_finite() && eps0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "eps0 must be positive, got {eps0}"
            )));
        }
        if !(eps > 0.0 && eps <= eps0) {
            return Err(Error::InvalidArgument(format!(
                "eps must lie in (0, eps0] = (0, {eps0}], got {eps}"
            )));
        }
        // m = ⌈log2(ε0/ε)⌉, computed without logarithms: the smallest m
        // with ε0·2^{-m} ≤ ε. Scaling by powers of two is exact.
        let mut m = 0usize;
        while eps0 * 0.5f64.powi(m as i32) > eps {
            m += 1;
        }
        let mut schedule: Vec<f64> = (0..m).map(|k| eps0 * 0.5f64.powi(k as i32)).collect();
        schedule.push(eps);
        Ok(ComplexityScale {
            eps0,
            eps,
            m_eps: m,
            schedule,
        })
    }

    /// Scale for `ε0 = L · diameter(domain)`.
    pub fn for_domain(domain: &Domain, norm: Norm, lip: f64, eps: f64) -> Result<Self> {
        ComplexityScale::new(lip * diameter(domain, norm)?, eps)
    }

    pub fn eps_k(&self, k: usize) -> f64 {
        self.schedule[k]
    }

    /// Layer index of a suboptimality gap: `None` for `gap ≤ ε`, `Some(k)`
    /// for `ε_k < gap ≤ ε_{k−1}`, `Err` for gaps above `ε_0`.
    pub fn classify(&self, gap: f64) -> std::result::Result<Option<usize>, f64> {
        if gap <= self.eps {
            return Ok(None);
        }
        if gap > self.eps0 {
            return Err(gap);
        }
        // Gaps are above ε, so the answer lies in 1..=m.
        for k in (1..=self.m_eps).rev() {
            if gap <= self.schedule[k - 1] {
                return Ok(Some(k));
            }
        }
        unreachable!("gap {gap} in (eps, eps0] must fall in a layer")
    }
}
