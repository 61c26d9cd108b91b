use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Norm, Point};

use super::packing::{
    exact_covering_centers_in_E, exact_packing_bruteforce, greedy_packing_number,
};

/// Largest random set drawn by [`lemma_properties_suite`].
pub const MAX_TRIAL_POINTS: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub check: String,
    pub norm: Norm,
    pub points: Vec<Point>,
    pub radii: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaVerdict {
    pub trials: usize,
    pub seed: u64,
    pub checks: usize,
    pub passed: bool,
    pub counterexamples: Vec<Counterexample>,
}

/// `N(E, 2r) ≤ M(E, r) ≤ N(E, r)`, with `N` the exact packing number and
/// `M` the exact covering number with centres in `E`.
pub fn lemma3_holds(
    points: &[Point],
    r: f64,
    norm: Norm,
) -> Result<std::result::Result<(), String>> {
    let n_2r = exact_packing_bruteforce(points, 2.0 * r, norm)?;
    let m_r = exact_covering_centers_in_E(points, r, norm)?;
    let n_r = exact_packing_bruteforce(points, r, norm)?;
    Ok(if n_2r <= m_r && m_r <= n_r {
        Ok(())
    } else {
        Err(format!("N(E,2r) = {n_2r}, M(E,r) = {m_r}, N(E,r) = {n_r}"))
    })
}

/// `N(E, r1) ≤ (4 r2 / r1)^d N(E, r2)` for `r1 < r2`.
pub fn lemma4_holds(
    points: &[Point],
    r1: f64,
    r2: f64,
    norm: Norm,
) -> Result<std::result::Result<(), String>> {
    if !(r1 > 0.0 && r1 < r2) {
        return Err(Error::InvalidArgument(format!(
            "radii must satisfy 0 < r1 < r2, got r1 = {r1}, r2 = {r2}"
        )));
    }
    let d = points.first().map_or(1, Vec::len) as i32;
    let n1 = exact_packing_bruteforce(points, r1, norm)?;
    let n2 = exact_packing_bruteforce(points, r2, norm)?;
    let bound = (4.0 * r2 / r1).powi(d) * n2 as f64;
    Ok(if n1 as f64 <= bound {
        Ok(())
    } else {
        Err(format!("N(E,r1) = {n1} > {bound}"))
    })
}

/// Random trials of both packing lemmas and of the greedy estimator bounds
/// `N(E, 2r) ≤ greedy(E, r) ≤ N(E, r)`, against the exact oracles.
pub fn lemma_properties_suite(trials: usize, seed: u64) -> Result<LemmaVerdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norms = [Norm::Sup, Norm::Euclidean, Norm::L1];
    let mut checks = 0;
    let mut counterexamples = Vec::new();
    for _ in 0..trials {
        let d = rng.random_range(1..=3usize);
        let n = rng.random_range(1..=MAX_TRIAL_POINTS);
        let norm = norms[rng.random_range(0..norms.len())];
        let points: Vec<Point> = (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
            .collect();
        let r = rng.random_range(0.02..0.6);
        let r1 = rng.random_range(0.01..0.5);
        let r2 = rng.random_range(r1..1.0);
        if r2 <= r1 {
            continue;
        }
        let mut fail = |check: &str, radii: Vec<f64>, detail: String| {
            counterexamples.push(Counterexample {
                check: check.to_string(),
                norm,
                points: points.clone(),
                radii,
                detail,
            })
        };

        checks += 3;
        if let Err(detail) = lemma3_holds(&points, r, norm)? {
            fail("lemma3", vec![r], detail);
        }
        if let Err(detail) = lemma4_holds(&points, r1, r2, norm)? {
            fail("lemma4", vec![r1, r2], detail);
        }
        let g = greedy_packing_number(&points, r, norm);
        let lo = exact_packing_bruteforce(&points, 2.0 * r, norm)?;
        let hi = exact_packing_bruteforce(&points, r, norm)?;
        if !(lo <= g && g <= hi) {
            fail(
                "greedy",
                vec![r],
                format!("N(E,2r) = {lo}, greedy = {g}, N(E,r) = {hi}"),
            );
        }
    }
    Ok(LemmaVerdict {
        trials,
        seed,
        checks,
        passed: counterexamples.is_empty(),
        counterexamples,
    })
}
