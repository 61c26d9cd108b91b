//! Hierarchical K-ary cell trees with cell representatives.
//!
//! A partition must satisfy two geometric conditions before an optimizer may
//! rely on it: cells at depth `h` have diameter at most `R·δ^h`, and distinct
//! representatives `(h, i)`, `(h', i')` are at least `ν·δ^{max(h, h')}` apart.
//! [`verify_assumptions`] checks both numerically.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Norm, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CellKey {
    pub depth: u32,
    pub index: u64,
}

impl CellKey {
    pub const ROOT: CellKey = CellKey { depth: 0, index: 0 };

    pub fn new(depth: u32, index: u64) -> Self {
        CellKey { depth, index }
    }
}

/// Axis-aligned cell, closed on lower faces and open on upper faces except
/// where the upper face lies on the domain boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub closed_upper: Vec<bool>,
}

impl Cell {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(j, &v)| {
            self.lower[j] <= v
                && (v < self.upper[j] || (self.closed_upper[j] && v == self.upper[j]))
        })
    }

    pub fn corners(&self) -> Vec<Point> {
        let d = self.lower.len();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|j| {
                        if mask >> j & 1 == 1 {
                            self.upper[j]
                        } else {
                            self.lower[j]
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Closure of the cell intersects `domain`.
    pub fn meets(&self, domain: &Domain) -> bool {
        match domain {
            Domain::Rectangle { lower, upper } => (0..self.lower.len())
                .all(|j| self.lower[j] <= upper[j] && lower[j] <= self.upper[j]),
            Domain::Ball {
                center,
                radius,
                norm,
            } => {
                let nearest: Vec<f64> = center
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c.clamp(self.lower[j], self.upper[j]))
                    .collect();
                norm.distance(&nearest, center) <= *radius
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionConstants {
    pub arity: u64,
    #[serde(rename = "R")]
    pub r: f64,
    pub delta: f64,
    pub nu: f64,
}

impl PartitionConstants {
    /// `a = 1 + K·(𝟙{ν/R ≥ 1} + 𝟙{ν/R < 1}·(4R/ν)^d)`, the constant of the
    /// `σ(c.DOO) ≤ a·S_C` bound.
    pub fn doo_bound_constant(&self, dim: usize) -> f64 {
        let ratio = self.nu / self.r;
        let factor = if ratio >= 1.0 {
            1.0
        } else {
            (4.0 * self.r / self.nu).powi(dim as i32)
        };
        1.0 + self.arity as f64 * factor
    }
}

/// A K-ary tree of cells over a domain.
pub trait Partition: Send + Sync {
    fn dim(&self) -> usize;
    fn norm(&self) -> Norm;
    fn constants(&self) -> PartitionConstants;
    fn cell(&self, key: CellKey) -> Cell;
    fn representative(&self, key: CellKey) -> Point;
    fn children(&self, key: CellKey) -> Result<Vec<CellKey>>;
    /// `cell(key) ∩ X ≠ ∅`.
    fn is_feasible(&self, key: CellKey) -> bool;
    fn domain(&self) -> &Domain;
}

/// Dyadic bisection of a hyperrectangle under the sup norm: `K = 2^d`,
/// `R` = longest edge, `δ = 1/2`, center representatives.
#[derive(Debug, Clone)]
pub struct BisectionPartition {
    domain: Domain,
    lower: Vec<f64>,
    upper: Vec<f64>,
    constants: PartitionConstants,
    max_depth: u32,
}

/// Builds the bisection partition of a hyperrectangle.
pub fn bisection_partition(domain: &Domain, norm: Norm) -> Result<BisectionPartition> {
    let Domain::Rectangle { lower, upper } = domain else {
        return Err(Error::Unsupported(
            "bisection partitions are built over hyperrectangles only".into(),
        ));
    };
    let dim = lower.len();
    if norm != Norm::Sup && dim > 1 {
        return Err(Error::Unsupported(format!(
            "bisection constants hold for the sup norm only, got {norm}"
        )));
    }
    if dim > 16 {
        return Err(Error::Unsupported(format!(
            "dimension {dim} too large for bisection"
        )));
    }
    let edges: Vec<f64> = lower.iter().zip(upper).map(|(a, b)| b - a).collect();
    let longest = edges.iter().cloned().fold(0.0, f64::max);
    let shortest = edges.iter().cloned().fold(f64::INFINITY, f64::min);
    // Distinct centers at the same depth differ by a full sub-edge in some
    // coordinate; across depths they differ by half the finer sub-edge in
    // every coordinate.
    let nu = (0.5 * longest).min(shortest);
    Ok(BisectionPartition {
        domain: domain.clone(),
        lower: lower.clone(),
        upper: upper.clone(),
        constants: PartitionConstants {
            arity: 1 << dim,
            r: longest,
            delta: 0.5,
            nu,
        },
        max_depth: (63 / dim) as u32,
    })
}

impl BisectionPartition {
    fn axis_indices(&self, key: CellKey) -> Vec<u64> {
        let d = self.lower.len();
        let mut k = vec![0u64; d];
        for t in (0..key.depth).rev() {
            let digit = key.index >> (d as u32 * t) & ((1u64 << d) - 1);
            for (j, kj) in k.iter_mut().enumerate() {
                *kj = (*kj << 1) | (digit >> (d - 1 - j) & 1);
            }
        }
        k
    }

    fn key_from_axes(&self, depth: u32, axes: &[u64]) -> CellKey {
        let d = self.lower.len();
        let mut index = 0u64;
        for t in (0..depth).rev() {
            let mut digit = 0u64;
            for &kj in axes {
                digit = (digit << 1) | (kj >> t & 1);
            }
            index = (index << d) | digit;
        }
        CellKey { depth, index }
    }

    fn bound(&self, j: usize, k: u64, depth: u32) -> f64 {
        let n = 2f64.powi(depth as i32);
        if k as f64 == n {
            return self.upper[j];
        }
        self.lower[j] + (self.upper[j] - self.lower[j]) * (k as f64 / n)
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Key of the depth-`depth` cell containing `x`.
    pub fn locate(&self, x: &[f64], depth: u32) -> Result<CellKey> {
        if x.len() != self.lower.len() {
            return Err(Error::DimensionMismatch {
                expected: self.lower.len(),
                got: x.len(),
            });
        }
        if !self.domain.contains(x) {
            return Err(Error::InvalidArgument(format!(
                "{x:?} lies outside the domain"
            )));
        }
        if depth > self.max_depth {
            return Err(Error::DepthOverflow {
                depth,
                arity: self.constants.arity,
            });
        }
        let n = 1u64 << depth;
        let axes: Vec<u64> = x
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let t = (v - self.lower[j]) / (self.upper[j] - self.lower[j]);
                let mut k = ((t * n as f64).floor() as u64).min(n - 1);
                // Rounding can land one cell off; settle against the exact bounds.
                if v < self.bound(j, k, depth) && k > 0 {
                    k -= 1;
                } else if k + 1 < n && v >= self.bound(j, k + 1, depth) {
                    k += 1;
                }
                k
            })
            .collect();
        Ok(self.key_from_axes(depth, &axes))
    }
}

impl Partition for BisectionPartition {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn norm(&self) -> Norm {
        Norm::Sup
    }

    fn constants(&self) -> PartitionConstants {
        self.constants
    }

    fn cell(&self, key: CellKey) -> Cell {
        let axes = self.axis_indices(key);
        let n = 1u64 << key.depth;
        let mut cell = Cell {
            lower: Vec::with_capacity(axes.len()),
            upper: Vec::with_capacity(axes.len()),
            closed_upper: Vec::with_capacity(axes.len()),
        };
        for (j, &k) in axes.iter().enumerate() {
            cell.lower.push(self.bound(j, k, key.depth));
            cell.upper.push(self.bound(j, k + 1, key.depth));
            cell.closed_upper.push(k + 1 == n);
        }
        cell
    }

    fn representative(&self, key: CellKey) -> Point {
        let axes = self.axis_indices(key);
        let denom = 2f64.powi(key.depth as i32 + 1);
        axes.iter()
            .enumerate()
            .map(|(j, &k)| {
                self.lower[j] + (self.upper[j] - self.lower[j]) * ((2 * k + 1) as f64 / denom)
            })
            .collect()
    }

    fn children(&self, key: CellKey) -> Result<Vec<CellKey>> {
        if key.depth + 1 > self.max_depth {
            return Err(Error::DepthOverflow {
                depth: key.depth + 1,
                arity: self.constants.arity,
            });
        }
        let k = self.constants.arity;
        Ok((0..k)
            .map(|c| CellKey {
                depth: key.depth + 1,
                index: key.index * k + c,
            })
            .collect())
    }

    fn is_feasible(&self, key: CellKey) -> bool {
        self.cell(key).meets(&self.domain)
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AssumptionViolation {
    CellDiameter {
        key: CellKey,
        distance: f64,
        bound: f64,
    },
    Separation {
        a: CellKey,
        b: CellKey,
        distance: f64,
        bound: f64,
    },
    InfeasibleRepresentative {
        key: CellKey,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionVerdict {
    pub passed: bool,
    pub cells_checked: usize,
    pub pairs_checked: u64,
    pub violation: Option<AssumptionViolation>,
}

const REL_TOL: f64 = 1e-12;

/// Checks the shrinking-diameter condition on cell corners and sampled
/// interior pairs, and the representative-separation condition on every
/// pair of feasible representatives up to `max_depth`.
pub fn verify_assumptions(
    partition: &dyn Partition,
    max_depth: u32,
    samples_per_cell: usize,
) -> AssumptionVerdict {
    let norm = partition.norm();
    let PartitionConstants { r, delta, nu, .. } = partition.constants();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ce11);
    let mut verdict = AssumptionVerdict {
        passed: true,
        cells_checked: 0,
        pairs_checked: 0,
        violation: None,
    };
    let fail = |v: &mut AssumptionVerdict, why: AssumptionViolation| {
        v.passed = false;
        v.violation = Some(why);
    };

    // levels[h] = feasible keys and representatives at depth h
    let mut levels: Vec<Vec<(CellKey, Point)>> = Vec::new();
    let mut frontier = vec![CellKey::ROOT];
    for h in 0..=max_depth {
        let bound = r * delta.powi(h as i32);
        let mut level = Vec::with_capacity(frontier.len());
        for &key in &frontier {
            if !partition.is_feasible(key) {
                continue;
            }
            verdict.cells_checked += 1;
            let rep = partition.representative(key);
            if !partition.domain().contains(&rep) {
                fail(
                    &mut verdict,
                    AssumptionViolation::InfeasibleRepresentative { key },
                );
                return verdict;
            }
            let cell = partition.cell(key);
            let corners = cell.corners();
            let mut pairs: Vec<(Point, Point)> = Vec::new();
            for a in 0..corners.len() {
                for b in a + 1..corners.len() {
                    pairs.push((corners[a].clone(), corners[b].clone()));
                }
            }
            for _ in 0..samples_per_cell {
                let u: Point = (0..cell.lower.len())
                    .map(|j| rng.random_range(cell.lower[j]..=cell.upper[j]))
                    .collect();
                let v: Point = (0..cell.lower.len())
                    .map(|j| rng.random_range(cell.lower[j]..=cell.upper[j]))
                    .collect();
                pairs.push((u, v));
            }
            for (u, v) in &pairs {
                let dist = norm.distance(u, v);
                if dist > bound * (1.0 + REL_TOL) {
                    fail(
                        &mut verdict,
                        AssumptionViolation::CellDiameter {
                            key,
                            distance: dist,
                            bound,
                        },
                    );
                    return verdict;
                }
            }
            level.push((key, rep));
        }
        let next = if h < max_depth {
            let mut next = Vec::new();
            for (key, _) in &level {
                match partition.children(*key) {
                    Ok(ch) => next.extend(ch),
                    Err(_) => break,
                }
            }
            next
        } else {
            Vec::new()
        };
        levels.push(level);
        frontier = next;
    }

    // Separation: a pair (p at depth h, q at depth h' ≥ h) violates the
    // condition only if ‖p − q‖ < ν·δ^{h'}, so q lies in a neighbouring
    // bucket of a level-h' hash with that bucket width.
    for (h_fine, fine) in levels.iter().enumerate() {
        let width = nu * delta.powi(h_fine as i32);
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (idx, (_, rep)) in fine.iter().enumerate() {
            buckets.entry(bucket_of(rep, width)).or_default().push(idx);
        }
        for level in &levels[..=h_fine] {
            for (pkey, prep) in level {
                let home = bucket_of(prep, width);
                let mut found = None;
                for_each_neighbor(&home, |nb| {
                    if found.is_some() {
                        return;
                    }
                    if let Some(list) = buckets.get(nb) {
                        for &qi in list {
                            let (qkey, qrep) = &fine[qi];
                            if qkey == pkey {
                                continue;
                            }
                            verdict.pairs_checked += 1;
                            let dist = norm.distance(prep, qrep);
                            if dist < width * (1.0 - REL_TOL) {
                                found = Some(AssumptionViolation::Separation {
                                    a: *pkey,
                                    b: *qkey,
                                    distance: dist,
                                    bound: width,
                                });
                                return;
                            }
                        }
                    }
                });
                if let Some(v) = found {
                    fail(&mut verdict, v);
                    return verdict;
                }
            }
        }
    }
    verdict
}

fn bucket_of(x: &[f64], width: f64) -> Vec<i64> {
    x.iter().map(|v| (v / width).floor() as i64).collect()
}

/// Visits the `3^d` buckets adjacent to (and including) `home`.
pub(crate) fn for_each_neighbor(home: &[i64], mut visit: impl FnMut(&[i64])) {
    let d = home.len();
    let mut offset = vec![-1i64; d];
    let mut probe = home.to_vec();
    loop {
        for j in 0..d {
            probe[j] = home[j] + offset[j];
        }
        visit(&probe);
        let mut j = 0;
        loop {
            if j == d {
                return;
            }
            offset[j] += 1;
            if offset[j] <= 1 {
                break;
            }
            offset[j] = -1;
            j += 1;
        }
    }
}
