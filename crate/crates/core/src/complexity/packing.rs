use crate::error::{Error, Result};
use crate::geometry::Norm;

use super::spatial::SpatialHash;

/// Largest point set accepted by the exact brute-force oracles.
pub const ORACLE_CAP: usize = 18;

/// Greedy `r`-packing: scans `points` in the given order and keeps a point
/// when it lies at distance `> r` from every point kept so far. Returns the
/// indices kept.
///
/// The result is a maximal `r`-packing, so its size lies between the exact
/// `2r`-packing number and the exact `r`-packing number.
pub fn greedy_packing<P: AsRef<[f64]>>(points: &[P], r: f64, norm: Norm) -> Vec<usize> {
    let Some(first) = points.first() else {
        return Vec::new();
    };
    assert!(r > 0.0, "packing radius must be positive");
    let mut index = SpatialHash::new(r, first.as_ref().len());
    let mut kept = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let x = p.as_ref();
        if !index.any_near(x, |j| norm.distance(points[j].as_ref(), x) <= r) {
            index.insert(x, i);
            kept.push(i);
        }
    }
    kept
}

/// Size of [`greedy_packing`].
pub fn greedy_packing_number<P: AsRef<[f64]>>(points: &[P], r: f64, norm: Norm) -> usize {
    greedy_packing(points, r, norm).len()
}

fn check_oracle_size(n: usize) -> Result<()> {
    if n > ORACLE_CAP {
        return Err(Error::OracleTooLarge {
            size: n,
            cap: ORACLE_CAP,
        });
    }
    Ok(())
}

/// `adj[i]` has bit `j` set when `i ≠ j` and `‖x_i − x_j‖ ≤ r`.
fn closeness<P: AsRef<[f64]>>(points: &[P], r: f64, norm: Norm) -> Vec<u32> {
    let n = points.len();
    let mut adj = vec![0u32; n];
    for i in 0..n {
        for j in i + 1..n {
            if norm.distance(points[i].as_ref(), points[j].as_ref()) <= r {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    adj
}

fn max_independent(candidates: u32, adj: &[u32]) -> usize {
    if candidates == 0 {
        return 0;
    }
    let v = candidates.trailing_zeros() as usize;
    let rest = candidates & !(1 << v);
    // v is either excluded, or included with its neighbours removed.
    let with = 1 + max_independent(rest & !adj[v], adj);
    if adj[v] & rest == 0 {
        return with;
    }
    with.max(max_independent(rest, adj))
}

/// Exact packing number `M(E, r)`: the largest subset with pairwise
/// distances `> r`. Exponential; limited to [`ORACLE_CAP`] points.
pub fn exact_packing_bruteforce<P: AsRef<[f64]>>(
    points: &[P],
    r: f64,
    norm: Norm,
) -> Result<usize> {
    check_oracle_size(points.len())?;
    let adj = closeness(points, r, norm);
    let all = if points.is_empty() {
        0
    } else {
        u32::MAX >> (32 - points.len())
    };
    Ok(max_independent(all, &adj))
}

/// Exact covering number `N(E, r)` with centres restricted to `E`: the
/// fewest points of `E` whose closed `r`-balls cover `E`. Exponential;
/// limited to [`ORACLE_CAP`] points.
#[allow(non_snake_case)]
pub fn exact_covering_centers_in_E<P: AsRef<[f64]>>(
    points: &[P],
    r: f64,
    norm: Norm,
) -> Result<usize> {
    check_oracle_size(points.len())?;
    let n = points.len();
    if n == 0 {
        return Ok(0);
    }
    let ball: Vec<u32> = closeness(points, r, norm)
        .into_iter()
        .enumerate()
        .map(|(i, a)| a | (1 << i))
        .collect();
    let full = u32::MAX >> (32 - n);
    let mut cover = vec![0u32; 1 << n];
    let mut best = n;
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        cover[mask] = cover[mask & (mask - 1)] | ball[low];
        if cover[mask] == full {
            best = best.min(mask.count_ones() as usize);
        }
    }
    Ok(best)
}
