//! Domains, norms and the elementary geometry used by every other module.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Point = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Sup,
    Euclidean,
    L1,
}

impl Norm {
    pub fn length(self, v: &[f64]) -> f64 {
        match self {
            Norm::Sup => v.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            Norm::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
        }
    }

    pub fn distance(self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match self {
            Norm::Sup => x
                .iter()
                .zip(y)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())),
            Norm::Euclidean => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Norm::L1 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
        }
    }

    /// Volume of the unit ball in dimension `dim`.
    pub fn unit_ball_volume(self, dim: usize) -> f64 {
        let d = dim as f64;
        match self {
            Norm::Sup => 2f64.powi(dim as i32),
            Norm::L1 => 2f64.powi(dim as i32) / factorial(dim),
            Norm::Euclidean => PI.powf(d / 2.0) / gamma_half_integer(dim + 2),
        }
    }

    /// `v_ρ = ρ^d · v_1`.
    pub fn ball_volume(self, dim: usize, radius: f64) -> f64 {
        radius.powi(dim as i32) * self.unit_ball_volume(dim)
    }

    /// `sup { ‖u‖_other : ‖u‖_self ≤ 1 }` in dimension `dim`.
    pub fn dominated_by(self, other: Norm, dim: usize) -> f64 {
        let d = dim as f64;
        match (self, other) {
            (a, b) if a == b => 1.0,
            (Norm::Sup, Norm::Euclidean) => d.sqrt(),
            (Norm::Sup, Norm::L1) => d,
            (Norm::Euclidean, Norm::L1) => d.sqrt(),
            // The remaining pairs map the unit ball into the unit ball.
            _ => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Norm::Sup => "sup",
            Norm::Euclidean => "euclidean",
            Norm::L1 => "l1",
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup" | "linf" | "inf" => Ok(Norm::Sup),
            "euclidean" | "l2" => Ok(Norm::Euclidean),
            "l1" => Ok(Norm::L1),
            other => Err(Error::InvalidArgument(format!("unknown norm '{other}'"))),
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Γ(k/2) for a positive integer `k`.
fn gamma_half_integer(k: usize) -> f64 {
    debug_assert!(k >= 1);
    if k.is_multiple_of(2) {
        factorial(k / 2 - 1)
    } else {
        // Γ(1/2) = √π, Γ(x + 1) = x Γ(x)
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while (2.0 * x) as usize != k {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// A compact domain: closed axis-aligned box or closed norm ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Rectangle {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        norm: Norm,
    },
}

impl Domain {
    pub fn rectangle(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("dimension must be positive".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidDomain(format!(
                    "dimension {j}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Domain::Rectangle { lower, upper })
    }

    pub fn unit_cube(dim: usize) -> Self {
        Domain::Rectangle {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn ball(center: Vec<f64>, radius: f64, norm: Norm) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidDomain("dimension must be positive".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Domain::Ball {
            center,
            radius,
            norm,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Rectangle { lower, .. } => lower.len(),
            Domain::Ball { center, .. } => center.len(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Rectangle { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi),
            Domain::Ball {
                center,
                radius,
                norm,
            } => norm.distance(x, center) <= *radius,
        }
    }

    /// Smallest axis-aligned box containing the domain.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Rectangle { lower, upper } => (lower.clone(), upper.clone()),
            Domain::Ball { center, radius, .. } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// Lebesgue volume of the domain.
    pub fn volume(&self) -> f64 {
        match self {
            Domain::Rectangle { lower, upper } => {
                lower.iter().zip(upper).map(|(lo, hi)| hi - lo).product()
            }
            Domain::Ball { radius, norm, .. } => norm.ball_volume(self.dim(), *radius),
        }
    }

    pub fn center(&self) -> Point {
        match self {
            Domain::Rectangle { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(lo, hi)| 0.5 * (lo + hi))
                .collect(),
            Domain::Ball { center, .. } => center.clone(),
        }
    }

    /// `max_{y ∈ X} ‖x − y‖` in `norm`. Exact for rectangles and for balls
    /// measured in their own norm; an upper bound otherwise.
    pub fn farthest_distance(&self, x: &[f64], norm: Norm) -> f64 {
        match self {
            Domain::Rectangle { lower, upper } => {
                let far: Vec<f64> = x
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(v, (lo, hi))| (v - lo).abs().max((hi - v).abs()))
                    .collect();
                norm.length(&far)
            }
            Domain::Ball {
                center,
                radius,
                norm: ball_norm,
            } => norm.distance(x, center) + radius * ball_norm.dominated_by(norm, self.dim()),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Domain {
        match self {
            Domain::Rectangle { lower, upper } => Domain::Rectangle {
                lower: lower.iter().zip(shift).map(|(a, s)| a + s).collect(),
                upper: upper.iter().zip(shift).map(|(a, s)| a + s).collect(),
            },
            Domain::Ball {
                center,
                radius,
                norm,
            } => Domain::Ball {
                center: center.iter().zip(shift).map(|(a, s)| a + s).collect(),
                radius: *radius,
                norm: *norm,
            },
        }
    }
}

/// Largest distance between two points of `domain`, measured in `norm`.
pub fn diameter(domain: &Domain, norm: Norm) -> Result<f64> {
    match domain {
        Domain::Rectangle { lower, upper } => {
            let edges: Vec<f64> = lower.iter().zip(upper).map(|(lo, hi)| hi - lo).collect();
            Ok(norm.length(&edges))
        }
        Domain::Ball {
            radius,
            norm: ball_norm,
            ..
        } => {
            // Every supported pair attains its extreme on an axis or diagonal
            // direction, so `dominated_by` is exact here.
            Ok(2.0 * radius * ball_norm.dominated_by(norm, domain.dim()))
        }
    }
}

/// Regular midpoint grid over the bounding box of a domain, filtered to the
/// domain. Points are produced in lexicographic order (dimension 0 slowest).
#[derive(Debug, Clone)]
pub struct MidpointGrid {
    pub points: Vec<Point>,
    /// Actual per-dimension spacing (≤ the requested step).
    pub spacing: Vec<f64>,
    /// Volume of one grid cell.
    pub cell_volume: f64,
}

impl MidpointGrid {
    pub fn new(domain: &Domain, step: f64, cap: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid step must be positive, got {step}"
            )));
        }
        let (lo, hi) = domain.bounding_box();
        let counts: Vec<usize> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| ((b - a) / step).ceil().max(1.0) as usize)
            .collect();
        let total: u128 = counts.iter().map(|&c| c as u128).product();
        if total > cap as u128 {
            return Err(Error::GridTooLarge { points: total, cap });
        }
        let spacing: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .zip(&counts)
            .map(|((a, b), &c)| (b - a) / c as f64)
            .collect();
        let axes: Vec<Vec<f64>> = lo
            .iter()
            .zip(&hi)
            .zip(&counts)
            .map(|((a, b), &c)| {
                (0..c)
                    .map(|k| a + (b - a) * (2 * k + 1) as f64 / (2 * c) as f64)
                    .collect()
            })
            .collect();
        let mut points = Vec::with_capacity(total as usize);
        for_each_product(&axes, |p| {
            if domain.contains(p) {
                points.push(p.to_vec());
            }
        });
        Ok(MidpointGrid {
            points,
            cell_volume: spacing.iter().product(),
            spacing,
        })
    }

    /// Largest `norm`-distance from a cell point to its cell midpoint.
    pub fn half_cell_radius(&self, norm: Norm) -> f64 {
        let half: Vec<f64> = self.spacing.iter().map(|s| 0.5 * s).collect();
        norm.length(&half)
    }
}

/// Visits every point of the Cartesian product of `axes` in lexicographic order.
pub(crate) fn for_each_product(axes: &[Vec<f64>], mut visit: impl FnMut(&[f64])) {
    if axes.iter().any(|a| a.is_empty()) {
        return;
    }
    let dim = axes.len();
    let mut idx = vec![0usize; dim];
    let mut p: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    loop {
        visit(&p);
        let mut j = dim;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                p[j] = axes[j][idx[j]];
                break;
            }
            idx[j] = 0;
            p[j] = axes[j][0];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diameters() {
        let cube = Domain::unit_cube(2);
        assert_eq!(diameter(&cube, Norm::Sup).unwrap(), 1.0);
        assert_eq!(diameter(&cube, Norm::L1).unwrap(), 2.0);
        assert!((diameter(&cube, Norm::Euclidean).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let ball = Domain::ball(vec![0.0, 0.0], 1.0, Norm::Euclidean).unwrap();
        assert_eq!(diameter(&ball, Norm::Euclidean).unwrap(), 2.0);
        assert_eq!(diameter(&ball, Norm::Sup).unwrap(), 2.0);
        let sup_ball = Domain::ball(vec![0.0, 0.0], 1.0, Norm::Sup).unwrap();
        assert!((diameter(&sup_ball, Norm::Euclidean).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(Norm::Sup.unit_ball_volume(1), 2.0);
        assert_eq!(Norm::Sup.unit_ball_volume(3), 8.0);
        assert_eq!(Norm::L1.unit_ball_volume(2), 2.0);
        assert!((Norm::Euclidean.unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((Norm::Euclidean.unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((Norm::Euclidean.unit_ball_volume(1) - 2.0).abs() < 1e-14);
        assert!((Norm::Sup.ball_volume(2, 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(Domain::rectangle(vec![0.0], vec![0.0]).is_err());
        assert!(Domain::rectangle(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(Domain::ball(vec![0.0], 0.0, Norm::Sup).is_err());
        assert!(Domain::rectangle(vec![], vec![]).is_err());
    }

    #[test]
    fn membership_is_closed() {
        let cube = Domain::unit_cube(2);
        assert!(cube.contains(&[1.0, 0.0]));
        assert!(!cube.contains(&[1.0 + 1e-12, 0.0]));
        let ball = Domain::ball(vec![0.0, 0.0], 1.0, Norm::Euclidean).unwrap();
        assert!(ball.contains(&[1.0, 0.0]));
        assert!(!ball.contains(&[0.8, 0.8]));
    }

    #[test]
    fn midpoint_grid_layout() {
        let g = MidpointGrid::new(&Domain::unit_cube(1), 0.25, 1000).unwrap();
        assert_eq!(
            g.points,
            vec![vec![0.125], vec![0.375], vec![0.625], vec![0.875]]
        );
        assert_eq!(g.cell_volume, 0.25);
        let g2 = MidpointGrid::new(&Domain::unit_cube(2), 0.5, 1000).unwrap();
        assert_eq!(g2.points[1], vec![0.25, 0.75]);
        assert!(matches!(
            MidpointGrid::new(&Domain::unit_cube(3), 0.001, 1000),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn norm_triangle_spot_check() {
        let pts = [[0.1, -0.4], [0.9, 0.3], [-0.7, 0.2]];
        for norm in [Norm::Sup, Norm::Euclidean, Norm::L1] {
            let (a, b, c) = (&pts[0], &pts[1], &pts[2]);
            assert!(norm.distance(a, c) <= norm.distance(a, b) + norm.distance(b, c) + 1e-15);
            assert_eq!(norm.distance(a, b), norm.distance(b, a));
            assert_eq!(norm.distance(a, a), 0.0);
        }
    }
}
