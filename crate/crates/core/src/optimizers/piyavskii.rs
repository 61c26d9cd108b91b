//! Certified Piyavskii–Shubert: query the maximizer of the upper envelope
//! `f̂_i(x) = min_j f(x_j) + L‖x_j − x‖` and certify with `max f̂_i − max_j f(x_j)`.

use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::geometry::{Domain, MidpointGrid, Norm, Point};
use crate::trace::{AlgorithmKind, RunTrace, TraceBuilder, TraceHeader};

/// Exact piecewise-linear upper envelope on an interval.
#[derive(Debug, Clone)]
pub struct Envelope1D {
    lo: f64,
    hi: f64,
    lip: f64,
    /// Observations sorted by abscissa.
    points: Vec<(f64, f64)>,
}

/// A vertex of the envelope graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub x: f64,
    pub value: f64,
}

impl Envelope1D {
    pub fn new(lo: f64, hi: f64, lip: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidDomain(format!(
                "need lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(lip > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "L must be positive, got {lip}"
            )));
        }
        Ok(Envelope1D {
            lo,
            hi,
            lip,
            points: Vec::new(),
        })
    }

    pub fn insert(&mut self, x: f64, fx: f64) {
        let pos = self.points.partition_point(|p| p.0 < x);
        if self.points.get(pos).is_some_and(|p| p.0 == x) {
            return;
        }
        self.points.insert(pos, (x, fx));
    }

    pub fn observations(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Direct evaluation of the minimum over all observations.
    pub fn eval(&self, x: f64) -> f64 {
        self.points
            .iter()
            .map(|&(xj, fj)| fj + self.lip * (x - xj).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Envelope vertices from left to right: the interval ends, every
    /// observation, and the peak between each adjacent pair.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(2 * self.points.len() + 1);
        if self.points.is_empty() {
            return out;
        }
        if self.points[0].0 > self.lo {
            out.push(Vertex {
                x: self.lo,
                value: self.eval(self.lo),
            });
        }
        for (k, &(x, fx)) in self.points.iter().enumerate() {
            out.push(Vertex { x, value: fx });
            if let Some(&(xn, fn_)) = self.points.get(k + 1) {
                let l = self.lip;
                let peak = ((fn_ - fx + l * (x + xn)) / (2.0 * l)).clamp(x, xn);
                let value = 0.5 * (fx + fn_ + l * (xn - x));
                if peak > x && peak < xn {
                    out.push(Vertex { x: peak, value });
                }
            }
        }
        let last = self.points[self.points.len() - 1].0;
        if last < self.hi {
            out.push(Vertex {
                x: self.hi,
                value: self.eval(self.hi),
            });
        }
        out
    }

    /// Leftmost maximizing vertex.
    pub fn maximum(&self) -> Option<Vertex> {
        self.vertices()
            .into_iter()
            .fold(None, |best: Option<Vertex>, v| match best {
                Some(b) if v.value <= b.value => Some(b),
                _ => Some(v),
            })
    }
}

fn check_common(lip: f64, eps: f64, budget: usize, f: &TestFunction) -> Result<()> {
    if !(lip.is_finite() && lip > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "L must be positive, got {lip}"
        )));
    }
    if lip < f.lip_bound() {
        return Err(Error::InvalidArgument(format!(
            "L = {lip} is below the function's Lipschitz bound {}",
            f.lip_bound()
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    Ok(())
}

/// Exact one-dimensional Piyavskii–Shubert on `[lo, hi]` starting at `x1`.
pub fn ps_run_1d(
    f: &TestFunction,
    interval: (f64, f64),
    lip: f64,
    eps: f64,
    x1: f64,
    budget: usize,
) -> Result<RunTrace> {
    check_common(lip, eps, budget, f)?;
    let (lo, hi) = interval;
    let mut env = Envelope1D::new(lo, hi, lip)?;
    if !(lo <= x1 && x1 <= hi) {
        return Err(Error::InvalidArgument(format!(
            "x1 = {x1} outside [{lo}, {hi}]"
        )));
    }
    let mut trace = TraceBuilder::new(TraceHeader {
        algorithm: AlgorithmKind::Ps1d,
        function: f.label().to_string(),
        lip,
        eps: Some(eps),
        budget,
        seed: None,
    });
    let mut next = x1;
    loop {
        let fx = f.eval(&[next]);
        env.insert(next, fx);
        let top = env.maximum().expect("envelope has an observation");
        let xi = trace.push(vec![next], fx, |best| Some(top.value - best)).xi;
        if xi.is_some_and(|xi| xi <= eps) {
            return Ok(trace.finish());
        }
        if trace.len() >= budget {
            let mut t = trace.finish();
            t.annotate("budget exhausted before the certificate reached eps");
            return Ok(t);
        }
        next = top.x;
    }
}

/// Finite candidate set with a proven covering radius of the domain.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    points: Vec<Point>,
    covering_radius: f64,
    norm: Norm,
}

impl CandidateSet {
    /// Midpoint-free regular grid over the bounding box including both box
    /// ends, filtered to the domain.
    pub fn grid(domain: &Domain, norm: Norm, step: f64, cap: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step must be positive, got {step}"
            )));
        }
        let (lo, hi) = domain.bounding_box();
        let dim = lo.len();
        let mut counts = Vec::with_capacity(dim);
        for (a, b) in lo.iter().zip(&hi) {
            let mut m = ((b - a) / step).ceil().max(1.0) as usize;
            // even counts put the box center on the grid
            if m % 2 == 1 {
                m += 1;
            }
            counts.push(m);
        }
        let total: u128 = counts.iter().map(|&m| m as u128 + 1).product();
        if total > cap as u128 {
            return Err(Error::GridTooLarge { points: total, cap });
        }
        let axes: Vec<Vec<f64>> = (0..dim)
            .map(|j| {
                let m = counts[j];
                (0..=m)
                    .map(|k| {
                        if k == m {
                            hi[j]
                        } else {
                            lo[j] + (hi[j] - lo[j]) * (k as f64) / (m as f64)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut points = Vec::new();
        crate::geometry::for_each_product(&axes, |p| {
            if domain.contains(p) {
                points.push(p.to_vec());
            }
        });
        let half: Vec<f64> = (0..dim)
            .map(|j| 0.5 * (hi[j] - lo[j]) / counts[j] as f64)
            .collect();
        let covering_radius = match domain {
            Domain::Rectangle { .. } => norm.length(&half),
            Domain::Ball {
                radius,
                norm: ball_norm,
                ..
            } => {
                // Shrink x radially by h (in the ball norm); the grid point
                // nearest to the shrunk point lies in the ball.
                let h = ball_norm.length(&half);
                if h >= *radius {
                    return Err(Error::InvalidArgument(format!(
                        "grid step {step} too coarse for a ball of radius {radius}"
                    )));
                }
                h * ball_norm.dominated_by(norm, dim) + norm.length(&half)
            }
        };
        Ok(CandidateSet {
            points,
            covering_radius,
            norm,
        })
    }

    /// Arbitrary candidates; the covering radius is the smallest
    /// farthest-point distance over the candidates.
    pub fn from_points(domain: &Domain, norm: Norm, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("candidate set is empty".into()));
        }
        if let Some(p) = points.iter().find(|p| !domain.contains(p)) {
            return Err(Error::InvalidArgument(format!(
                "candidate {p:?} outside the domain"
            )));
        }
        let covering_radius = points
            .iter()
            .map(|p| domain.farthest_distance(p, norm))
            .fold(f64::INFINITY, f64::min);
        Ok(CandidateSet {
            points,
            covering_radius,
            norm,
        })
    }

    /// Midpoints of a grid (see [`MidpointGrid`]).
    pub fn midpoints(domain: &Domain, norm: Norm, step: f64, cap: usize) -> Result<Self> {
        let grid = MidpointGrid::new(domain, step, cap)?;
        if !matches!(domain, Domain::Rectangle { .. }) {
            return Err(Error::Unsupported(
                "midpoint candidates require a rectangle".into(),
            ));
        }
        let covering_radius = grid.half_cell_radius(norm);
        Ok(CandidateSet {
            points: grid.points,
            covering_radius,
            norm,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn covering_radius(&self) -> f64 {
        self.covering_radius
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }
}

/// Piyavskii–Shubert with the inner maximization restricted to a finite
/// candidate set. The certificate adds `L·r_cov`, which dominates the gap
/// between the candidate maximum and the true envelope maximum.
#[allow(clippy::too_many_arguments)]
pub fn ps_run_grid(
    f: &TestFunction,
    domain: &Domain,
    lip: f64,
    eps: f64,
    x1: &[f64],
    candidates: &CandidateSet,
    budget: usize,
) -> Result<RunTrace> {
    check_common(lip, eps, budget, f)?;
    if !domain.contains(x1) {
        return Err(Error::InvalidArgument(format!(
            "x1 = {x1:?} outside the domain"
        )));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("candidate set is empty".into()));
    }
    if candidates.points[0].len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: candidates.points[0].len(),
        });
    }
    let norm = candidates.norm;
    let r_cov = candidates.covering_radius;
    let mut trace = TraceBuilder::new(TraceHeader {
        algorithm: AlgorithmKind::Psgrid,
        function: f.label().to_string(),
        lip,
        eps: Some(eps),
        budget,
        seed: None,
    });
    let mut notes = Vec::new();
    if r_cov > eps / lip {
        notes.push(format!(
            "covering radius {r_cov} exceeds eps/L = {}; sigma may be pessimistic",
            eps / lip
        ));
    }
    let mut envelope = vec![f64::INFINITY; candidates.len()];
    let mut queried = vec![false; candidates.len()];
    let mut next: Point = x1.to_vec();
    loop {
        let fx = f.eval(&next);
        let mut top = f64::NEG_INFINITY;
        for (k, c) in candidates.points.iter().enumerate() {
            let bound = fx + lip * norm.distance(&next, c);
            if bound < envelope[k] {
                envelope[k] = bound;
            }
            if *c == next {
                queried[k] = true;
            }
            top = top.max(envelope[k]);
        }
        let xi = trace
            .push(next, fx, |best| Some((top - best) + lip * r_cov))
            .xi;
        if xi.is_some_and(|xi| xi <= eps) {
            break;
        }
        if trace.len() >= budget {
            notes.push("budget exhausted before the certificate reached eps".into());
            break;
        }
        let pick =
            (0..candidates.len())
                .filter(|&k| !queried[k])
                .fold(None, |best: Option<usize>, k| match best {
                    Some(b) if envelope[k] <= envelope[b] => Some(b),
                    _ => Some(k),
                });
        match pick {
            Some(k) if envelope[k] > trace.best_value() => next = candidates.points[k].clone(),
            _ => {
                notes.push(format!(
                    "envelope maximum attained at a queried point; certificate floor L*r_cov = {}",
                    lip * r_cov
                ));
                break;
            }
        }
    }
    let mut t = trace.finish();
    for n in notes {
        t.annotate(n);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{sigma_from_trace, SampleCount};

    #[test]
    fn tent_hand_computation() {
        let f = TestFunction::new("tent", 1.0, |x| -(x[0] - 0.5).abs()).unwrap();
        let t = ps_run_1d(&f, (0.0, 1.0), 1.0, 0.1, 0.5, 100).unwrap();
        let xs: Vec<f64> = t.queries().map(|x| x[0]).collect();
        let xis: Vec<f64> = t.records().iter().map(|r| r.xi.unwrap()).collect();
        assert_eq!(xs, vec![0.5, 0.0, 1.0]);
        assert_eq!(xis, vec![0.5, 0.5, 0.0]);
        for eps in [0.49, 0.25, 0.01] {
            let t = ps_run_1d(&f, (0.0, 1.0), 1.0, eps, 0.5, 100).unwrap();
            assert_eq!(sigma_from_trace(&t, eps).unwrap(), SampleCount::At(3));
        }
    }

    #[test]
    fn cone_in_one_dimension() {
        let f = TestFunction::new("abs", 2.0, |x| 2.0 * x[0].abs()).unwrap();
        let t = ps_run_1d(&f, (-1.0, 1.0), 2.0, 1e-3, 0.0, 100).unwrap();
        assert_eq!(t.records()[1].x, vec![-1.0]);
        assert_eq!(t.records()[1].xi, Some(0.0));
        assert_eq!(sigma_from_trace(&t, 1e-3).unwrap(), SampleCount::At(2));
    }

    #[test]
    fn envelope_interpolates_and_has_slopes_l() {
        let mut env = Envelope1D::new(0.0, 1.0, 2.0).unwrap();
        for &(x, y) in &[(0.3, 0.1), (0.7, -0.2), (0.05, 0.3), (0.95, 0.0)] {
            env.insert(x, y);
        }
        for &(x, y) in env.observations() {
            assert_eq!(env.eval(x), y);
        }
        let v = env.vertices();
        for w in v.windows(2) {
            let slope = (w[1].value - w[0].value) / (w[1].x - w[0].x);
            assert!((slope.abs() - 2.0).abs() < 1e-9, "slope {slope}");
        }
        for p in &v {
            assert!((env.eval(p.x) - p.value).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_candidates_contain_sphere_point() {
        let ball = Domain::ball(vec![0.0, 0.0], 1.0, Norm::Euclidean).unwrap();
        let c = CandidateSet::grid(&ball, Norm::Euclidean, 0.1, 1 << 20).unwrap();
        assert!(c.points().iter().any(|p| p == &vec![1.0, 0.0]));
        assert!(c.points().iter().any(|p| p == &vec![0.0, 0.0]));
        assert!(c.covering_radius() <= 0.1 * 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn covering_radius_holds_on_samples() {
        use rand::{Rng, SeedableRng};
        let ball = Domain::ball(vec![0.0, 0.0], 1.0, Norm::Euclidean).unwrap();
        let c = CandidateSet::grid(&ball, Norm::Euclidean, 0.2, 1 << 20).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut n = 0;
        while n < 3000 {
            let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            if !ball.contains(&x) {
                continue;
            }
            n += 1;
            let d = c
                .points()
                .iter()
                .map(|p| Norm::Euclidean.distance(p, &x))
                .fold(f64::INFINITY, f64::min);
            assert!(d <= c.covering_radius());
        }
    }

    #[test]
    fn cone_two_dimensions_sigma_two() {
        let ball = Domain::ball(vec![0.0, 0.0], 1.0, Norm::Euclidean).unwrap();
        let f = TestFunction::new("cone", 1.0, |x| Norm::Euclidean.length(x)).unwrap();
        let c = CandidateSet::grid(&ball, Norm::Euclidean, 0.05, 1 << 20).unwrap();
        let eps = c.covering_radius();
        let t = ps_run_grid(&f, &ball, 1.0, eps, &[0.0, 0.0], &c, 100).unwrap();
        assert!(t.records()[0].xi.unwrap() >= 1.0);
        assert_eq!(sigma_from_trace(&t, eps).unwrap(), SampleCount::At(2));
        assert_eq!(Norm::Euclidean.length(&t.records()[1].x), 1.0);
    }

    #[test]
    fn singleton_candidates_never_certify_small_eps() {
        let ball = Domain::ball(vec![0.0, 0.0], 1.0, Norm::Euclidean).unwrap();
        let f = TestFunction::new("cone", 1.0, |x| Norm::Euclidean.length(x)).unwrap();
        let c = CandidateSet::from_points(&ball, Norm::Euclidean, vec![vec![0.0, 0.0]]).unwrap();
        assert_eq!(c.covering_radius(), 1.0);
        let t = ps_run_grid(&f, &ball, 1.0, 0.1, &[0.0, 0.0], &c, 50).unwrap();
        assert_eq!(t.records()[0].xi, Some(1.0));
        assert_eq!(sigma_from_trace(&t, 0.1).unwrap(), SampleCount::NotReached);
        assert!(!t.annotations().is_empty());
    }
}
