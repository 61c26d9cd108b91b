use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::TestFunction;
use crate::geometry::{Norm, Point};

/// `K_adv = 16 L / (L − Lip f)`, the adversary's radius multiplier.
pub fn adversary_constant(lip: f64, lip_f: f64) -> Result<f64> {
    if !(lip_f < lip) {
        return Err(Error::InvalidArgument(format!(
            "the bump needs Lip(f) < L, got Lip(f) = {lip_f}, L = {lip}"
        )));
    }
    Ok(16.0 * lip / (lip - lip_f))
}

/// Lower-bound constant `c = 2^{-2} (2^{-7} (1 − Lip f / L))^d`.
pub fn lower_bound_constant(dim: usize, lip: f64, lip_f: f64) -> f64 {
    0.25 * (2f64.powi(-7) * (1.0 - lip_f / lip)).powi(dim as i32)
}

/// Cone bump `g(x) = 8ε̃ − (L − Lip f) ‖x − x̃‖` on the open ball of radius
/// `K_adv ε̃ / 2L` around `x̃`, and exactly zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpPerturbation {
    pub center: Point,
    pub eps_tilde: f64,
    #[serde(rename = "K_adv")]
    pub k_adv: f64,
    #[serde(rename = "L")]
    pub lip: f64,
    pub lip_f: f64,
    pub norm: Norm,
}

impl BumpPerturbation {
    pub fn height(&self) -> f64 {
        8.0 * self.eps_tilde
    }

    /// `16 L / K_adv = L − Lip f`.
    pub fn slope(&self) -> f64 {
        16.0 * self.lip / self.k_adv
    }

    pub fn radius(&self) -> f64 {
        self.k_adv * self.eps_tilde / (2.0 * self.lip)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = self.norm.distance(x, &self.center);
        if r < self.radius() {
            (self.height() - self.slope() * r).max(0.0)
        } else {
            0.0
        }
    }

    fn composite(&self, f: &TestFunction, sign: f64, tag: &str) -> TestFunction {
        let bump = self.clone();
        let base = f.evaluator();
        let label = format!("{}{}g", f.label(), tag);
        TestFunction::new(label, self.lip, move |x: &[f64]| {
            let fx = base(x);
            let g = bump.eval(x);
            // keep f's exact bits where the bump vanishes
            if g == 0.0 {
                fx
            } else {
                fx + sign * g
            }
        })
        .expect("bump built with L > Lip f >= 0")
    }

    /// `f + g`.
    pub fn plus(&self, f: &TestFunction) -> TestFunction {
        self.composite(f, 1.0, "+")
    }

    /// `f − g`.
    pub fn minus(&self, f: &TestFunction) -> TestFunction {
        self.composite(f, -1.0, "-")
    }
}

/// Builds the bump around `center` at scale `eps_tilde` for an `L`-class
/// containing `f`. Needs `f`'s exact Lipschitz constant, strictly below `L`.
pub fn build_bump(
    f: &TestFunction,
    center: &[f64],
    eps_tilde: f64,
    lip: f64,
    norm: Norm,
) -> Result<BumpPerturbation> {
    let lip_f = f.exact_lip().ok_or_else(|| {
        Error::MissingMetadata(format!("{} has no exact Lipschitz constant", f.label()))
    })?;
    if !(eps_tilde > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps_tilde must be positive, got {eps_tilde}"
        )));
    }
    Ok(BumpPerturbation {
        center: center.to_vec(),
        eps_tilde,
        k_adv: adversary_constant(lip, lip_f)?,
        lip,
        lip_f,
        norm,
    })
}
