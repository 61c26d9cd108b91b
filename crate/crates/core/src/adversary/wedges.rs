use crate::error::{Error, Result};
use crate::function::TestFunction;

/// The two piecewise-linear modifications of a 1D function around an anchor
/// triple `a < b < c`: `h+` climbs with slope `L` from `a` to `b`, `h−`
/// descends with slope `L`, and both rejoin `f` linearly at `c`.
///
/// When `b − a > c − b` the construction is applied to the mirrored
/// function and reflected back, so the steep part always spans the shorter
/// side.
#[derive(Debug, Clone)]
pub struct WedgePair1D {
    pub triple: (f64, f64, f64),
    pub lip: f64,
    pub mirrored: bool,
    f: TestFunction,
    fa: f64,
    fc: f64,
}

impl WedgePair1D {
    /// Triple in the oriented frame (`y = −x` when mirrored).
    fn frame(&self) -> (f64, f64, f64) {
        let (a, b, c) = self.triple;
        if self.mirrored {
            (-c, -b, -a)
        } else {
            (a, b, c)
        }
    }

    fn to_frame(&self, x: f64) -> f64 {
        if self.mirrored {
            -x
        } else {
            x
        }
    }

    /// Values at the oriented left and right anchors.
    fn anchors(&self) -> (f64, f64) {
        if self.mirrored {
            (self.fc, self.fa)
        } else {
            (self.fa, self.fc)
        }
    }

    fn eval_signed(&self, x: f64, sign: f64) -> f64 {
        let (a, b, c) = self.frame();
        let y = self.to_frame(x);
        if y < a || y > c {
            return self.f.eval(&[x]);
        }
        let (fa, fc) = self.anchors();
        let l = self.lip;
        if y <= b {
            fa + sign * l * (y - a)
        } else {
            let peak = fa + sign * l * (b - a);
            peak + (y - b) * (fc - peak) / (c - b)
        }
    }

    pub fn h_plus(&self, x: f64) -> f64 {
        self.eval_signed(x, 1.0)
    }

    pub fn h_minus(&self, x: f64) -> f64 {
        self.eval_signed(x, -1.0)
    }

    /// Largest slope magnitude of the linear pieces inside the triple.
    pub fn inner_slope(&self) -> f64 {
        let (a, b, c) = self.frame();
        let (fa, fc) = self.anchors();
        let l = self.lip;
        let rejoin = |sign: f64| {
            let peak = fa + sign * l * (b - a);
            ((fc - peak) / (c - b)).abs()
        };
        l.max(rejoin(1.0)).max(rejoin(-1.0))
    }

    pub fn h_plus_function(&self) -> TestFunction {
        let w = self.clone();
        TestFunction::new(format!("{}:h+", self.f.label()), self.lip, move |x| {
            w.h_plus(x[0])
        })
        .expect("wedge built with positive L")
    }

    pub fn h_minus_function(&self) -> TestFunction {
        let w = self.clone();
        TestFunction::new(format!("{}:h-", self.f.label()), self.lip, move |x| {
            w.h_minus(x[0])
        })
        .expect("wedge built with positive L")
    }
}

/// Builds the wedge pair of a 1D function around `(a, b, c)`.
pub fn build_wedges_1d(f: &TestFunction, triple: (f64, f64, f64), lip: f64) -> Result<WedgePair1D> {
    let (a, b, c) = triple;
    if !(a < b && b < c) {
        return Err(Error::InvalidArgument(format!(
            "wedge triple must be strictly increasing, got ({a}, {b}, {c})"
        )));
    }
    if !(lip > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "L must be positive, got {lip}"
        )));
    }
    Ok(WedgePair1D {
        triple,
        lip,
        mirrored: b - a > c - b,
        fa: f.eval(&[a]),
        fc: f.eval(&[c]),
        f: f.clone(),
    })
}
