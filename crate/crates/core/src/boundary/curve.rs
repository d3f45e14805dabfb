//! Parametric boundary pieces with analytic first and second derivatives.

use std::f64::consts::TAU;
use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::pnorm::abs_pow;
use crate::vec2::Vec2;

/// A C² parametric curve `t -> (a(t), b(t))` on a closed parameter interval.
///
/// Curves are oriented so that the domain lies to the left of the direction
/// of travel, i.e. `(-b', a')` points inward.
pub trait ParamCurve: Debug + Send + Sync {
    fn point(&self, t: f64) -> Vec2;
    fn d1(&self, t: f64) -> Vec2;
    fn d2(&self, t: f64) -> Vec2;
    fn t_range(&self) -> (f64, f64);

    /// The curve closes on itself smoothly (`point(t0) == point(t1)`, with
    /// matching tangents).
    fn is_closed(&self) -> bool {
        false
    }

    fn is_straight(&self) -> bool {
        false
    }

    /// The parametrization was fitted to user data rather than given exactly.
    fn is_approximate(&self) -> bool {
        false
    }
}

/// Straight segment from `start` to `end`, `t` in `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Segment {
    pub start: Vec2,
    pub end: Vec2,
}

impl Segment {
    pub fn new(start: Vec2, end: Vec2) -> Self {
        Self { start, end }
    }
}

impl ParamCurve for Segment {
    fn point(&self, t: f64) -> Vec2 {
        // exact at both ends
        if t == 1.0 {
            return self.end;
        }
        self.start + (self.end - self.start) * t
    }
    fn d1(&self, _t: f64) -> Vec2 {
        self.end - self.start
    }
    fn d2(&self, _t: f64) -> Vec2 {
        Vec2::ZERO
    }
    fn t_range(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn is_straight(&self) -> bool {
        true
    }
}

/// Counterclockwise circular arc `center + r (cos t, sin t)`.
#[derive(Clone, Debug)]
pub struct CircleArc {
    pub center: Vec2,
    pub radius: f64,
    pub t0: f64,
    pub t1: f64,
}

impl CircleArc {
    pub fn new(center: Vec2, radius: f64, t0: f64, t1: f64) -> Self {
        Self { center, radius, t0, t1 }
    }

    pub fn full(center: Vec2, radius: f64) -> Self {
        Self::new(center, radius, 0.0, TAU)
    }
}

impl ParamCurve for CircleArc {
    fn point(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        self.center + Vec2::new(c, s) * self.radius
    }
    fn d1(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        Vec2::new(-s, c) * self.radius
    }
    fn d2(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        Vec2::new(-c, -s) * self.radius
    }
    fn t_range(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }
    fn is_closed(&self) -> bool {
        (self.t1 - self.t0 - TAU).abs() < 1e-14
    }
}

/// Closed superellipse `|x/A|^m + |y/B|^m = 1` in the radial parametrization
/// `P(t) = r(t) (A cos t, B sin t)`, `r = (|cos t|^m + |sin t|^m)^(-1/m)`.
#[derive(Clone, Debug)]
pub struct Superellipse {
    pub center: Vec2,
    pub exponent: f64,
    pub semi_x: f64,
    pub semi_y: f64,
}

impl Superellipse {
    pub fn new(center: Vec2, exponent: f64, semi_x: f64, semi_y: f64) -> Result<Self> {
        if !(exponent >= 2.0 && exponent.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "superellipse exponent must be >= 2, got {exponent}"
            )));
        }
        if !(semi_x > 0.0 && semi_y > 0.0) {
            return Err(Error::InvalidGeometry("superellipse semi-axes must be positive".into()));
        }
        Ok(Self { center, exponent, semi_x, semi_y })
    }

    /// `(r, r', r'')` at angle `t`.
    fn radial(&self, t: f64) -> (f64, f64, f64) {
        let m = self.exponent;
        let (s, c) = t.sin_cos();
        let (as_, ac) = (abs_pow(s, m - 2.0), abs_pow(c, m - 2.0));
        let g = abs_pow(c, m) + abs_pow(s, m);
        let g1 = m * s * c * (as_ - ac);
        let g2 = m * (-abs_pow(s, m) - abs_pow(c, m) + (m - 1.0) * (c * c * as_ + s * s * ac));
        let k = -1.0 / m;
        let r = g.powf(k);
        let r1 = k * g.powf(k - 1.0) * g1;
        let r2 = k * ((k - 1.0) * g.powf(k - 2.0) * g1 * g1 + g.powf(k - 1.0) * g2);
        (r, r1, r2)
    }

    fn scale(&self, v: Vec2) -> Vec2 {
        Vec2::new(v.x * self.semi_x, v.y * self.semi_y)
    }
}

impl ParamCurve for Superellipse {
    fn point(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        let (r, _, _) = self.radial(t);
        self.center + self.scale(Vec2::new(c, s) * r)
    }
    fn d1(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        let (r, r1, _) = self.radial(t);
        self.scale(Vec2::new(c, s) * r1 + Vec2::new(-s, c) * r)
    }
    fn d2(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        let (r, r1, r2) = self.radial(t);
        self.scale(Vec2::new(c, s) * r2 + Vec2::new(-s, c) * (2.0 * r1) + Vec2::new(-c, -s) * r)
    }
    fn t_range(&self) -> (f64, f64) {
        (0.0, TAU)
    }
    fn is_closed(&self) -> bool {
        true
    }
}

/// Periodic cubic spline through user points, uniform parameter `t in [0, n]`.
#[derive(Clone, Debug)]
pub struct PeriodicSpline {
    knots: Vec<Vec2>,
    // second derivatives at the knots
    moments: Vec<Vec2>,
}

impl PeriodicSpline {
    pub fn new(points: &[Vec2]) -> Result<Self> {
        let n = points.len();
        if n < 4 {
            return Err(Error::InvalidGeometry("spline needs at least 4 points".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry("spline points must be finite".into()));
        }
        let mx = periodic_moments(&points.iter().map(|p| p.x).collect::<Vec<_>>());
        let my = periodic_moments(&points.iter().map(|p| p.y).collect::<Vec<_>>());
        let moments = mx.into_iter().zip(my).map(|(x, y)| Vec2::new(x, y)).collect();
        Ok(Self { knots: points.to_vec(), moments })
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.knots.len();
        let tt = t.rem_euclid(n as f64);
        let i = (tt.floor() as usize).min(n - 1);
        (i, tt - i as f64)
    }

    fn pieces(&self, i: usize) -> (Vec2, Vec2, Vec2, Vec2) {
        let j = (i + 1) % self.knots.len();
        (self.knots[i], self.knots[j], self.moments[i], self.moments[j])
    }
}

/// Second derivatives of the periodic interpolating cubic with unit knot
/// spacing: `M[i-1] + 4 M[i] + M[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1])`.
fn periodic_moments(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let rhs: Vec<f64> = (0..n)
        .map(|i| 6.0 * (y[(i + 1) % n] - 2.0 * y[i] + y[(i + n - 1) % n]))
        .collect();
    // Sherman-Morrison on the cyclic tridiagonal system (1, 4, 1).
    let (a, b, c) = (1.0, 4.0, 1.0);
    let gamma = -b;
    let mut diag = vec![b; n];
    diag[0] = b - gamma;
    diag[n - 1] = b - a * c / gamma;
    let solve = |d: &[f64]| -> Vec<f64> {
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        cp[0] = c / diag[0];
        dp[0] = d[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - a * cp[i - 1];
            cp[i] = c / m;
            dp[i] = (d[i] - a * dp[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
        x
    };
    let x = solve(&rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = a;
    let z = solve(&u);
    let fact = (x[0] + c * x[n - 1] / gamma) / (1.0 + z[0] + c * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

impl ParamCurve for PeriodicSpline {
    fn point(&self, t: f64) -> Vec2 {
        let (i, s) = self.locate(t);
        let (p0, p1, m0, m1) = self.pieces(i);
        let r = 1.0 - s;
        p0 * r + p1 * s + (m0 * (r * r * r - r) + m1 * (s * s * s - s)) * (1.0 / 6.0)
    }
    fn d1(&self, t: f64) -> Vec2 {
        let (i, s) = self.locate(t);
        let (p0, p1, m0, m1) = self.pieces(i);
        let r = 1.0 - s;
        p1 - p0 + (m0 * (1.0 - 3.0 * r * r) + m1 * (3.0 * s * s - 1.0)) * (1.0 / 6.0)
    }
    fn d2(&self, t: f64) -> Vec2 {
        let (i, s) = self.locate(t);
        let (_, _, m0, m1) = self.pieces(i);
        m0 * (1.0 - s) + m1 * s
    }
    fn t_range(&self) -> (f64, f64) {
        (0.0, self.knots.len() as f64)
    }
    fn is_closed(&self) -> bool {
        true
    }
    fn is_approximate(&self) -> bool {
        true
    }
}

/// Monotone change of parameter: `t = phi(s)` where `map(s) = (phi, phi', phi'')`.
///
/// Mostly useful for checking that intrinsic quantities do not depend on the
/// parametrization.
#[derive(Clone)]
pub struct Reparametrized {
    pub inner: Arc<dyn ParamCurve>,
    pub map: fn(f64) -> (f64, f64, f64),
    pub s_range: (f64, f64),
}

impl Debug for Reparametrized {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Reparametrized")
            .field("inner", &self.inner)
            .field("s_range", &self.s_range)
            .finish()
    }
}

impl ParamCurve for Reparametrized {
    fn point(&self, s: f64) -> Vec2 {
        self.inner.point((self.map)(s).0)
    }
    fn d1(&self, s: f64) -> Vec2 {
        let (t, t1, _) = (self.map)(s);
        self.inner.d1(t) * t1
    }
    fn d2(&self, s: f64) -> Vec2 {
        let (t, t1, t2) = (self.map)(s);
        self.inner.d2(t) * (t1 * t1) + self.inner.d1(t) * t2
    }
    fn t_range(&self) -> (f64, f64) {
        self.s_range
    }
    fn is_closed(&self) -> bool {
        self.inner.is_closed()
    }
    fn is_straight(&self) -> bool {
        self.inner.is_straight()
    }
    fn is_approximate(&self) -> bool {
        self.inner.is_approximate()
    }
}

/// `t = s^3 + s`.
pub fn cubic_reparam(s: f64) -> (f64, f64, f64) {
    (s * s * s + s, 3.0 * s * s + 1.0, 6.0 * s)
}

/// Inverse of [`cubic_reparam`] (Cardano, single real root).
pub fn cubic_reparam_inverse(t: f64) -> f64 {
    let d = (t * t / 4.0 + 1.0 / 27.0).sqrt();
    (t / 2.0 + d).cbrt() + (t / 2.0 - d).cbrt()
}
