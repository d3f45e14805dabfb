use std::sync::Arc;

use crate::boundary::curve::ParamCurve;
use crate::error::{Error, Result};
use crate::pnorm::{abs_pow, f_p, gamma_q, ExponentPair};
use crate::vec2::Vec2;

/// Relative size below which a tangent component counts as exactly zero.
pub(crate) const AXIS_EPS: f64 = 1e-14;

/// One smooth piece of the boundary together with its position in the domain.
#[derive(Clone, Debug)]
pub struct BoundaryArc {
    pub id: usize,
    pub loop_id: usize,
    pub curve: Arc<dyn ParamCurve>,
}

impl BoundaryArc {
    #[inline]
    pub fn point(&self, t: f64) -> Vec2 {
        self.curve.point(t)
    }
    #[inline]
    pub fn d1(&self, t: f64) -> Vec2 {
        self.curve.d1(t)
    }
    #[inline]
    pub fn d2(&self, t: f64) -> Vec2 {
        self.curve.d2(t)
    }
    #[inline]
    pub fn t_range(&self) -> (f64, f64) {
        self.curve.t_range()
    }
    pub fn t_mid(&self) -> f64 {
        let (a, b) = self.t_range();
        0.5 * (a + b)
    }

    /// `(-b', a')`, not normalized.
    #[inline]
    pub fn inward_normal(&self, t: f64) -> Vec2 {
        self.d1(t).perp()
    }

    /// Inward p-normal `(-f_p(b'), f_p(a')) / (|a'|^q + |b'|^q)^(1/p)`; it has
    /// unit p-norm.
    pub fn inward_p_normal(&self, t: f64, e: ExponentPair) -> Vec2 {
        p_normal_of_tangent(self.d1(t), e)
    }

    /// Classical signed curvature; positive where the domain is locally convex.
    pub fn curvature(&self, t: f64) -> f64 {
        let d1 = self.d1(t);
        let n = d1.norm();
        d1.cross(self.d2(t)) / (n * n * n)
    }

    /// True when the tangent at `t` is parallel to a coordinate axis.
    pub fn is_axis_tangent(&self, t: f64) -> bool {
        let d1 = self.d1(t);
        let s = d1.norm();
        d1.x.abs() <= AXIS_EPS * s || d1.y.abs() <= AXIS_EPS * s
    }

    /// p-curvature. Undefined for `p > 2` where the tangent is axis-parallel,
    /// except on straight pieces where it is zero.
    pub fn p_curvature(&self, t: f64, e: ExponentPair) -> Result<f64> {
        let d1 = self.d1(t);
        let num = d1.cross(self.d2(t));
        let s = d1.norm();
        if e.is_euclidean() {
            return Ok(num / (s * s * s));
        }
        if self.is_axis_tangent(t) {
            if self.curve.is_straight() {
                return Ok(0.0);
            }
            return Err(Error::UndefinedCurvature { arc: self.id, t });
        }
        Ok(p_curvature_raw(d1, num, e))
    }

    /// Reparametrization-invariant weight of the Laplacian of `d_p`; equals 1
    /// for `p = 2` and vanishes at axis-parallel tangents for `p > 2`.
    pub fn tau_p(&self, t: f64, e: ExponentPair) -> f64 {
        if e.is_euclidean() {
            return 1.0;
        }
        let p = e.p();
        let d1 = self.d1(t);
        let m = d1.x.abs().max(d1.y.abs());
        let (a, b) = (d1.x / m, d1.y / m);
        let r = 2.0 / (p - 1.0);
        let num = (abs_pow(b, r) + abs_pow(a, r)) * abs_pow(a * b, (p - 2.0) / (p - 1.0));
        let q = e.q();
        let den = (abs_pow(a, q) + abs_pow(b, q)).powf((2.0 * p - 2.0) / p);
        num / den
    }

    /// `(t, d) -> y(t) + d mu(t)`.
    pub fn map_f(&self, t: f64, d: f64, e: ExponentPair) -> Vec2 {
        self.point(t) + self.inward_p_normal(t, e) * d
    }

    /// Gradient of `d_p` at points whose foot is `y(t)`:
    /// `(-b', a') / gamma_q((a', b'))`.
    pub fn distance_gradient(&self, t: f64, e: ExponentPair) -> Vec2 {
        let d1 = self.d1(t);
        d1.perp() * (1.0 / gamma_q(d1, e))
    }
}

pub(crate) fn p_normal_of_tangent(d1: Vec2, e: ExponentPair) -> Vec2 {
    let m = d1.x.abs().max(d1.y.abs());
    let (a, b) = (d1.x / m, d1.y / m);
    let q = e.q();
    let s = (abs_pow(a, q) + abs_pow(b, q)).powf(1.0 / e.p());
    Vec2::new(-f_p(b, e), f_p(a, e)) * (1.0 / s)
}

fn p_curvature_raw(d1: Vec2, num: f64, e: ExponentPair) -> f64 {
    let p = e.p();
    let r = (p - 2.0) / (p - 1.0);
    let den = (p - 1.0)
        * abs_pow(d1.x, r)
        * abs_pow(d1.y, r)
        * gamma_q(d1, e).powf((p + 1.0) / (p - 1.0));
    num / den
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, SQRT_2, TAU};

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::boundary::curve::{cubic_reparam, cubic_reparam_inverse, CircleArc, Reparametrized, Segment, Superellipse};
    use crate::pnorm::{gamma_p, p_circle_point};

    fn ep(p: f64) -> ExponentPair {
        ExponentPair::new(p).unwrap()
    }

    fn arc(c: impl ParamCurve + 'static) -> BoundaryArc {
        BoundaryArc { id: 0, loop_id: 0, curve: Arc::new(c) }
    }

    fn unit_circle() -> BoundaryArc {
        arc(CircleArc::full(Vec2::ZERO, 1.0))
    }

    #[test]
    fn normals_on_circle_and_segment() {
        let c = unit_circle();
        let n = c.inward_normal(0.0);
        assert_abs_diff_eq!(n.x, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.y, 0.0, epsilon = 1e-15);
        let n = c.inward_normal(FRAC_PI_4).normalized();
        assert_abs_diff_eq!(n.x, -SQRT_2 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(n.y, -SQRT_2 / 2.0, epsilon = 1e-15);
        let s = arc(Segment::new(Vec2::ZERO, Vec2::new(1.0, 0.0)));
        assert_eq!(s.inward_normal(0.3), Vec2::new(0.0, 1.0));
    }

    #[test]
    fn p_normal_examples() {
        let c = unit_circle();
        let mu = c.inward_p_normal(FRAC_PI_4, ep(2.0));
        assert_abs_diff_eq!(mu.x, -SQRT_2 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mu.y, -SQRT_2 / 2.0, epsilon = 1e-15);
        for p in [2.0, 3.0, 4.0] {
            let mu = c.inward_p_normal(0.0, ep(p));
            assert_abs_diff_eq!(mu.x, -1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(mu.y, 0.0, epsilon = 1e-15);
        }
        let e = ep(4.0);
        let mu = c.inward_p_normal(FRAC_PI_4, e);
        assert_abs_diff_eq!(gamma_p(mu, e), 1.0, epsilon = 1e-14);
        let nu = c.inward_normal(FRAC_PI_4);
        let dir = Vec2::new(f_p(nu.x, e), f_p(nu.y, e));
        assert_abs_diff_eq!(mu.cross(dir), 0.0, epsilon = 1e-14);
        assert!(mu.dot(dir) > 0.0);
    }

    #[test]
    fn p_normal_has_unit_p_norm_everywhere() {
        let c = unit_circle();
        for p in [2.0, 2.5, 3.0, 4.0, 7.0] {
            for k in 0..200 {
                let t = TAU * k as f64 / 200.0;
                assert_abs_diff_eq!(gamma_p(c.inward_p_normal(t, ep(p)), ep(p)), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn curvature_examples() {
        let s = arc(Segment::new(Vec2::new(0.0, 0.0), Vec2::new(2.0, 1.0)));
        for p in [2.0, 3.0, 4.0] {
            assert_eq!(s.p_curvature(0.5, ep(p)).unwrap(), 0.0);
        }
        let flat = arc(Segment::new(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0)));
        assert_eq!(flat.p_curvature(0.5, ep(4.0)).unwrap(), 0.0);
        let c = unit_circle();
        for k in 0..10 {
            assert_abs_diff_eq!(c.p_curvature(0.3 * k as f64, ep(2.0)).unwrap(), 1.0, epsilon = 1e-14);
        }
        assert!(matches!(c.p_curvature(0.0, ep(4.0)), Err(Error::UndefinedCurvature { .. })));
    }

    /// The p-circle of p-radius 2, parametrized through `p_circle_point`, has
    /// p-curvature 1/2; derivatives are taken numerically here since the
    /// parametrization is only a test fixture.
    #[test]
    fn p_circle_has_inverse_radius_curvature() {
        let e = ep(4.0);
        let theta = FRAC_PI_4;
        let h = 1e-4;
        let f = |t: f64| p_circle_point(Vec2::ZERO, 2.0, t, e);
        let d1 = (f(theta + h) - f(theta - h)) * (0.5 / h);
        let d2 = (f(theta + h) + f(theta - h) - f(theta) * 2.0) * (1.0 / (h * h));
        let k = p_curvature_raw(d1, d1.cross(d2), e);
        assert_abs_diff_eq!(k, 0.5, epsilon = 1e-6);
        // the superellipse with m = p is the same p-circle with exact derivatives
        let se = arc(Superellipse::new(Vec2::ZERO, 4.0, 2.0, 2.0).unwrap());
        for t in [0.2, 0.7, 1.1, 2.0, 4.0] {
            assert_abs_diff_eq!(se.p_curvature(t, e).unwrap(), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn euclidean_curvature_matches_classical() {
        let se = arc(Superellipse::new(Vec2::ZERO, 3.0, 1.0, 0.6).unwrap());
        for k in 1..50 {
            let t = 0.1234 * k as f64;
            assert_abs_diff_eq!(se.p_curvature(t, ep(2.0)).unwrap(), se.curvature(t), epsilon = 1e-12);
        }
    }

    #[test]
    fn sign_of_p_curvature_follows_classical() {
        // a wavy closed curve through the spline, sampled off the axis points
        let pts: Vec<Vec2> = (0..16)
            .map(|k| {
                let a = TAU * k as f64 / 16.0;
                let r = 1.0 + 0.25 * (3.0 * a).cos();
                Vec2::new(r * a.cos(), r * a.sin())
            })
            .collect();
        let sp = arc(crate::boundary::curve::PeriodicSpline::new(&pts).unwrap());
        for k in 0..400 {
            let t = 16.0 * (k as f64 + 0.37) / 400.0;
            let kc = sp.curvature(t);
            if let Ok(kp) = sp.p_curvature(t, ep(3.0)) {
                if kc.abs() > 1e-8 {
                    assert_eq!(kp.signum(), kc.signum());
                }
            }
        }
    }

    #[test]
    fn tau_examples() {
        let c = unit_circle();
        assert_eq!(c.tau_p(0.4, ep(2.0)), 1.0);
        assert_eq!(c.tau_p(0.0, ep(4.0)), 0.0);
        let t = FRAC_PI_4;
        let s1 = cubic_reparam_inverse(TAU);
        let r = arc(Reparametrized { inner: c.curve.clone(), map: cubic_reparam, s_range: (0.0, s1) });
        let s = cubic_reparam_inverse(t);
        let v = c.tau_p(t, ep(4.0));
        assert!(v > 0.0);
        assert_abs_diff_eq!(r.tau_p(s, ep(4.0)), v, epsilon = 1e-12);
    }

    #[test]
    fn map_f_and_p_distance() {
        let c = unit_circle();
        for p in [2.0, 3.0, 4.0] {
            let q = c.map_f(0.0, 0.3, ep(p));
            assert_abs_diff_eq!(q.x, 0.7, epsilon = 1e-15);
            assert_abs_diff_eq!(q.y, 0.0, epsilon = 1e-15);
            assert_eq!(c.map_f(1.1, 0.0, ep(p)), c.point(1.1));
        }
        let e = ep(3.0);
        let y = c.point(FRAC_PI_4);
        let f = c.map_f(FRAC_PI_4, 0.2, e);
        assert_abs_diff_eq!(gamma_p(f - y, e), 0.2, epsilon = 1e-14);
    }

    #[test]
    fn gradient_has_unit_dual_norm() {
        let c = unit_circle();
        for p in [2.0, 3.0, 4.0] {
            let e = ep(p);
            for k in 0..37 {
                let g = c.distance_gradient(0.17 * k as f64, e);
                assert_abs_diff_eq!(gamma_q(g, e), 1.0, epsilon = 1e-14);
            }
        }
    }
}
