//! Exact p-norm primitives in the plane.
//!
//! Everything here is a pure function of its inputs. The exponent pair is the
//! single source of `p` and its dual `q = p / (p - 1)`; `q` is always derived,
//! never stored.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// The constraint exponent `p >= 2` together with its dual exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ExponentPair {
    p: f64,
}

impl ExponentPair {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 2.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Self { p })
    }

    #[inline]
    pub fn p(self) -> f64 {
        self.p
    }

    #[inline]
    pub fn q(self) -> f64 {
        self.p / (self.p - 1.0)
    }

    #[inline]
    pub fn is_euclidean(self) -> bool {
        self.p == 2.0
    }
}

impl TryFrom<f64> for ExponentPair {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<ExponentPair> for f64 {
    fn from(e: ExponentPair) -> f64 {
        e.p
    }
}

/// `|x|^r`, with the common integer exponents kept exact.
#[inline]
pub fn abs_pow(x: f64, r: f64) -> f64 {
    let a = x.abs();
    if r == 2.0 {
        a * a
    } else if r == 1.0 {
        a
    } else if r == 0.0 {
        1.0
    } else if r == 3.0 {
        a * a * a
    } else if r == 4.0 {
        let s = a * a;
        s * s
    } else {
        a.powf(r)
    }
}

/// `sgn(x) |x|^r`.
#[inline]
pub fn signed_pow(x: f64, r: f64) -> f64 {
    abs_pow(x, r).copysign(x)
}

/// The `r`-norm `(|x|^r + |y|^r)^(1/r)` for any `r >= 1`, scaled to avoid
/// overflow and underflow.
pub fn gamma(v: Vec2, r: f64) -> f64 {
    let ax = v.x.abs();
    let ay = v.y.abs();
    let m = ax.max(ay);
    if m == 0.0 {
        return 0.0;
    }
    if r == 2.0 {
        return ax.hypot(ay);
    }
    let s = abs_pow(ax / m, r) + abs_pow(ay / m, r);
    m * s.powf(1.0 / r)
}

#[inline]
pub fn gamma_p(v: Vec2, e: ExponentPair) -> f64 {
    gamma(v, e.p())
}

#[inline]
pub fn gamma_q(v: Vec2, e: ExponentPair) -> f64 {
    gamma(v, e.q())
}

/// Inverse of the map `t -> t |t|^(p-2)`.
///
/// Evaluated in closed form as `sgn(t) |t|^(1/(p-1))`; its derivative is
/// unbounded at zero for `p > 2` so no iteration is used.
#[inline]
pub fn f_p(t: f64, e: ExponentPair) -> f64 {
    if e.is_euclidean() {
        t
    } else {
        signed_pow(t, 1.0 / (e.p() - 1.0))
    }
}

/// Gradient of `gamma_p` at `v != 0`; it is the dual vector attaining equality
/// in the Hölder pairing and has unit q-norm.
pub fn gamma_p_gradient(v: Vec2, e: ExponentPair) -> Vec2 {
    let p = e.p();
    let g = gamma_p(v, e);
    let scale = g.powf(p - 1.0);
    Vec2::new(signed_pow(v.x, p - 1.0) / scale, signed_pow(v.y, p - 1.0) / scale)
}

/// Point at angle `theta` on the p-circle `|x-c|^p + |y-d|^p = radius^p`.
pub fn p_circle_point(center: Vec2, radius: f64, theta: f64, e: ExponentPair) -> Vec2 {
    let (s, c) = theta.sin_cos();
    let r = 2.0 / e.p();
    center + Vec2::new(signed_pow(c, r), signed_pow(s, r)) * radius
}

/// Line `a x + b y + c = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LineCoeffs {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if a == 0.0 && b == 0.0 {
            return Err(Error::DegenerateLine);
        }
        Ok(Self { a, b, c })
    }

    /// Line through `point` with direction `dir`.
    pub fn through(point: Vec2, dir: Vec2) -> Result<Self> {
        let a = -dir.y;
        let b = dir.x;
        Self::new(a, b, -(a * point.x + b * point.y))
    }

    #[inline]
    pub fn eval(&self, pt: Vec2) -> f64 {
        self.a * pt.x + self.b * pt.y + self.c
    }
}

/// p-distance from a point to a line:
/// `|a x0 + b y0 + c| / (|a|^q + |b|^q)^(1/q)`.
pub fn p_dist_point_line(pt: Vec2, line: &LineCoeffs, e: ExponentPair) -> f64 {
    line.eval(pt).abs() / gamma_q(Vec2::new(line.a, line.b), e)
}

/// Foot of the p-normal from `pt` to `line`, i.e. its p-closest point.
pub fn p_foot_on_line(pt: Vec2, line: &LineCoeffs, e: ExponentPair) -> Vec2 {
    let q = e.q();
    let dir = Vec2::new(f_p(line.a, e), f_p(line.b, e));
    let t = -line.eval(pt) / (abs_pow(line.a, q) + abs_pow(line.b, q));
    pt + dir * t
}

const BISECTOR_ANGLE_TOL: f64 = 1e-12;

/// Unit direction of the p-bisector of the angle (< pi) spanned by two rays
/// leaving a common vertex.
///
/// The bisector is located by bracketed bisection on the angular parameter:
/// the difference of the two side distances is negative on the first side and
/// positive on the second.
pub fn p_bisector_direction(side1_dir: Vec2, side2_dir: Vec2, e: ExponentPair) -> Result<Vec2> {
    let n1 = side1_dir.norm();
    let n2 = side2_dir.norm();
    if !(n1 > 0.0 && n2 > 0.0) || !side1_dir.is_finite() || !side2_dir.is_finite() {
        return Err(Error::DegenerateAngle);
    }
    let d1 = side1_dir * (1.0 / n1);
    let d2 = side2_dir * (1.0 / n2);
    let cross = d1.cross(d2);
    if cross.abs() <= 1e-14 {
        return Err(Error::DegenerateAngle);
    }
    let span = cross.atan2(d1.dot(d2));
    let base = d1.angle();
    let line1 = LineCoeffs::through(Vec2::ZERO, d1)?;
    let line2 = LineCoeffs::through(Vec2::ZERO, d2)?;
    let diff = |phi: f64| {
        let u = Vec2::from_angle(base + phi);
        p_dist_point_line(u, &line1, e) - p_dist_point_line(u, &line2, e)
    };

    // diff(0) < 0 and diff(span) > 0 regardless of the sign of span.
    let (mut lo, mut hi) = (0.0_f64, span);
    let mut mid = 0.5 * (lo + hi);
    while (hi - lo).abs() > BISECTOR_ANGLE_TOL {
        mid = 0.5 * (lo + hi);
        let g = diff(mid);
        if g == 0.0 {
            break;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
    }
    Ok(Vec2::from_angle(base + mid))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn ep(p: f64) -> ExponentPair {
        ExponentPair::new(p).unwrap()
    }

    #[test]
    fn exponent_pair_rejects_small_p() {
        assert!(ExponentPair::new(1.5).is_err());
        assert!(ExponentPair::new(f64::NAN).is_err());
        assert!(ExponentPair::new(f64::INFINITY).is_err());
        let e = ep(3.0);
        assert_abs_diff_eq!(1.0 / e.p() + 1.0 / e.q(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_p(Vec2::new(3.0, 4.0), ep(2.0)), 5.0);
        assert_abs_diff_eq!(gamma_p(Vec2::new(1.0, 1.0), ep(4.0)), 2f64.powf(0.25), epsilon = 1e-15);
        for p in [2.0, 2.5, 3.0, 7.0] {
            assert_abs_diff_eq!(gamma_p(Vec2::new(-1.7, 0.0), ep(p)), 1.7, epsilon = 1e-15);
            assert_abs_diff_eq!(gamma_q(Vec2::new(1.0, 0.0), ep(p)), 1.0, epsilon = 1e-15);
        }
        assert_eq!(gamma_q(Vec2::new(3.0, 4.0), ep(2.0)), 5.0);
        assert_abs_diff_eq!(gamma_q(Vec2::new(1.0, 1.0), ep(2.0)), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(gamma_p(Vec2::ZERO, ep(3.0)), 0.0);
    }

    #[test]
    fn f_p_examples() {
        assert_eq!(f_p(-3.0, ep(2.0)), -3.0);
        assert_abs_diff_eq!(f_p(4.0, ep(3.0)), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f_p(-8.0, ep(4.0)), -2.0, epsilon = 1e-14);
        assert_eq!(f_p(0.0, ep(4.0)), 0.0);
    }

    #[test]
    fn p_circle_examples() {
        let e = ep(4.0);
        let a = p_circle_point(Vec2::ZERO, 1.0, 0.0, e);
        assert_abs_diff_eq!(a.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.y, 0.0, epsilon = 1e-15);
        let b = p_circle_point(Vec2::ZERO, 1.0, FRAC_PI_2, e);
        assert_abs_diff_eq!(b.x, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(b.y, 1.0, epsilon = 1e-15);
        let e3 = ep(3.0);
        let c = p_circle_point(Vec2::ZERO, 2.0, FRAC_PI_4, e3);
        assert_abs_diff_eq!(gamma_p(c, e3), 2.0, epsilon = 1e-14);
    }

    /// Golden-section minimization of gamma_p(pt - z(s)) along the line.
    fn brute_line_distance(pt: Vec2, line: &LineCoeffs, e: ExponentPair) -> f64 {
        let n = Vec2::new(line.a, line.b);
        let z0 = n * (-line.c / n.dot(n));
        let dir = n.perp().normalized();
        let f = |s: f64| gamma_p(pt - (z0 + dir * s), e);
        // coarse scan then golden refinement
        let span = 4.0 * (pt - z0).norm() + 1.0;
        let mut best = (f64::INFINITY, 0.0);
        let steps = 2000;
        for k in 0..=steps {
            let s = -span + 2.0 * span * k as f64 / steps as f64;
            let v = f(s);
            if v < best.0 {
                best = (v, s);
            }
        }
        let ds = 2.0 * span / steps as f64;
        let (mut a, mut b) = (best.1 - ds, best.1 + ds);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        f(0.5 * (a + b))
    }

    #[test]
    fn point_line_examples() {
        let x0 = LineCoeffs::new(1.0, 0.0, 0.0).unwrap();
        for p in [2.0, 3.0, 5.5] {
            assert_abs_diff_eq!(p_dist_point_line(Vec2::new(2.0, 5.0), &x0, ep(p)), 2.0, epsilon = 1e-15);
        }
        let diag = LineCoeffs::new(1.0, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(p_dist_point_line(Vec2::new(1.0, 1.0), &diag, ep(2.0)), 2f64.sqrt(), epsilon = 1e-15);
        let d3 = p_dist_point_line(Vec2::new(1.0, 1.0), &diag, ep(3.0));
        assert_abs_diff_eq!(d3, 2f64.powf(1.0 / 3.0), epsilon = 1e-14);
        assert_abs_diff_eq!(d3, brute_line_distance(Vec2::new(1.0, 1.0), &diag, ep(3.0)), epsilon = 1e-9);
    }

    #[test]
    fn foot_lies_on_line_at_p_distance() {
        let e = ep(3.5);
        let line = LineCoeffs::new(0.3, -1.2, 0.7).unwrap();
        let pt = Vec2::new(1.1, 2.3);
        let foot = p_foot_on_line(pt, &line, e);
        assert_abs_diff_eq!(line.eval(foot), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gamma_p(pt - foot, e), p_dist_point_line(pt, &line, e), epsilon = 1e-14);
    }

    #[test]
    fn degenerate_line_rejected() {
        assert!(matches!(LineCoeffs::new(0.0, 0.0, 1.0), Err(Error::DegenerateLine)));
    }

    /// Dense angular sweep for the angle where the two side distances agree.
    fn sweep_bisector_angle(d1: Vec2, d2: Vec2, e: ExponentPair) -> f64 {
        let l1 = LineCoeffs::through(Vec2::ZERO, d1).unwrap();
        let l2 = LineCoeffs::through(Vec2::ZERO, d2).unwrap();
        let a1 = d1.angle();
        let span = d1.cross(d2).atan2(d1.dot(d2));
        let n = 200_000;
        let mut best = (f64::INFINITY, 0.0);
        for k in 1..n {
            let phi = a1 + span * k as f64 / n as f64;
            let u = Vec2::from_angle(phi);
            let g = (p_dist_point_line(u, &l1, e) - p_dist_point_line(u, &l2, e)).abs();
            if g < best.0 {
                best = (g, phi);
            }
        }
        best.1
    }

    #[test]
    fn bisector_examples() {
        let x = Vec2::new(1.0, 0.0);
        let y = Vec2::new(0.0, 1.0);
        for p in [2.0, 3.0, 4.0] {
            let d = p_bisector_direction(x, y, ep(p)).unwrap();
            assert_abs_diff_eq!(d.angle(), FRAC_PI_4, epsilon = 1e-12);
        }
        let diag = Vec2::new(1.0, 1.0);
        let d2 = p_bisector_direction(x, diag, ep(2.0)).unwrap();
        assert_abs_diff_eq!(d2.angle(), FRAC_PI_8, epsilon = 1e-12);

        let e3 = ep(3.0);
        let d3 = p_bisector_direction(x, diag, e3).unwrap();
        let oracle = sweep_bisector_angle(x, diag, e3);
        assert_abs_diff_eq!(d3.angle(), oracle, epsilon = 2e-5);
        let l1 = LineCoeffs::through(Vec2::ZERO, x).unwrap();
        let l2 = LineCoeffs::through(Vec2::ZERO, diag).unwrap();
        assert_abs_diff_eq!(p_dist_point_line(d3, &l1, e3), p_dist_point_line(d3, &l2, e3), epsilon = 1e-10);
    }

    #[test]
    fn bisector_rejects_parallel_sides() {
        let r = p_bisector_direction(Vec2::new(1.0, 0.0), Vec2::new(-2.0, 0.0), ep(3.0));
        assert!(matches!(r, Err(Error::DegenerateAngle)));
    }

    #[test]
    fn bisector_with_clockwise_sides() {
        let e = ep(3.0);
        let d = p_bisector_direction(Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0), e).unwrap();
        assert_abs_diff_eq!(d.angle(), FRAC_PI_4, epsilon = 1e-12);
        let d = p_bisector_direction(Vec2::from_angle(PI - 0.2), Vec2::from_angle(-PI + 0.3), e).unwrap();
        assert!(d.x < 0.0);
    }

    proptest! {
        #[test]
        fn holder_pairing(x in -5.0..5.0f64, y in -5.0..5.0f64, wx in -5.0..5.0f64, wy in -5.0..5.0f64, p in 2.0..8.0f64) {
            let e = ep(p);
            let v = Vec2::new(x, y);
            prop_assume!(v.norm() > 1e-6);
            let w = Vec2::new(wx, wy);
            prop_assert!(gamma_p(v, e) * gamma_q(w, e) >= v.dot(w) - 1e-12);
            let dual = gamma_p_gradient(v, e);
            prop_assert!((gamma_q(dual, e) - 1.0).abs() < 1e-12);
            prop_assert!((dual.dot(v) - gamma_p(v, e)).abs() < 1e-11 * (1.0 + gamma_p(v, e)));
        }

        #[test]
        fn f_p_round_trip(t in -1e3..1e3f64, p in 2.0..9.0f64) {
            let e = ep(p);
            let fwd = t * t.abs().powf(p - 2.0);
            prop_assert!((f_p(fwd, e) - t).abs() <= 1e-12 * (1.0 + t.abs()));
            let s = f_p(t, e);
            prop_assert!((s * s.abs().powf(p - 2.0) - t).abs() <= 1e-12 * (1.0 + t.abs()));
        }

        #[test]
        fn homogeneity(x in -5.0..5.0f64, y in -5.0..5.0f64, s in -3.0..3.0f64, p in 2.0..8.0f64) {
            let e = ep(p);
            let v = Vec2::new(x, y);
            prop_assert!((gamma_p(v * s, e) - s.abs() * gamma_p(v, e)).abs() < 1e-12 * (1.0 + gamma_p(v, e)));
        }

        #[test]
        fn closed_form_matches_brute_force(
            x in -3.0..3.0f64, y in -3.0..3.0f64,
            a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, p in 2.0..6.0f64,
        ) {
            prop_assume!(a.abs() + b.abs() > 0.1);
            let e = ep(p);
            let line = LineCoeffs::new(a, b, c).unwrap();
            let pt = Vec2::new(x, y);
            let cf = p_dist_point_line(pt, &line, e);
            prop_assert!((cf - brute_line_distance(pt, &line, e)).abs() < 1e-9);
        }

        #[test]
        fn p_distance_is_multiple_of_euclidean(s1 in 0.1..3.0f64, s2 in 0.1..3.0f64, t1 in -3.0..3.0f64, t2 in -3.0..3.0f64, p in 2.0..6.0f64) {
            let e = ep(p);
            let e2 = ep(2.0);
            let line = LineCoeffs::new(0.4, 1.3, -0.2).unwrap();
            let n = Vec2::new(line.a, line.b).normalized();
            let z0 = Vec2::new(0.0, 0.2 / 1.3);
            let along = n.perp();
            let x1 = z0 + along * t1 + n * s1;
            let x2 = z0 + along * t2 + n * s2;
            let r1 = p_dist_point_line(x1, &line, e) / p_dist_point_line(x1, &line, e2);
            let r2 = p_dist_point_line(x2, &line, e) / p_dist_point_line(x2, &line, e2);
            prop_assert!((r1 - r2).abs() < 1e-12);
        }

        #[test]
        fn bisector_equalizes_distances(a1 in -3.1..3.1f64, span in 0.05..3.0f64, p in 2.0..6.0f64) {
            let e = ep(p);
            let d1 = Vec2::from_angle(a1);
            let d2 = Vec2::from_angle(a1 + span);
            let b = p_bisector_direction(d1, d2, e).unwrap();
            let l1 = LineCoeffs::through(Vec2::ZERO, d1).unwrap();
            let l2 = LineCoeffs::through(Vec2::ZERO, d2).unwrap();
            prop_assert!((p_dist_point_line(b, &l1, e) - p_dist_point_line(b, &l2, e)).abs() <= 1e-10);
            // inside the angle
            prop_assert!(d1.cross(b) > 0.0 && b.cross(d2) > 0.0);
        }
    }
}
