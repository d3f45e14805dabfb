//! Axis-tangent ("degenerate") boundary points and the curvature extension
//! available there.
//!
//! At a point where the tangent is horizontal, write the boundary locally as a
//! graph with slope `b' = c |c|^(p-2)`. The p-curvature extends continuously to
//! `c'(0)` when `c` is differentiable, which we estimate from one-sided
//! difference quotients with Richardson extrapolation.

use serde::{Deserialize, Serialize};

use crate::boundary::arc::BoundaryArc;
use crate::boundary::domain::{bisect_sign_change, Domain};
use crate::pnorm::{f_p, ExponentPair};
use crate::vec2::Vec2;

const SCAN_SAMPLES: usize = 1024;
const STEPS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];
const REL_AGREEMENT: f64 = 0.1;
const ABS_AGREEMENT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TangentAxis {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionStatus {
    /// The boundary curves strictly toward the domain, which is sufficient for
    /// the p-ridge to stay away from the point's neighbourhood in the
    /// tangential direction.
    A2Sufficient,
    /// Difference quotients converge to a finite `c'(0)`.
    A1HoldsProxy,
    ViolatedUnknown,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DegeneratePointReport {
    pub arc: usize,
    pub t_star: f64,
    pub point: Vec2,
    pub axis: TangentAxis,
    /// Extrapolated `c'(0)`; meaningful only when `consistent`.
    pub c_prime_0: f64,
    pub consistent: bool,
    pub assumption: AssumptionStatus,
}

#[derive(Clone, Copy, Debug)]
pub struct CurvatureExtension {
    pub value: f64,
    pub consistent: bool,
}

/// Which tangent component vanishes at `t`; horizontal if both are tiny.
fn tangent_axis(arc: &BoundaryArc, t: f64) -> TangentAxis {
    let d = arc.d1(t);
    if d.y.abs() <= d.x.abs() {
        TangentAxis::Horizontal
    } else {
        TangentAxis::Vertical
    }
}

/// Estimate `c'(0)` at an axis-tangent point `t_star` of `arc`.
pub fn estimate_curvature_extension(arc: &BoundaryArc, t_star: f64, e: ExponentPair) -> CurvatureExtension {
    let (t0, t1) = arc.t_range();
    let axis = tangent_axis(arc, t_star);
    let base = arc.point(t_star);
    let d_star = arc.d1(t_star);
    // sign of the inward-normal component across the tangent
    let sign = match axis {
        TangentAxis::Horizontal => d_star.x.signum(),
        TangentAxis::Vertical => (-d_star.y).signum(),
    };
    let closed = arc.curve.is_closed();
    let dir = if closed || t_star + STEPS[0] <= t1 { 1.0 } else { -1.0 };
    let quotient = |h: f64| {
        let t = t_star + dir * h;
        let t = if closed && t > t1 { t - (t1 - t0) } else { t };
        let d = arc.d1(t);
        let p = arc.point(t);
        let (slope, offset) = match axis {
            TangentAxis::Horizontal => (d.y / d.x, p.x - base.x),
            TangentAxis::Vertical => (d.x / d.y, p.y - base.y),
        };
        sign * f_p(slope, e) / offset
    };
    let q: Vec<f64> = STEPS.iter().map(|&h| quotient(h)).collect();
    let r1 = 2.0 * q[1] - q[0];
    let r2 = 2.0 * q[2] - q[1];
    let spread = (r1 - r2).abs();
    let consistent = r1.is_finite()
        && r2.is_finite()
        && (spread <= ABS_AGREEMENT || spread <= REL_AGREEMENT * r1.abs().max(r2.abs()));
    CurvatureExtension { value: r2, consistent }
}

/// Find and classify all axis-tangent points of the boundary.
pub fn validate_degenerate_points(domain: &Domain, e: ExponentPair) -> Vec<DegeneratePointReport> {
    let scale = domain.scale();
    let mut out: Vec<DegeneratePointReport> = Vec::new();
    for arc in domain.arcs() {
        let (t0, t1) = arc.t_range();
        let span = t1 - t0;
        let mut roots = Vec::new();
        if arc.curve.is_straight() {
            if arc.is_axis_tangent(arc.t_mid()) {
                roots.push(arc.t_mid());
            }
        } else {
            for comp in [0usize, 1] {
                let f = |t: f64| {
                    let d = arc.d1(t);
                    if comp == 0 {
                        d.x
                    } else {
                        d.y
                    }
                };
                let dt = span / SCAN_SAMPLES as f64;
                let mut prev = f(t0);
                if prev == 0.0 {
                    roots.push(t0);
                }
                for k in 1..=SCAN_SAMPLES {
                    let tk = if k == SCAN_SAMPLES { t1 } else { t0 + dt * k as f64 };
                    let cur = f(tk);
                    if cur == 0.0 {
                        roots.push(tk);
                    } else if prev != 0.0 && prev.signum() != cur.signum() {
                        roots.push(bisect_sign_change(&f, tk - dt, tk));
                    }
                    prev = cur;
                }
            }
            let closed = arc.curve.is_closed();
            // the join of an open arc belongs to a corner or to the neighbour
            roots.retain(|&t| closed || (t - t0 > 1e-9 * span && t1 - t > 1e-9 * span));
        }
        for t in roots {
            let point = arc.point(t);
            if out.iter().any(|r| r.point.dist(point) <= 1e-9 * scale) {
                continue;
            }
            let axis = tangent_axis(arc, t);
            let ext = if arc.curve.is_straight() {
                CurvatureExtension { value: 0.0, consistent: true }
            } else {
                estimate_curvature_extension(arc, t, e)
            };
            let assumption = if arc.curvature(t) > 1e-9 {
                AssumptionStatus::A2Sufficient
            } else if ext.consistent && ext.value.is_finite() {
                AssumptionStatus::A1HoldsProxy
            } else {
                AssumptionStatus::ViolatedUnknown
            };
            out.push(DegeneratePointReport {
                arc: arc.id,
                t_star: t,
                point,
                axis,
                c_prime_0: ext.value,
                consistent: ext.consistent,
                assumption,
            });
        }
    }
    out
}
