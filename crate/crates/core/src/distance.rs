//! p-distance to the boundary: closest points, closed-form derivatives, and
//! the p-ridge.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryArc, CornerKind, CornerRecord, Domain};
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::pnorm::{abs_pow, gamma_p, gamma_p_gradient, ExponentPair};
use crate::vec2::Vec2;

pub const SEEDS_PER_ARC: usize = 256;
pub const MAX_NEWTON: usize = 30;
/// Feet closer than this are the same foot.
pub const CLUSTER_RADIUS: f64 = 1e-6;
/// Relative slack for a foot to count as co-minimal.
pub const CO_MINIMAL_REL_TOL: f64 = 1e-8;
/// Angular margin for the strict inside of a reentrant corner's fan.
pub const FAN_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Foot {
    pub arc: usize,
    pub t: f64,
    pub point: Vec2,
    /// Set when the foot is a corner vertex.
    pub corner: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosestPointResult {
    pub feet: Vec<Foot>,
    pub distance: f64,
    pub multiplicity: usize,
}

impl ClosestPointResult {
    pub fn foot(&self) -> &Foot {
        &self.feet[0]
    }
}

/// `sum |w_i|^p` and its first two derivatives in `t`, with `w = x - y(t)`.
fn objective(arc: &BoundaryArc, x: Vec2, t: f64, p: f64) -> (f64, f64, f64) {
    let w = x - arc.point(t);
    let d1 = arc.d1(t);
    let d2 = arc.d2(t);
    let (ax, ay) = (abs_pow(w.x, p - 2.0), abs_pow(w.y, p - 2.0));
    let phi = ax * w.x * w.x + ay * w.y * w.y;
    let (gx, gy) = (w.x * ax, w.y * ay);
    let dphi = -p * (gx * d1.x + gy * d1.y);
    let ddphi = p * (p - 1.0) * (ax * d1.x * d1.x + ay * d1.y * d1.y) - p * (gx * d2.x + gy * d2.y);
    (phi, dphi, ddphi)
}

fn phi_only(arc: &BoundaryArc, x: Vec2, t: f64, p: f64) -> f64 {
    let w = x - arc.point(t);
    abs_pow(w.x, p) + abs_pow(w.y, p)
}

/// Minimize `phi` on `[a, b]` which brackets a discrete local minimum.
fn refine(arc: &BoundaryArc, x: Vec2, mut a: f64, mut b: f64, p: f64) -> f64 {
    let da = objective(arc, x, a, p).1;
    let db = objective(arc, x, b, p).1;
    if da < 0.0 && db > 0.0 {
        // safeguarded Newton on phi'
        let mut t = 0.5 * (a + b);
        for newton_steps in 0..200 {
            let (_, g, hss) = objective(arc, x, t, p);
            if g == 0.0 {
                return t;
            }
            if g < 0.0 {
                a = t;
            } else {
                b = t;
            }
            let mut next = if newton_steps < MAX_NEWTON && hss > 0.0 { t - g / hss } else { f64::NAN };
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - t).abs() <= 4.0 * f64::EPSILON * (1.0 + t.abs()) || b - a <= 4.0 * f64::EPSILON * (1.0 + t.abs()) {
                return next;
            }
            t = next;
        }
        return t;
    }
    // golden section on phi
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = phi_only(arc, x, c, p);
    let mut fd = phi_only(arc, x, d, p);
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = phi_only(arc, x, c, p);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = phi_only(arc, x, d, p);
        }
        if b - a <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

struct Candidate {
    dist: f64,
    foot: Foot,
}

fn arc_candidates(domain: &Domain, arc: &BoundaryArc, x: Vec2, e: ExponentPair, out: &mut Vec<Candidate>) {
    let p = e.p();
    let (t0, t1) = arc.t_range();
    let closed = arc.curve.is_closed();
    let n = SEEDS_PER_ARC;
    let dt = (t1 - t0) / n as f64;
    let ts: Vec<f64> = (0..=n).map(|k| if k == n { t1 } else { t0 + dt * k as f64 }).collect();
    let phis: Vec<f64> = ts.iter().map(|&t| phi_only(arc, x, t, p)).collect();
    let wrap = |t: f64| {
        if !closed {
            t
        } else if t < t0 {
            t + (t1 - t0)
        } else if t >= t1 {
            t - (t1 - t0)
        } else {
            t
        }
    };
    let mut push = |t: f64| {
        let (pt, corner) = if !closed && t == t0 {
            (domain.arc_ends(arc.id).0, domain.corner_before_arc(arc.id).map(|c| c.id))
        } else if !closed && t == t1 {
            (domain.arc_ends(arc.id).1, domain.corner_after_arc(arc.id).map(|c| c.id))
        } else {
            (arc.point(t), None)
        };
        out.push(Candidate { dist: gamma_p(x - pt, e), foot: Foot { arc: arc.id, t, point: pt, corner } });
    };
    if closed {
        // samples 0..n-1 are distinct; n duplicates 0
        for k in 0..n {
            let prev = phis[(k + n - 1) % n];
            let next = phis[(k + 1) % n];
            if phis[k] <= prev && phis[k] <= next {
                let t = refine(arc, x, ts[k] - dt, ts[k] + dt, p);
                push(wrap(t));
            }
        }
    } else {
        push(t0);
        push(t1);
        for k in 0..=n {
            let left = if k == 0 { f64::INFINITY } else { phis[k - 1] };
            let right = if k == n { f64::INFINITY } else { phis[k + 1] };
            if phis[k] <= left && phis[k] <= right {
                let a = if k == 0 { t0 } else { ts[k - 1] };
                let b = if k == n { t1 } else { ts[k + 1] };
                let t = refine(arc, x, a, b, p);
                if t > t0 && t < t1 {
                    push(t);
                }
            }
        }
    }
}

/// All p-closest boundary points of an interior point.
pub fn closest_points(x: Vec2, domain: &Domain, e: ExponentPair, cluster_radius: f64) -> Result<ClosestPointResult> {
    if !domain.contains(x) {
        return Err(Error::OutsideDomain(x));
    }
    Ok(closest_points_unchecked(x, domain, e, cluster_radius))
}

pub(crate) fn closest_points_unchecked(x: Vec2, domain: &Domain, e: ExponentPair, cluster_radius: f64) -> ClosestPointResult {
    let mut cands = Vec::new();
    for arc in domain.arcs() {
        arc_candidates(domain, arc, x, e, &mut cands);
    }
    let dmin = cands.iter().map(|c| c.dist).fold(f64::INFINITY, f64::min);
    let cutoff = dmin * (1.0 + CO_MINIMAL_REL_TOL) + f64::MIN_POSITIVE;
    cands.retain(|c| c.dist <= cutoff);
    cands.sort_by(|a, b| a.dist.total_cmp(&b.dist));
    let mut feet: Vec<Foot> = Vec::new();
    for c in cands {
        if let Some(f) = feet.iter_mut().find(|f| f.point.dist(c.foot.point) <= cluster_radius) {
            if f.corner.is_none() && c.foot.corner.is_some() {
                *f = c.foot;
            }
        } else {
            feet.push(c.foot);
        }
    }
    let multiplicity = feet.len();
    ClosestPointResult { feet, distance: dmin, multiplicity }
}

/// Signed-angle test for `w` strictly inside the fan of inward p-normals at a
/// reentrant corner.
pub fn in_corner_fan(corner: &CornerRecord, domain: &Domain, w: Vec2, e: ExponentPair) -> bool {
    if corner.kind != CornerKind::StrictReentrant {
        return false;
    }
    let (m1, m2) = corner_fan_rays(corner, domain, e);
    let span = m1.cross(m2).atan2(m1.dot(m2));
    let a = m1.cross(w).atan2(m1.dot(w));
    a * span.signum() > FAN_MARGIN && a.abs() < span.abs() - FAN_MARGIN
}

/// Inward p-normals at the end of the incoming arc and the start of the
/// outgoing arc.
pub fn corner_fan_rays(corner: &CornerRecord, domain: &Domain, e: ExponentPair) -> (Vec2, Vec2) {
    let before = domain.arc(corner.arc_before);
    let after = domain.arc(corner.arc_after);
    (before.inward_p_normal(before.t_range().1, e), after.inward_p_normal(after.t_range().0, e))
}

/// How a single foot determines the local form of `d_p`.
enum FootKind<'a> {
    Fan(&'a CornerRecord),
    Arc(usize, f64),
}

fn classify_foot<'a>(x: Vec2, foot: &Foot, domain: &'a Domain, e: ExponentPair) -> FootKind<'a> {
    if let Some(cid) = foot.corner {
        let c = &domain.corners()[cid];
        let w = x - c.vertex;
        if in_corner_fan(c, domain, w, e) {
            return FootKind::Fan(c);
        }
        // on or outside the fan: the nearer edge ray decides
        let (m1, m2) = corner_fan_rays(c, domain, e);
        let a1 = m1.cross(w).atan2(m1.dot(w)).abs();
        let a2 = m2.cross(w).atan2(m2.dot(w)).abs();
        return if a1 <= a2 {
            FootKind::Arc(c.arc_before, domain.arc(c.arc_before).t_range().1)
        } else {
            FootKind::Arc(c.arc_after, domain.arc(c.arc_after).t_range().0)
        };
    }
    FootKind::Arc(foot.arc, foot.t)
}

/// Laplacian of the point distance `gamma_p(w)`.
pub fn point_distance_laplacian(w: Vec2, e: ExponentPair) -> f64 {
    let p = e.p();
    let g = gamma_p(w, e);
    let mut s = 0.0;
    for wi in [w.x, w.y] {
        s += abs_pow(wi, p - 2.0) / g.powf(p - 1.0) - abs_pow(wi, 2.0 * p - 2.0) / g.powf(2.0 * p - 1.0);
    }
    (p - 1.0) * s
}

fn unique_foot(x: Vec2, domain: &Domain, e: ExponentPair) -> Result<ClosestPointResult> {
    let cp = closest_points(x, domain, e, CLUSTER_RADIUS)?;
    if cp.multiplicity > 1 {
        return Err(Error::NotDifferentiable { point: x, multiplicity: cp.multiplicity });
    }
    Ok(cp)
}

/// Closed-form gradient of `d_p`; it has unit q-norm.
pub fn grad_d_p(x: Vec2, domain: &Domain, e: ExponentPair) -> Result<Vec2> {
    let cp = unique_foot(x, domain, e)?;
    Ok(match classify_foot(x, cp.foot(), domain, e) {
        FootKind::Fan(c) => gamma_p_gradient(x - c.vertex, e),
        FootKind::Arc(a, t) => domain.arc(a).distance_gradient(t, e),
    })
}

/// Closed-form Laplacian of `d_p`.
pub fn laplacian_d_p(x: Vec2, domain: &Domain, e: ExponentPair) -> Result<f64> {
    let cp = unique_foot(x, domain, e)?;
    laplacian_from_foot(x, cp.foot(), cp.distance, domain, e)
}

pub(crate) fn laplacian_from_foot(x: Vec2, foot: &Foot, d: f64, domain: &Domain, e: ExponentPair) -> Result<f64> {
    match classify_foot(x, foot, domain, e) {
        FootKind::Fan(c) => Ok(point_distance_laplacian(x - c.vertex, e)),
        FootKind::Arc(a, t) => {
            let arc = domain.arc(a);
            if !e.is_euclidean() && arc.is_axis_tangent(t) {
                return Ok(0.0);
            }
            let k = domain.p_curvature(a, t, e)?;
            let den = 1.0 - k * d;
            if den.abs() <= 1e-12 {
                return Err(Error::SingularLaplacian { point: x, denominator: den });
            }
            Ok(-(e.p() - 1.0) * arc.tau_p(t, e) * k / den)
        }
    }
}

/// p-distance on a grid together with the closest-point data of every
/// interior node.
#[derive(Clone, Debug)]
pub struct DistanceMap {
    pub field: ScalarField,
    pub closest: Vec<Option<ClosestPointResult>>,
    pub exponent: ExponentPair,
}

impl DistanceMap {
    pub fn compute(domain: &Domain, grid: Arc<Grid>, e: ExponentPair) -> Self {
        let closest: Vec<Option<ClosestPointResult>> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                if grid.is_interior(k) {
                    Some(closest_points_unchecked(grid.pos(k), domain, e, CLUSTER_RADIUS))
                } else {
                    None
                }
            })
            .collect();
        let values = closest.iter().map(|c| c.as_ref().map_or(0.0, |c| c.distance)).collect();
        DistanceMap { field: ScalarField { grid, values }, closest, exponent: e }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.field.grid
    }
}

/// `d_p` at every node; zero off the interior.
pub fn d_p_field(domain: &Domain, grid: Arc<Grid>, e: ExponentPair) -> ScalarField {
    DistanceMap::compute(domain, grid, e).field
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RidgeSet {
    /// Nodes with at least two p-closest boundary points.
    pub r_p0: Vec<usize>,
    /// Nodes with one closest point where `1 - kappa_p d_p` vanishes to grid
    /// accuracy.
    pub focal: Vec<usize>,
    pub mask: Vec<bool>,
}

impl RidgeSet {
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, m)| **m).map(|(k, _)| k)
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Focal test at one node: `|1 - kappa d| <= h |kappa|`, i.e. the node is
/// within one grid step of the focal distance along its p-normal.
fn is_focal(x: Vec2, cp: &ClosestPointResult, domain: &Domain, e: ExponentPair, h: f64) -> bool {
    match classify_foot(x, cp.foot(), domain, e) {
        FootKind::Fan(_) => false,
        FootKind::Arc(a, t) => match domain.p_curvature(a, t, e) {
            Ok(k) if k > 0.0 => (1.0 - k * cp.distance).abs() <= h * k,
            _ => false,
        },
    }
}

pub fn detect_ridge(domain: &Domain, map: &DistanceMap) -> RidgeSet {
    let grid = map.grid();
    let e = map.exponent;
    let flags: Vec<(bool, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|k| match &map.closest[k] {
            None => (false, false),
            Some(cp) if cp.multiplicity >= 2 => (true, false),
            Some(cp) => (false, is_focal(grid.pos(k), cp, domain, e, grid.h)),
        })
        .collect();
    let r_p0 = flags.iter().enumerate().filter(|(_, f)| f.0).map(|(k, _)| k).collect();
    let focal = flags.iter().enumerate().filter(|(_, f)| f.1).map(|(k, _)| k).collect();
    let mask = flags.iter().map(|f| f.0 || f.1).collect();
    RidgeSet { r_p0, focal, mask }
}

/// `(f(x - h xi) + f(x + h xi) - 2 f(x)) / h^2` for any sampled field.
pub fn second_difference_probe(f: &dyn Fn(Vec2) -> Option<f64>, x: Vec2, xi: Vec2, h: f64) -> Result<f64> {
    let c = f(x).ok_or(Error::StencilOutsideDomain)?;
    let a = f(x - xi * h).ok_or(Error::StencilOutsideDomain)?;
    let b = f(x + xi * h).ok_or(Error::StencilOutsideDomain)?;
    Ok((a + b - 2.0 * c) / (h * h))
}

/// Exact `d_p` as a sampler for probes; `None` outside the domain.
pub fn exact_distance_sampler<'a>(domain: &'a Domain, e: ExponentPair) -> impl Fn(Vec2) -> Option<f64> + 'a {
    move |x| closest_points(x, domain, e, CLUSTER_RADIUS).ok().map(|c| c.distance)
}
