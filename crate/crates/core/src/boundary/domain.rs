use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::boundary::arc::BoundaryArc;
use crate::boundary::curve::ParamCurve;
use crate::boundary::degenerate::estimate_curvature_extension;
use crate::error::{Error, Result};
use crate::pnorm::{gamma_q, ExponentPair};
use crate::vec2::Vec2;

/// Angle tolerance for the smooth-join (`alpha = pi`) case.
pub const CORNER_ANGLE_TOL: f64 = 1e-9;

const MONOTONE_SAMPLES: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerKind {
    Nonreentrant,
    /// Interior angle exactly `pi` (a smooth join).
    Reentrant,
    StrictReentrant,
}

impl CornerKind {
    pub fn from_angle(alpha: f64) -> Self {
        if alpha < PI - CORNER_ANGLE_TOL {
            CornerKind::Nonreentrant
        } else if alpha <= PI + CORNER_ANGLE_TOL {
            CornerKind::Reentrant
        } else {
            CornerKind::StrictReentrant
        }
    }

    pub fn is_reentrant(self) -> bool {
        !matches!(self, CornerKind::Nonreentrant)
    }
}

/// Junction between consecutive arcs of one boundary loop.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CornerRecord {
    pub id: usize,
    pub arc_before: usize,
    pub arc_after: usize,
    pub vertex: Vec2,
    /// Interior angle in `(0, 2 pi)`.
    pub angle: f64,
    pub kind: CornerKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Inside,
    OnBoundary,
    Outside,
}

/// Sub-interval of an arc on which one coordinate is monotone.
#[derive(Clone, Debug)]
struct MonotonePiece {
    arc: usize,
    ta: f64,
    tb: f64,
    /// Coordinate values at `ta` and `tb` (snapped to shared vertices).
    va: f64,
    vb: f64,
    /// Range of the other coordinate over the piece.
    other_lo: f64,
    other_hi: f64,
    constant: bool,
}

impl MonotonePiece {
    fn lo(&self) -> f64 {
        self.va.min(self.vb)
    }
    fn hi(&self) -> f64 {
        self.va.max(self.vb)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Y,
}

#[inline]
fn coord(v: Vec2, axis: Axis) -> f64 {
    match axis {
        Axis::X => v.x,
        Axis::Y => v.y,
    }
}

/// A bounded open set whose boundary is a union of closed loops of
/// parametric arcs, each loop oriented with the domain on its left.
#[derive(Clone, Debug)]
pub struct Domain {
    arcs: Vec<BoundaryArc>,
    corners: Vec<CornerRecord>,
    bbox_min: Vec2,
    bbox_max: Vec2,
    /// Snapped endpoints of each arc.
    ends: Vec<(Vec2, Vec2)>,
    y_pieces: Vec<MonotonePiece>,
    x_pieces: Vec<MonotonePiece>,
}

impl Domain {
    /// Build a domain from boundary loops. Consecutive arcs in a loop must
    /// share endpoints; the last arc closes onto the first.
    pub fn new(loops: Vec<Vec<Arc<dyn ParamCurve>>>) -> Result<Self> {
        if loops.is_empty() || loops.iter().any(|l| l.is_empty()) {
            return Err(Error::InvalidGeometry("domain needs at least one non-empty loop".into()));
        }
        let mut arcs = Vec::new();
        let mut loop_ranges = Vec::new();
        for (li, lp) in loops.into_iter().enumerate() {
            let start = arcs.len();
            for curve in lp {
                let (t0, t1) = curve.t_range();
                if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
                    return Err(Error::InvalidGeometry(format!("arc has invalid parameter range [{t0}, {t1}]")));
                }
                arcs.push(BoundaryArc { id: arcs.len(), loop_id: li, curve });
            }
            loop_ranges.push(start..arcs.len());
        }

        // bounding box and nondegeneracy from dense samples
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for a in &arcs {
            let (t0, t1) = a.t_range();
            for k in 0..=MONOTONE_SAMPLES {
                let t = t0 + (t1 - t0) * k as f64 / MONOTONE_SAMPLES as f64;
                let p = a.point(t);
                let d = a.d1(t);
                if !p.is_finite() || !d.is_finite() || d.norm() == 0.0 {
                    return Err(Error::InvalidGeometry(format!("arc {} is degenerate near t = {t}", a.id)));
                }
                lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        let scale = (hi - lo).norm();
        if !(scale > 0.0) {
            return Err(Error::InvalidGeometry("domain has zero extent".into()));
        }

        // endpoints, connectivity and corners
        let mut ends: Vec<(Vec2, Vec2)> = arcs
            .iter()
            .map(|a| {
                let (t0, t1) = a.t_range();
                (a.point(t0), a.point(t1))
            })
            .collect();
        let mut corners = Vec::new();
        for range in &loop_ranges {
            let n = range.len();
            if n == 1 {
                let a = &arcs[range.start];
                if !a.curve.is_closed() {
                    return Err(Error::InvalidGeometry(format!("single arc {} does not close", a.id)));
                }
                ends[a.id].1 = ends[a.id].0;
                continue;
            }
            for k in 0..n {
                let i = range.start + k;
                let j = range.start + (k + 1) % n;
                let gap = ends[i].1.dist(ends[j].0);
                if gap > 1e-9 * scale {
                    return Err(Error::InvalidGeometry(format!(
                        "arcs {i} and {j} do not join (gap {gap:e})"
                    )));
                }
                // prefer the exactly represented endpoint of a straight piece
                let vertex = if arcs[i].curve.is_straight() && !arcs[j].curve.is_straight() {
                    ends[i].1
                } else {
                    ends[j].0
                };
                ends[i].1 = vertex;
                ends[j].0 = vertex;
                let t_in = arcs[i].d1(arcs[i].t_range().1);
                let t_out = arcs[j].d1(arcs[j].t_range().0);
                let turn = t_in.cross(t_out).atan2(t_in.dot(t_out));
                let angle = PI - turn;
                corners.push(CornerRecord {
                    id: corners.len(),
                    arc_before: i,
                    arc_after: j,
                    vertex,
                    angle,
                    kind: CornerKind::from_angle(angle),
                });
            }
        }

        let mut dom = Domain {
            y_pieces: Vec::new(),
            x_pieces: Vec::new(),
            arcs,
            corners,
            bbox_min: lo,
            bbox_max: hi,
            ends,
        };
        dom.y_pieces = dom.build_pieces(Axis::Y);
        dom.x_pieces = dom.build_pieces(Axis::X);
        dom.validate_orientation()?;
        Ok(dom)
    }

    pub fn arcs(&self) -> &[BoundaryArc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> &BoundaryArc {
        &self.arcs[id]
    }

    pub fn corners(&self) -> &[CornerRecord] {
        &self.corners
    }

    pub fn bbox(&self) -> (Vec2, Vec2) {
        (self.bbox_min, self.bbox_max)
    }

    /// Diagonal of the bounding box.
    pub fn scale(&self) -> f64 {
        (self.bbox_max - self.bbox_min).norm()
    }

    pub fn is_approximate(&self) -> bool {
        self.arcs.iter().any(|a| a.curve.is_approximate())
    }

    /// Snapped start and end points of an arc.
    pub fn arc_ends(&self, arc: usize) -> (Vec2, Vec2) {
        self.ends[arc]
    }

    /// Corner at the end of `arc`, if any.
    pub fn corner_after_arc(&self, arc: usize) -> Option<&CornerRecord> {
        self.corners.iter().find(|c| c.arc_before == arc)
    }

    /// Corner at the start of `arc`, if any.
    pub fn corner_before_arc(&self, arc: usize) -> Option<&CornerRecord> {
        self.corners.iter().find(|c| c.arc_after == arc)
    }

    pub fn classify_corners(&self) -> Vec<(CornerRecord, CornerKind)> {
        self.corners.iter().map(|c| (*c, c.kind)).collect()
    }

    fn build_pieces(&self, axis: Axis) -> Vec<MonotonePiece> {
        let mut out = Vec::new();
        for a in &self.arcs {
            let (t0, t1) = a.t_range();
            let comp = |t: f64| coord(a.d1(t), axis);
            let mut cuts = vec![t0];
            let straight_constant = a.curve.is_straight() && {
                let d = a.d1(t0);
                coord(d, axis).abs() <= 1e-14 * d.norm()
            };
            if !straight_constant {
                let dt = (t1 - t0) / MONOTONE_SAMPLES as f64;
                let mut prev = comp(t0);
                for k in 1..=MONOTONE_SAMPLES {
                    let tk = if k == MONOTONE_SAMPLES { t1 } else { t0 + dt * k as f64 };
                    let cur = comp(tk);
                    if cur == 0.0 && k < MONOTONE_SAMPLES {
                        cuts.push(tk);
                    } else if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
                        cuts.push(bisect_sign_change(&comp, tk - dt, tk));
                    }
                    prev = cur;
                }
            }
            cuts.push(t1);
            cuts.dedup();
            for w in cuts.windows(2) {
                let (ta, tb) = (w[0], w[1]);
                let pa = if ta == t0 { self.ends[a.id].0 } else { a.point(ta) };
                let pb = if tb == t1 { self.ends[a.id].1 } else { a.point(tb) };
                let other = match axis {
                    Axis::X => Axis::Y,
                    Axis::Y => Axis::X,
                };
                // range of the other coordinate from a few samples, padded
                let mut olo = coord(pa, other).min(coord(pb, other));
                let mut ohi = coord(pa, other).max(coord(pb, other));
                for k in 1..16 {
                    let v = coord(a.point(ta + (tb - ta) * k as f64 / 16.0), other);
                    olo = olo.min(v);
                    ohi = ohi.max(v);
                }
                // the other coordinate is at most piecewise monotone between
                // samples; pad by the sample spacing times the speed
                let pad = (0..=16)
                    .map(|k| a.d1(ta + (tb - ta) * k as f64 / 16.0).norm())
                    .fold(0.0_f64, f64::max)
                    * (tb - ta)
                    / 16.0;
                out.push(MonotonePiece {
                    arc: a.id,
                    ta,
                    tb,
                    va: coord(pa, axis),
                    vb: coord(pb, axis),
                    other_lo: olo - pad,
                    other_hi: ohi + pad,
                    constant: straight_constant,
                });
            }
        }
        out
    }

    /// Parameter on a monotone piece at which the `axis` coordinate equals `v`.
    fn solve_on_piece(&self, piece: &MonotonePiece, axis: Axis, v: f64) -> f64 {
        let a = &self.arcs[piece.arc];
        let f = |t: f64| {
            if t == piece.ta {
                piece.va - v
            } else if t == piece.tb {
                piece.vb - v
            } else {
                coord(a.point(t), axis) - v
            }
        };
        let (mut lo, mut hi) = (piece.ta, piece.tb);
        let increasing = piece.vb > piece.va;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid);
            if fm == 0.0 {
                return mid;
            }
            if (fm < 0.0) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if f(lo).abs() <= f(hi).abs() {
            lo
        } else {
            hi
        }
    }

    fn piece_point(&self, piece: &MonotonePiece, t: f64) -> Vec2 {
        let (t0, t1) = self.arcs[piece.arc].t_range();
        if t == t0 {
            self.ends[piece.arc].0
        } else if t == t1 {
            self.ends[piece.arc].1
        } else {
            self.arcs[piece.arc].point(t)
        }
    }

    /// Classify a point by ray casting in the `+x` direction against the
    /// y-monotone pieces of the boundary.
    pub fn locate(&self, pt: Vec2) -> Location {
        let tol = 1e-12 * self.scale();
        let mut crossings = 0usize;
        for piece in &self.y_pieces {
            let (lo, hi) = (piece.lo(), piece.hi());
            if pt.y < lo - tol || pt.y > hi + tol || piece.other_hi < pt.x - tol {
                continue;
            }
            if piece.constant {
                if (pt.y - lo).abs() <= tol && pt.x >= piece.other_lo - tol && pt.x <= piece.other_hi + tol {
                    let a = self.piece_point(piece, piece.ta);
                    let b = self.piece_point(piece, piece.tb);
                    if pt.x >= a.x.min(b.x) - tol && pt.x <= a.x.max(b.x) + tol {
                        return Location::OnBoundary;
                    }
                }
                continue;
            }
            // extremal points of y are ill-conditioned for the solve below
            let pa = self.piece_point(piece, piece.ta);
            let pb = self.piece_point(piece, piece.tb);
            if pt.dist(pa) <= tol || pt.dist(pb) <= tol {
                return Location::OnBoundary;
            }
            let v = pt.y.clamp(lo, hi);
            let t = self.solve_on_piece(piece, Axis::Y, v);
            let q = self.piece_point(piece, t);
            if (q.x - pt.x).abs() <= tol && (q.y - pt.y).abs() <= tol {
                return Location::OnBoundary;
            }
            if lo <= pt.y && pt.y < hi && q.x > pt.x {
                crossings += 1;
            }
        }
        if crossings % 2 == 1 {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    /// Strictly inside (not on the boundary).
    pub fn contains(&self, pt: Vec2) -> bool {
        self.locate(pt) == Location::Inside
    }

    /// Abscissae where the boundary meets the horizontal line `y = y0`
    /// between `x_a` and `x_b` (inclusive).
    pub fn hline_crossings(&self, y0: f64, x_a: f64, x_b: f64) -> Vec<f64> {
        self.line_crossings(Axis::Y, y0, x_a.min(x_b), x_a.max(x_b))
    }

    /// Ordinates where the boundary meets `x = x0` between `y_a` and `y_b`.
    pub fn vline_crossings(&self, x0: f64, y_a: f64, y_b: f64) -> Vec<f64> {
        self.line_crossings(Axis::X, x0, y_a.min(y_b), y_a.max(y_b))
    }

    fn line_crossings(&self, axis: Axis, v: f64, lo_o: f64, hi_o: f64) -> Vec<f64> {
        let other = if axis == Axis::Y { Axis::X } else { Axis::Y };
        let pieces = if axis == Axis::Y { &self.y_pieces } else { &self.x_pieces };
        let tol = 1e-12 * self.scale();
        let mut out = Vec::new();
        for piece in pieces {
            if v < piece.lo() - tol || v > piece.hi() + tol || piece.other_hi < lo_o || piece.other_lo > hi_o {
                continue;
            }
            if piece.constant {
                for t in [piece.ta, piece.tb] {
                    let w = coord(self.piece_point(piece, t), other);
                    if w >= lo_o && w <= hi_o {
                        out.push(w);
                    }
                }
                continue;
            }
            let t = self.solve_on_piece(piece, axis, v.clamp(piece.lo(), piece.hi()));
            let q = self.piece_point(piece, t);
            if (coord(q, axis) - v).abs() > tol {
                continue;
            }
            let w = coord(q, other);
            if w >= lo_o - tol && w <= hi_o + tol {
                out.push(w.clamp(lo_o, hi_o));
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= tol);
        out
    }

    fn validate_orientation(&self) -> Result<()> {
        let eps = 1e-6 * self.scale();
        for a in &self.arcs {
            let (t0, t1) = a.t_range();
            for frac in [0.31, 0.5, 0.77] {
                let t = t0 + (t1 - t0) * frac;
                let n = a.inward_normal(t).normalized();
                let p = a.point(t);
                if self.locate(p + n * eps) != Location::Inside || self.locate(p - n * eps) != Location::Outside {
                    return Err(Error::InvalidGeometry(format!(
                        "arc {} is not oriented with the domain on its left (or the boundary self-intersects)",
                        a.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// p-curvature, using the continuous extension `c'(0)` at axis-tangent
    /// points when it can be estimated consistently.
    pub fn p_curvature(&self, arc: usize, t: f64, e: ExponentPair) -> Result<f64> {
        let a = &self.arcs[arc];
        match a.p_curvature(t, e) {
            Err(Error::UndefinedCurvature { .. }) => {
                let est = estimate_curvature_extension(a, t, e);
                if est.consistent && est.value.is_finite() {
                    Ok(est.value)
                } else {
                    Err(Error::UndefinedCurvature { arc, t })
                }
            }
            other => other,
        }
    }

    /// Jacobian determinant of `(t, d) -> y(t) + d mu(t)`.
    pub fn det_df(&self, arc: usize, t: f64, d: f64, e: ExponentPair) -> Result<f64> {
        let a = &self.arcs[arc];
        let k = self.p_curvature(arc, t, e)?;
        Ok(gamma_q(a.d1(t), e) * (1.0 - k * d))
    }
}

pub(crate) fn bisect_sign_change(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, TAU};

    use super::*;
    use crate::boundary::curve::{CircleArc, Segment};
    use crate::boundary::shapes;

    #[test]
    fn corner_kind_thresholds() {
        assert_eq!(CornerKind::from_angle(FRAC_PI_2), CornerKind::Nonreentrant);
        assert_eq!(CornerKind::from_angle(PI), CornerKind::Reentrant);
        assert_eq!(CornerKind::from_angle(PI + 5e-10), CornerKind::Reentrant);
        assert_eq!(CornerKind::from_angle(1.5 * PI), CornerKind::StrictReentrant);
    }

    #[test]
    fn square_corners_and_location() {
        let d = shapes::square(1.0).unwrap();
        assert_eq!(d.corners().len(), 4);
        for c in d.corners() {
            assert!((c.angle - FRAC_PI_2).abs() < 1e-12);
            assert_eq!(c.kind, CornerKind::Nonreentrant);
        }
        assert_eq!(d.locate(Vec2::new(0.5, 0.5)), Location::Inside);
        assert_eq!(d.locate(Vec2::new(0.5, 0.0)), Location::OnBoundary);
        assert_eq!(d.locate(Vec2::new(1.0, 1.0)), Location::OnBoundary);
        assert_eq!(d.locate(Vec2::new(1.0, 0.3)), Location::OnBoundary);
        assert_eq!(d.locate(Vec2::new(1.5, 0.5)), Location::Outside);
        assert_eq!(d.locate(Vec2::new(-0.5, 0.0)), Location::Outside);
        assert_eq!(d.locate(Vec2::new(0.25, 1.0 - 1e-9)), Location::Inside);
    }

    #[test]
    fn lshape_inner_corner_is_strict_reentrant() {
        let d = shapes::lshape(2.0, 1.0).unwrap();
        let strict: Vec<_> = d.corners().iter().filter(|c| c.kind == CornerKind::StrictReentrant).collect();
        assert_eq!(strict.len(), 1);
        assert!((strict[0].angle - 1.5 * PI).abs() < 1e-12);
        assert_eq!(strict[0].vertex, Vec2::new(1.0, 1.0));
        assert!(d.contains(Vec2::new(0.5, 1.5)));
        assert!(!d.contains(Vec2::new(1.5, 1.5)));
        assert_eq!(d.locate(Vec2::new(1.0, 1.5)), Location::OnBoundary);
    }

    #[test]
    fn disk_has_no_corners_and_exact_axis_location() {
        let d = shapes::disk(Vec2::ZERO, 1.0).unwrap();
        assert!(d.corners().is_empty());
        assert_eq!(d.locate(Vec2::new(1.0, 0.0)), Location::OnBoundary);
        assert_eq!(d.locate(Vec2::new(0.0, -1.0)), Location::OnBoundary);
        assert_eq!(d.locate(Vec2::new(0.0, 0.0)), Location::Inside);
        assert_eq!(d.locate(Vec2::new(0.999, 0.0)), Location::Inside);
        assert_eq!(d.locate(Vec2::new(-0.999, 0.0)), Location::Inside);
        assert_eq!(d.locate(Vec2::new(0.72, 0.72)), Location::Outside);
        let mut k = 0;
        for i in -20..=20 {
            for j in -20..=20 {
                let p = Vec2::new(i as f64 / 16.0, j as f64 / 16.0);
                let expect = p.norm() < 1.0;
                if (p.norm() - 1.0).abs() > 1e-12 {
                    assert_eq!(d.contains(p), expect, "{p:?}");
                    k += 1;
                }
            }
        }
        assert!(k > 1000);
    }

    #[test]
    fn stadium_joins_are_smooth() {
        let d = shapes::stadium(1.0, 0.5).unwrap();
        assert_eq!(d.corners().len(), 4);
        assert!(d.corners().iter().all(|c| c.kind == CornerKind::Reentrant));
        // vertical line through the join points
        assert!(d.contains(Vec2::new(1.0, 0.0)));
        assert!(d.contains(Vec2::new(-1.0, 0.49)));
        assert_eq!(d.locate(Vec2::new(1.0, 0.5)), Location::OnBoundary);
        let ys = d.vline_crossings(1.0, -1.0, 1.0);
        assert_eq!(ys.len(), 2, "{ys:?}");
    }

    #[test]
    fn grid_line_crossings_on_disk() {
        let d = shapes::disk(Vec2::ZERO, 1.0).unwrap();
        let xs = d.hline_crossings(0.6, -2.0, 2.0);
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs.len(), 2);
        assert!((xs[1] - 0.8).abs() < 1e-14);
        assert!((xs[0] + 0.8).abs() < 1e-14);
        let ys = d.vline_crossings(0.0, 0.0, 2.0);
        assert_eq!(ys.len(), 1);
        assert!((ys[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_open_or_misoriented_loops() {
        let open: Vec<Arc<dyn ParamCurve>> = vec![Arc::new(CircleArc::new(Vec2::ZERO, 1.0, 0.0, 3.0))];
        assert!(Domain::new(vec![open]).is_err());
        let cw: Vec<Arc<dyn ParamCurve>> = vec![
            Arc::new(Segment::new(Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0))),
            Arc::new(Segment::new(Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0))),
            Arc::new(Segment::new(Vec2::new(1.0, 1.0), Vec2::new(1.0, 0.0))),
            Arc::new(Segment::new(Vec2::new(1.0, 0.0), Vec2::new(0.0, 0.0))),
        ];
        assert!(matches!(Domain::new(vec![cw]), Err(Error::InvalidGeometry(_))));
        let gap: Vec<Arc<dyn ParamCurve>> = vec![
            Arc::new(CircleArc::new(Vec2::ZERO, 1.0, 0.0, PI)),
            Arc::new(CircleArc::new(Vec2::ZERO, 1.0, PI, TAU - 0.1)),
        ];
        assert!(Domain::new(vec![gap]).is_err());
    }
}
