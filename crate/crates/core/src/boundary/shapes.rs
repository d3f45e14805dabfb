//! Built-in domains. All loops are counterclockwise.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use crate::boundary::curve::{CircleArc, ParamCurve, PeriodicSpline, Segment, Superellipse};
use crate::boundary::domain::Domain;
use crate::error::{Error, Result};
use crate::vec2::Vec2;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGeometry(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn disk(center: Vec2, radius: f64) -> Result<Domain> {
    positive("radius", radius)?;
    Domain::new(vec![vec![Arc::new(CircleArc::full(center, radius))]])
}

/// `[0, side]^2`.
pub fn square(side: f64) -> Result<Domain> {
    rectangle(side, side)
}

/// `[0, width] x [0, height]`.
pub fn rectangle(width: f64, height: f64) -> Result<Domain> {
    positive("width", width)?;
    positive("height", height)?;
    polygon(&[
        Vec2::new(0.0, 0.0),
        Vec2::new(width, 0.0),
        Vec2::new(width, height),
        Vec2::new(0.0, height),
    ])
}

/// `[0, size]^2` with the top-right `cut x cut` square removed.
pub fn lshape(size: f64, cut: f64) -> Result<Domain> {
    positive("size", size)?;
    positive("cut", cut)?;
    if cut >= size {
        return Err(Error::InvalidGeometry("L-shape cut must be smaller than its size".into()));
    }
    let (l, c) = (size, cut);
    polygon(&[
        Vec2::new(0.0, 0.0),
        Vec2::new(l, 0.0),
        Vec2::new(l, l - c),
        Vec2::new(l - c, l - c),
        Vec2::new(l - c, l),
        Vec2::new(0.0, l),
    ])
}

pub fn regular_polygon(sides: usize, circumradius: f64, center: Vec2, rotation: f64) -> Result<Domain> {
    if sides < 3 {
        return Err(Error::InvalidGeometry("polygon needs at least 3 sides".into()));
    }
    positive("circumradius", circumradius)?;
    let verts: Vec<Vec2> = (0..sides)
        .map(|k| center + Vec2::from_angle(rotation + TAU * k as f64 / sides as f64) * circumradius)
        .collect();
    polygon(&verts)
}

/// Simple polygon; clockwise input is reversed.
pub fn polygon(vertices: &[Vec2]) -> Result<Domain> {
    let mut v: Vec<Vec2> = vertices.to_vec();
    if v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    if v.len() < 3 {
        return Err(Error::InvalidGeometry("polygon needs at least 3 vertices".into()));
    }
    if v.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidGeometry("polygon vertices must be finite".into()));
    }
    let area2: f64 = (0..v.len()).map(|i| v[i].cross(v[(i + 1) % v.len()])).sum();
    if area2 == 0.0 {
        return Err(Error::InvalidGeometry("polygon has zero area".into()));
    }
    if area2 < 0.0 {
        v.reverse();
    }
    check_simple(&v)?;
    let n = v.len();
    let arcs: Vec<Arc<dyn ParamCurve>> =
        (0..n).map(|i| Arc::new(Segment::new(v[i], v[(i + 1) % n])) as Arc<dyn ParamCurve>).collect();
    Domain::new(vec![arcs])
}

fn check_simple(v: &[Vec2]) -> Result<()> {
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if a == b {
            return Err(Error::InvalidGeometry(format!("polygon has a repeated vertex at index {i}")));
        }
        for j in i + 1..n {
            // skip adjacent edges
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (v[j], v[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Err(Error::InvalidGeometry(format!("polygon edges {i} and {j} intersect")));
            }
        }
    }
    Ok(())
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2, o: f64| {
        o == 0.0 && r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

/// `|x/a|^m + |y/b|^m < 1`, centered at the origin.
pub fn superellipse(exponent: f64, semi_x: f64, semi_y: f64) -> Result<Domain> {
    let se = Superellipse::new(Vec2::ZERO, exponent, semi_x, semi_y)?;
    Domain::new(vec![vec![Arc::new(se)]])
}

/// Rectangle `[-L, L] x [-R, R]` capped by two half-disks of radius `R`.
pub fn stadium(half_length: f64, radius: f64) -> Result<Domain> {
    positive("half_length", half_length)?;
    positive("radius", radius)?;
    let (l, r) = (half_length, radius);
    let arcs: Vec<Arc<dyn ParamCurve>> = vec![
        Arc::new(Segment::new(Vec2::new(-l, -r), Vec2::new(l, -r))),
        Arc::new(CircleArc::new(Vec2::new(l, 0.0), r, -FRAC_PI_2, FRAC_PI_2)),
        Arc::new(Segment::new(Vec2::new(l, r), Vec2::new(-l, r))),
        Arc::new(CircleArc::new(Vec2::new(-l, 0.0), r, FRAC_PI_2, PI + FRAC_PI_2)),
    ];
    Domain::new(vec![arcs])
}

/// Closed curve through user points, fitted with a periodic cubic spline.
/// The result is flagged approximate.
pub fn spline(points: &[Vec2]) -> Result<Domain> {
    let mut v = points.to_vec();
    if v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    let area2: f64 = (0..v.len()).map(|i| v[i].cross(v[(i + 1) % v.len()])).sum();
    if area2 < 0.0 {
        v.reverse();
    }
    Domain::new(vec![vec![Arc::new(PeriodicSpline::new(&v)?)]])
}
