//! SVG overlay of a solved instance on a fixed 1000-unit viewbox.

use std::fmt::Write;

use crate::boundary::Domain;
use crate::distance::RidgeSet;
use crate::plastic::FreeBoundaryCurve;
use crate::solver::RegionField;
use crate::vec2::Vec2;

pub const VIEWBOX: f64 = 1000.0;
const FILL: f64 = 0.9;
const ARC_SAMPLES: usize = 256;

/// Uniform map from the domain's bounding box into the viewbox, y up.
#[derive(Clone, Copy, Debug)]
pub struct ViewMap {
    center: Vec2,
    scale: f64,
}

impl ViewMap {
    pub fn new(domain: &Domain) -> Self {
        let (lo, hi) = domain.bbox();
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        ViewMap { center: (lo + hi) * 0.5, scale: FILL * VIEWBOX / span }
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        Vec2::new(0.5 * VIEWBOX + (p.x - self.center.x) * self.scale, 0.5 * VIEWBOX - (p.y - self.center.y) * self.scale)
    }

    pub fn length(&self, l: f64) -> f64 {
        l * self.scale
    }
}

/// Boundary black, plastic set shaded grey, free boundary red, ridge blue.
pub fn overlay(domain: &Domain, regions: &RegionField, fb: &FreeBoundaryCurve, ridge: &RidgeSet) -> String {
    let m = ViewMap::new(domain);
    let grid = regions.grid();
    let h = grid.h;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {v} {v}" width="{v}" height="{v}">"#,
        v = VIEWBOX
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{v}" height="{v}" fill="white"/>"#, v = VIEWBOX);

    // plastic nodes, merged into horizontal runs per grid row
    let _ = writeln!(s, r##"<g id="plastic" fill="#b0b0b0" stroke="none">"##);
    for j in 0..grid.ny {
        let mut i = 0;
        while i < grid.nx {
            if !regions.is_plastic(grid.index(i, j)) {
                i += 1;
                continue;
            }
            let start = i;
            while i < grid.nx && regions.is_plastic(grid.index(i, j)) {
                i += 1;
            }
            let a = grid.pos(grid.index(start, j)) + Vec2::new(-0.5 * h, 0.5 * h);
            let w = (i - start) as f64 * h;
            let p = m.apply(a);
            let _ = writeln!(s, r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}"/>"#, p.x, p.y, m.length(w), m.length(h));
        }
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="boundary" fill="none" stroke="black" stroke-width="2">"#);
    for arc in domain.arcs() {
        let (t0, t1) = arc.t_range();
        let mut d = String::new();
        for k in 0..=ARC_SAMPLES {
            let p = m.apply(arc.point(t0 + (t1 - t0) * k as f64 / ARC_SAMPLES as f64));
            let _ = write!(d, "{}{:.3},{:.3} ", if k == 0 { "M" } else { "L" }, p.x, p.y);
        }
        let _ = writeln!(s, r#"<path d="{}"/>"#, d.trim_end());
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="ridge" fill="blue" stroke="none">"#);
    for k in ridge.nodes() {
        let p = m.apply(grid.pos(k));
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="1.5"/>"#, p.x, p.y);
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="free_boundary" fill="red" stroke="none">"#);
    for smp in fb.interior_points() {
        let p = m.apply(smp.point);
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="1.5"/>"#, p.x, p.y);
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::shapes;

    #[test]
    fn view_map_centers_and_flips() {
        let d = shapes::rectangle(2.0, 1.0).unwrap();
        let m = ViewMap::new(&d);
        let c = m.apply(Vec2::new(1.0, 0.5));
        assert!((c.x - 500.0).abs() < 1e-9 && (c.y - 500.0).abs() < 1e-9);
        let tl = m.apply(Vec2::new(0.0, 1.0));
        assert!((tl.x - 50.0).abs() < 1e-9);
        assert!(tl.y < 500.0);
    }
}
