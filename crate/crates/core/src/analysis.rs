//! Numerical checks of the structural properties of a solved instance:
//! elastic ridge, plastic segments, free-boundary nondegeneracy, elastic
//! corners and the reentrant fan.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{CornerKind, CornerRecord, Domain};
use crate::distance::{
    closest_points, corner_fan_rays, exact_distance_sampler, in_corner_fan, laplacian_from_foot, point_distance_laplacian,
    second_difference_probe, DistanceMap, Foot, RidgeSet, CLUSTER_RADIUS,
};
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::plastic::{label_at, FreeBoundaryCurve, PointLabel};
use crate::pnorm::{gamma_p, gamma_q, ExponentPair};
use crate::solver::{Region, RegionField};
use crate::vec2::Vec2;

/// Witnesses kept per report.
const MAX_WITNESSES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec2,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    /// Smallest slack of the checked inequality; negative on failure.
    pub worst_margin: f64,
    pub tolerance: f64,
    /// Worst offending (or, on a pass, tightest) points.
    pub witnesses: Vec<Witness>,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: &str, tolerance: f64) -> Self {
        CheckReport {
            name: name.to_string(),
            passed: true,
            worst_margin: f64::MAX,
            tolerance,
            witnesses: Vec::new(),
            samples: 0,
            notes: Vec::new(),
        }
    }

    /// Record one sample with slack `margin`; the sample fails when
    /// `margin < 0`.
    pub fn record(&mut self, point: Vec2, margin: f64) {
        self.samples += 1;
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
        if margin < 0.0 || margin.is_nan() {
            self.passed = false;
        }
        self.witnesses.push(Witness { point, value: margin });
        if self.witnesses.len() > 4 * MAX_WITNESSES {
            self.trim();
        }
    }

    fn trim(&mut self) {
        self.witnesses.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.point.x.total_cmp(&b.point.x)).then(a.point.y.total_cmp(&b.point.y)));
        self.witnesses.truncate(MAX_WITNESSES);
    }

    pub fn finish(mut self) -> Self {
        self.trim();
        if self.samples == 0 {
            self.notes.push("no samples".into());
        }
        self
    }
}

/// Combine sub-reports under one name: passes iff all pass.
pub fn merge_reports(name: &str, parts: Vec<CheckReport>) -> CheckReport {
    let mut r = CheckReport::new(name, parts.first().map_or(0.0, |p| p.tolerance));
    if parts.is_empty() {
        r.notes.push("not applicable".into());
        return r;
    }
    for p in parts {
        r.passed &= p.passed;
        r.worst_margin = r.worst_margin.min(p.worst_margin);
        r.samples += p.samples;
        r.notes.push(format!("{}: passed={} worst_margin={:e} samples={}", p.name, p.passed, p.worst_margin, p.samples));
        r.notes.extend(p.notes.into_iter().map(|n| format!("{}: {n}", p.name)));
        r.witnesses.extend(p.witnesses);
    }
    r.trim();
    r
}

/// Every ridge node must be elastic. Witnesses carry `d_p - u` minus the
/// node's contact threshold; `worst_margin` is the smallest raw gap.
pub fn check_ridge_elastic(regions: &RegionField, ridge: &RidgeSet) -> CheckReport {
    let grid = regions.grid();
    let mut r = CheckReport::new("ridge_elastic", regions.contact_tol);
    let mut min_gap = f64::MAX;
    let mut plastic = 0;
    for k in ridge.nodes() {
        let gap = regions.gap.values[k];
        min_gap = min_gap.min(gap);
        r.record(grid.pos(k), gap - regions.node_tolerance(k));
        if regions.labels[k] == Region::Plastic {
            plastic += 1;
        }
    }
    r.worst_margin = min_gap;
    r.passed = plastic == 0;
    if plastic > 0 {
        r.notes.push(format!("{plastic} ridge nodes labelled plastic"));
    }
    r.finish()
}

/// For up to `samples` plastic nodes (evenly strided), every point of the
/// segment to each p-closest boundary point must sample as plastic.
pub fn check_segment_plastic(domain: &Domain, map: &DistanceMap, regions: &RegionField, samples: usize) -> CheckReport {
    let grid = regions.grid();
    let obstacle = &map.field;
    let mut r = CheckReport::new("segment_plastic", regions.contact_tol);
    let plastic: Vec<usize> = (0..grid.len()).filter(|&k| regions.is_plastic(k)).collect();
    if plastic.is_empty() || samples == 0 {
        return r.finish();
    }
    let stride = (plastic.len() as f64 / samples as f64).max(1.0);
    let picked: Vec<usize> = (0..samples.min(plastic.len())).map(|i| plastic[(i as f64 * stride) as usize]).collect();
    let step = 0.25 * grid.h;
    let results: Vec<(Vec2, f64)> = picked
        .par_iter()
        .map(|&k| {
            let x = grid.pos(k);
            let cp = map.closest[k].as_ref().expect("plastic nodes are interior");
            let mut worst = f64::MAX;
            for foot in &cp.feet {
                let len = x.dist(foot.point);
                let n = (len / step).ceil().max(1.0) as usize;
                // stop short of the foot, which lies on the boundary
                for i in 0..n {
                    let z = x + (foot.point - x) * (i as f64 / n as f64);
                    let slack = match label_at(z, domain, obstacle, regions) {
                        PointLabel::Plastic => match (regions.gap.interpolate(z), obstacle.interpolate(z)) {
                            (Some(g), Some(d)) => (regions.tolerance_at(d) - g).max(0.0),
                            _ => 0.0,
                        },
                        PointLabel::Elastic => -regions.gap.interpolate(z).unwrap_or(regions.contact_tol).abs().max(f64::MIN_POSITIVE),
                        PointLabel::Outside => 0.0,
                    };
                    worst = worst.min(slack);
                }
            }
            (x, worst)
        })
        .collect();
    for (x, s) in results {
        r.record(x, s);
    }
    r.finish()
}

/// The two nondegeneracy margins at free-boundary samples:
/// `1 - kappa_p delta` and `psi = eta + Lap d_p`.
pub fn check_fb_nondegeneracy(domain: &Domain, fb: &FreeBoundaryCurve, eta: f64, e: ExponentPair) -> (CheckReport, CheckReport) {
    let mut focal = CheckReport::new("fb_focal_margin", 0.0);
    let mut psi = CheckReport::new("fb_psi_margin", 0.0);
    for s in fb.interior_points() {
        let arc = domain.arc(s.arc);
        let m1 = match domain.p_curvature(s.arc, s.t, e) {
            Ok(k) => 1.0 - k * s.delta,
            // degenerate foot: det DF normalized by the speed factor
            Err(_) => {
                let eps = 1e-7 * (arc.t_range().1 - arc.t_range().0);
                [s.t - eps, s.t + eps]
                    .iter()
                    .filter_map(|&t| domain.det_df(s.arc, t, s.delta, e).ok().map(|v| v / gamma_q(arc.d1(t), e)))
                    .fold(f64::NAN, f64::min)
            }
        };
        focal.record(s.point, m1);
        let foot = Foot { arc: s.arc, t: s.t, point: arc.point(s.t), corner: None };
        let m2 = laplacian_from_foot(s.point, &foot, s.delta, domain, e).map(|l| eta + l).unwrap_or(f64::NAN);
        psi.record(s.point, m2);
    }
    (focal.finish(), psi.finish())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CornerAnalysis {
    pub corner: CornerRecord,
    /// Largest `R` with every interior node of `B_R(vertex)` elastic.
    pub elastic_radius: f64,
    /// Log-log slope of `max u / d_p` on circles of radius `r` about the vertex.
    pub growth_exponent_fit: f64,
    /// `pi / (2 alpha) - 1` with `alpha` the half-angle.
    pub nu_theory: f64,
    /// Radii and ratios behind the fit.
    pub fit_samples: Vec<(f64, f64)>,
}

/// Elastic radius and growth exponent at a nonreentrant corner. The fit runs
/// over `r` in `[4h, R/2]`, `R` the elastic radius, sampling each circle at
/// angles in the middle 80% of the corner.
pub fn analyze_corner(corner: &CornerRecord, domain: &Domain, u: &ScalarField, regions: &RegionField) -> Result<CornerAnalysis> {
    if corner.kind != CornerKind::Nonreentrant {
        return Err(Error::NotApplicable(format!("corner {} is reentrant", corner.id)));
    }
    u.check_same_grid(&regions.gap)?;
    let grid = regions.grid();
    let h = grid.h;
    let v = corner.vertex;
    let elastic_radius = (0..grid.len())
        .filter(|&k| regions.is_plastic(k))
        .map(|k| grid.pos(k).dist(v))
        .fold(domain.scale(), f64::min);

    let (a0, a1) = corner_edge_angles(corner, domain);
    let mut fit_samples = Vec::new();
    let (r_lo, r_hi) = (4.0 * h, 0.5 * elastic_radius);
    if r_hi > r_lo {
        let n_r = 16;
        for i in 0..n_r {
            let r = r_lo * (r_hi / r_lo).powf(i as f64 / (n_r - 1) as f64);
            let mut best = f64::NAN;
            for j in 0..=32 {
                let th = a0 + (a1 - a0) * (0.1 + 0.8 * j as f64 / 32.0);
                let z = v + Vec2::from_angle(th) * r;
                let gap = regions.gap.interpolate(z);
                let uu = u.interpolate(z);
                if let (Some(g), Some(uu)) = (gap, uu) {
                    let d = g + uu;
                    if d > 0.0 && domain.contains(z) {
                        best = if best.is_nan() { uu / d } else { best.max(uu / d) };
                    }
                }
            }
            if best > 0.0 {
                fit_samples.push((r, best));
            }
        }
    }
    let growth_exponent_fit = if fit_samples.len() >= 2 {
        let pts: Vec<(f64, f64)> = fit_samples.iter().map(|(r, q)| (r.ln(), q.ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    let half = 0.5 * corner.angle;
    Ok(CornerAnalysis {
        corner: *corner,
        elastic_radius,
        growth_exponent_fit,
        nu_theory: std::f64::consts::PI / (2.0 * half) - 1.0,
        fit_samples,
    })
}

/// Angles of the two edges leaving the vertex, ordered so the domain lies
/// counter-clockwise from the first.
fn corner_edge_angles(corner: &CornerRecord, domain: &Domain) -> (f64, f64) {
    let after = domain.arc(corner.arc_after);
    let before = domain.arc(corner.arc_before);
    let out = after.d1(after.t_range().0);
    let back = -before.d1(before.t_range().1);
    let a0 = out.angle();
    let mut a1 = back.angle();
    while a1 <= a0 {
        a1 += 2.0 * std::f64::consts::PI;
    }
    (a0, a1)
}

/// Modulus-of-continuity proxy for `delta(t)`: the largest jump between
/// samples `2 dt` apart should shrink by a factor 1.5 at spacing `dt`, unless
/// it is already below `4h`.
pub fn check_delta_continuity(fb: &FreeBoundaryCurve) -> CheckReport {
    let mut arcs: Vec<usize> = fb.samples.iter().map(|s| s.arc).collect();
    arcs.dedup();
    arcs.sort_unstable();
    arcs.dedup();
    let (mut coarse, mut fine) = (0.0_f64, 0.0_f64);
    let mut wit = Vec2::ZERO;
    for a in arcs {
        let mut s: Vec<_> = fb.arc_samples(a).filter(|s| !s.flagged).collect();
        s.sort_by(|x, y| x.t.total_cmp(&y.t));
        for w in s.windows(2) {
            let j = (w[1].delta - w[0].delta).abs();
            if j > fine {
                fine = j;
                wit = w[1].point;
            }
        }
        for w in s.windows(3).step_by(2) {
            coarse = coarse.max((w[2].delta - w[0].delta).abs());
        }
    }
    let floor = 4.0 * fb.h;
    let mut r = CheckReport::new("delta_continuity", floor);
    let ratio = if fine > 0.0 { coarse / fine } else { f64::INFINITY };
    // slack: distance to whichever pass condition is closer to holding
    let margin = (floor - fine).max(if ratio.is_finite() { (ratio - 1.5) * fine } else { floor });
    r.record(wit, margin);
    r.notes.push(format!("max jump {coarse:.3e} at 2dt, {fine:.3e} at dt"));
    r.finish()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FanSample {
    pub point: Vec2,
    pub d_p: f64,
    pub point_distance: f64,
    pub laplacian: f64,
    pub fd_laplacian: f64,
}

/// Sample points strictly inside the fan of inward p-normals at a strict
/// reentrant corner: `n_r` radii in `(0, r_max]` times `n_a` angles.
pub fn fan_samples(corner: &CornerRecord, domain: &Domain, e: ExponentPair, r_max: f64, n_r: usize, n_a: usize) -> Vec<Vec2> {
    let (m1, m2) = corner_fan_rays(corner, domain, e);
    let a1 = m1.angle();
    let span = m1.cross(m2).atan2(m1.dot(m2));
    let mut out = Vec::with_capacity(n_r * n_a);
    for i in 0..n_r {
        let r = r_max * (i as f64 + 1.0) / n_r as f64;
        for j in 0..n_a {
            let th = a1 + span * (j as f64 + 0.5) / n_a as f64;
            out.push(corner.vertex + Vec2::from_angle(th) * r);
        }
    }
    out
}

/// Three reports at a strict reentrant corner: `d_p` equals the point
/// distance to the vertex (to `1e-9`), the closed-form Laplacian matches a
/// second-difference estimate (to `10h` relative to
/// `max(|Lap|, 1/gamma_p(w))`, where the stencil stays in the fan), and `Lap d_p >= 0`.
pub fn reentrant_fan_check(corner: &CornerRecord, domain: &Domain, e: ExponentPair, h: f64) -> Result<Vec<CheckReport>> {
    if corner.kind != CornerKind::StrictReentrant {
        return Err(Error::NotApplicable(format!("corner {} is not strictly reentrant", corner.id)));
    }
    // radii below the distance from the vertex to the nearest other corner
    let reach = domain
        .corners()
        .iter()
        .filter(|c| c.id != corner.id)
        .map(|c| c.vertex.dist(corner.vertex))
        .fold(domain.scale(), f64::min);
    let pts = fan_samples(corner, domain, e, 0.4 * reach, 10, 10);
    let sampler = exact_distance_sampler(domain, e);
    let mut exact = CheckReport::new("fan_point_distance", 1e-9);
    let mut lap = CheckReport::new("fan_laplacian", 10.0 * h);
    let mut sign = CheckReport::new("fan_laplacian_sign", 0.0);
    for x in pts {
        let w = x - corner.vertex;
        debug_assert!(in_corner_fan(corner, domain, w, e));
        let cp = closest_points(x, domain, e, CLUSTER_RADIUS)?;
        exact.record(x, 1e-9 - (cp.distance - gamma_p(w, e)).abs());
        let l = point_distance_laplacian(w, e);
        sign.record(x, l);
        // the difference stencil must stay where d_p is the point distance
        let stencil = [Vec2::new(h, 0.0), Vec2::new(-h, 0.0), Vec2::new(0.0, h), Vec2::new(0.0, -h)];
        if stencil.iter().all(|&s| in_corner_fan(corner, domain, w + s, e)) {
            let fd = second_difference_probe(&sampler, x, Vec2::new(1.0, 0.0), h)? + second_difference_probe(&sampler, x, Vec2::new(0.0, 1.0), h)?;
            // the Laplacian of a 1-homogeneous function scales like 1/|w|;
            // for p > 2 it vanishes along the axes, so measure against that scale
            let rel = (fd - l).abs() / l.abs().max(1.0 / gamma_p(w, e));
            lap.record(x, 10.0 * h - rel);
        }
    }
    Ok(vec![exact.finish(), lap.finish(), sign.finish()])
}
