//! The plastic set along boundary p-normals: free-boundary extraction and
//! component counting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::Domain;
use crate::distance::{closest_points_unchecked, CLUSTER_RADIUS};
use crate::error::{Error, Result};
use crate::grid::{NodeKind, ScalarField};
use crate::pnorm::ExponentPair;
use crate::solver::{Region, RegionField};
use crate::vec2::Vec2;

pub const SAMPLES_PER_ARC: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointLabel {
    Plastic,
    Elastic,
    Outside,
}

/// Label an arbitrary point: by the interpolated gap `d_p - u` inside cells
/// whose corners are all interior, otherwise by the nearest interior corner.
pub fn label_at(z: Vec2, domain: &Domain, obstacle: &ScalarField, regions: &RegionField) -> PointLabel {
    if !domain.contains(z) {
        return PointLabel::Outside;
    }
    let g = obstacle.grid.as_ref();
    let Some(corners) = obstacle.cell_corners(z) else {
        return PointLabel::Outside;
    };
    if corners.iter().all(|&k| g.is_interior(k)) {
        let gap = regions.gap.interpolate(z).expect("interior cell");
        let d = obstacle.interpolate(z).expect("interior cell");
        return if gap <= regions.tolerance_at(d) { PointLabel::Plastic } else { PointLabel::Elastic };
    }
    let nearest = corners
        .iter()
        .filter(|&&k| g.kind(k) == NodeKind::Interior)
        .min_by(|&&a, &&b| g.pos(a).dist(z).total_cmp(&g.pos(b).dist(z)));
    match nearest {
        // next to the boundary with no interior corner: u = d_p = 0 there
        None => PointLabel::Plastic,
        Some(&k) => match regions.labels[k] {
            Region::Plastic => PointLabel::Plastic,
            _ => PointLabel::Elastic,
        },
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DeltaSample {
    pub arc: usize,
    pub t: f64,
    /// Length of the plastic segment along the inward p-normal.
    pub delta: f64,
    /// Last parameter carrying the plastic label; it trails `delta` by
    /// about `sqrt(2 contact_tol / psi)`; not capped.
    pub label_delta: f64,
    /// `y(t) + delta mu(t)`.
    pub point: Vec2,
    /// The ray left the domain while still plastic.
    pub flagged: bool,
    /// `delta` was cut back to where the p-normal stops minimizing.
    pub capped: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreeBoundaryCurve {
    pub samples: Vec<DeltaSample>,
    pub contact_tol: f64,
    pub h: f64,
}

impl FreeBoundaryCurve {
    pub fn arc_samples(&self, arc: usize) -> impl Iterator<Item = &DeltaSample> + '_ {
        self.samples.iter().filter(move |s| s.arc == arc)
    }

    /// Samples with a genuine plastic segment, i.e. off the boundary.
    pub fn interior_points(&self) -> impl Iterator<Item = &DeltaSample> + '_ {
        let floor = 2.0 * self.contact_tol;
        self.samples.iter().filter(move |s| s.delta > floor && !s.flagged)
    }
}

/// Sample parameters, offset by half a step so corner vertices are skipped.
pub fn sample_params(t0: f64, t1: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| t0 + (i as f64 + 0.5) / n as f64 * (t1 - t0))
}

/// Extract `delta(t)` by marching along each inward p-normal in steps of
/// `h/4` until the first elastic point, then bisecting the label change.
/// `delta` is capped where `d_p(y + s mu) < s`, since beyond that the ray
/// no longer realizes the distance.
pub fn extract_delta(
    domain: &Domain,
    obstacle: &ScalarField,
    regions: &RegionField,
    e: ExponentPair,
    samples_per_arc: usize,
) -> Result<FreeBoundaryCurve> {
    obstacle.check_same_grid(&regions.gap)?;
    let h = obstacle.grid.h;
    let step = 0.25 * h;
    let s_max = 2.0 * domain.scale();
    let jobs: Vec<(usize, f64)> = domain
        .arcs()
        .iter()
        .flat_map(|a| {
            let (t0, t1) = a.t_range();
            sample_params(t0, t1, samples_per_arc).map(move |t| (a.id, t))
        })
        .collect();
    let samples = jobs
        .par_iter()
        .map(|&(id, t)| {
            let arc = domain.arc(id);
            let y = arc.point(t);
            let mu = arc.inward_p_normal(t, e);
            let label = |s: f64| label_at(y + mu * s, domain, obstacle, regions);
            let mut prev = 0.0;
            let mut label_delta = 0.0;
            let mut flagged = false;
            let mut k = 1;
            let mut delta = loop {
                let s = k as f64 * step;
                if s > s_max {
                    flagged = true;
                    label_delta = prev;
                    break prev;
                }
                match label(s) {
                    PointLabel::Plastic => prev = s,
                    PointLabel::Elastic if k == 1 => break 0.0,
                    PointLabel::Elastic => {
                        let (mut lo, mut hi) = (prev, s);
                        for _ in 0..30 {
                            let mid = 0.5 * (lo + hi);
                            if label(mid) == PointLabel::Plastic {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        label_delta = lo;
                        break sqrt_gap_root(y, mu, lo, h, regions).unwrap_or(lo);
                    }
                    PointLabel::Outside => {
                        flagged = true;
                        label_delta = prev;
                        break prev;
                    }
                }
                k += 1;
            };
            let realizes = |s: f64| {
                let z = y + mu * s;
                domain.contains(z) && closest_points_unchecked(z, domain, e, CLUSTER_RADIUS).distance >= s * (1.0 - 1e-9)
            };
            let mut capped = false;
            if delta > 0.0 && !realizes(delta) {
                capped = true;
                let (mut lo, mut hi) = (0.0, delta);
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    if realizes(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                delta = lo;
            }
            DeltaSample { arc: id, t, delta, label_delta, point: y + mu * delta, flagged, capped }
        })
        .collect();
    Ok(FreeBoundaryCurve { samples, contact_tol: regions.contact_tol, h })
}

/// Zero of `sqrt(gap)` along the ray, extrapolated from two elastic samples
/// past the label change at `s_c`. The gap grows quadratically off the
/// contact set, so its square root is linear there. Accepted only within
/// `3h` behind `s_c`.
fn sqrt_gap_root(y: Vec2, mu: Vec2, s_c: f64, h: f64, regions: &RegionField) -> Option<f64> {
    let g1 = regions.gap.interpolate(y + mu * (s_c + h))?;
    let g2 = regions.gap.interpolate(y + mu * (s_c + 2.0 * h))?;
    let grid = regions.grid();
    for s in [s_c + h, s_c + 2.0 * h] {
        let c = regions.gap.cell_corners(y + mu * s)?;
        if !c.iter().all(|&k| grid.is_interior(k)) {
            return None;
        }
    }
    let (r1, r2) = (g1.max(0.0).sqrt(), g2.max(0.0).sqrt());
    if !(r2 > r1 && r1 > 0.0) {
        return None;
    }
    let s0 = s_c + h - r1 * h / (r2 - r1);
    (s0 <= s_c && s0 >= s_c - 3.0 * h).then_some(s0.max(0.0))
}

/// Number of maximal runs of samples with `delta > 2 contact_tol` on a
/// straight arc.
pub fn count_plastic_components(fb: &FreeBoundaryCurve, domain: &Domain, arc: usize) -> Result<usize> {
    if arc >= domain.arcs().len() {
        return Err(Error::NotApplicable(format!("no arc {arc}")));
    }
    if !domain.arc(arc).curve.is_straight() {
        return Err(Error::NotApplicable(format!("arc {arc} is not straight")));
    }
    let floor = 2.0 * fb.contact_tol;
    let mut s: Vec<&DeltaSample> = fb.arc_samples(arc).collect();
    s.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut count = 0;
    let mut inside = false;
    for x in s {
        let on = x.delta > floor;
        if on && !inside {
            count += 1;
        }
        inside = on;
    }
    Ok(count)
}
