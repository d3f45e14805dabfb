//! End-to-end runs: build, solve, check, and write the output files.
//!
//! `report.json` holds everything except wall-clock timings, which go to
//! `timing.json`, so repeated runs produce byte-identical reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    analyze_corner, check_delta_continuity, check_fb_nondegeneracy, check_ridge_elastic, check_segment_plastic, merge_reports,
    reentrant_fan_check, CheckReport, CornerAnalysis,
};
use crate::boundary::{validate_degenerate_points, CornerKind, DegeneratePointReport, Domain};
use crate::config::{domain_warnings, CheckName, RunConfig};
use crate::distance::{detect_ridge, DistanceMap, RidgeSet};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::plastic::{count_plastic_components, extract_delta, FreeBoundaryCurve};
use crate::pnorm::{gamma_q, ExponentPair};
use crate::solver::{classify_regions, difference_gradient, solve_obstacle, Region, RegionField, Solution, SolveStats};
use crate::svg;

pub const FIELDS_HEADER: &str = "x,y,u,d_p,region";
pub const FREE_BOUNDARY_HEADER: &str = "arc,t,delta,x,y";
pub const RIDGE_HEADER: &str = "x,y,d_p,kind";
/// Components per straight side above which the count check fails.
pub const COMPONENT_BOUND: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    SolverFailed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSummary {
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub interior_nodes: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionSummary {
    pub plastic_nodes: usize,
    pub elastic_nodes: usize,
    pub contact_tol: f64,
    pub max_gamma_q: f64,
    pub plastic_mean_deviation: f64,
    pub elastic_below_one: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreeBoundarySummary {
    pub samples: usize,
    pub plastic_samples: usize,
    pub flagged_samples: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    /// Mean distance of free-boundary points from the bounding-box centre.
    pub fb_radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArcComponents {
    pub arc: usize,
    pub components: usize,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Timing {
    pub distance_s: f64,
    pub solve_s: f64,
    pub extract_s: f64,
    pub checks_s: f64,
    pub write_s: f64,
    pub total_s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub grid: GridSummary,
    pub solver: SolveStats,
    pub regions: Option<RegionSummary>,
    pub free_boundary: Option<FreeBoundarySummary>,
    pub ridge_nodes: usize,
    pub degenerate_points: Vec<DegeneratePointReport>,
    pub corners: Vec<CornerAnalysis>,
    pub components: Vec<ArcComponents>,
    pub warnings: Vec<String>,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
    #[serde(skip)]
    pub timing: Timing,
}

/// Everything a run computes, for callers that want the fields.
pub struct RunArtifacts {
    pub domain: Domain,
    pub exponent: ExponentPair,
    pub map: DistanceMap,
    pub ridge: RidgeSet,
    pub solution: Solution,
    pub regions: RegionField,
    pub free_boundary: FreeBoundaryCurve,
}

/// Reals in CSV output: 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Run a configuration and write its files to `config.out_dir`.
///
/// Invalid configurations return `Error::Config`. Solver non-convergence is
/// not an error: the partial report is written and carries
/// `RunStatus::SolverFailed`.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let (report, artifacts) = compute(config)?;
    let t = Instant::now();
    let out = config.out_dir.as_path();
    fs::create_dir_all(out)?;
    if let Some(a) = &artifacts {
        write_fields(out, a)?;
        write_free_boundary(out, &a.free_boundary)?;
        write_ridge(out, a)?;
        if config.svg {
            fs::write(out.join("overlay.svg"), svg::overlay(&a.domain, &a.regions, &a.free_boundary, &a.ridge))?;
        }
    }
    let mut report = report;
    report.timing.write_s = secs(t);
    report.timing.total_s += report.timing.write_s;
    fs::write(out.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    fs::write(out.join("timing.json"), serde_json::to_string_pretty(&report.timing)? + "\n")?;
    Ok(report)
}

/// Run without writing files. The artifacts are `None` when the solver did
/// not converge.
pub fn compute(config: &RunConfig) -> Result<(RunReport, Option<RunArtifacts>)> {
    let start = Instant::now();
    config.validate()?;
    let e = config.exponent()?;
    let domain = config.shape.build()?;
    let cfg = config.solve_config()?;
    let mut timing = Timing::default();

    let t = Instant::now();
    let grid = Arc::new(Grid::new(&domain, config.resolution)?);
    let map = DistanceMap::compute(&domain, grid.clone(), e);
    let ridge = detect_ridge(&domain, &map);
    timing.distance_s = secs(t);

    let mut report = RunReport {
        config: config.clone(),
        status: RunStatus::Completed,
        error: None,
        grid: GridSummary { h: grid.h, nx: grid.nx, ny: grid.ny, interior_nodes: grid.interior_indices().len() },
        solver: SolveStats::default(),
        regions: None,
        free_boundary: None,
        ridge_nodes: ridge.len(),
        degenerate_points: validate_degenerate_points(&domain, e),
        corners: Vec::new(),
        components: Vec::new(),
        warnings: domain_warnings(&domain, e),
        checks: Vec::new(),
        passed: false,
        timing: Timing::default(),
    };

    let t = Instant::now();
    let solution = match solve_obstacle(&map.field, &cfg) {
        Ok(s) => s,
        Err(Error::IterationLimit { iterations, last_update }) => {
            timing.solve_s = secs(t);
            report.status = RunStatus::SolverFailed;
            report.error = Some(format!("no convergence after {iterations} iterations (last update {last_update:e})"));
            report.solver.iterations = iterations;
            report.solver.last_update = last_update;
            timing.total_s = secs(start);
            report.timing = timing;
            return Ok((report, None));
        }
        Err(err) => return Err(err),
    };
    timing.solve_s = secs(t);
    report.solver = solution.stats.clone();

    let t = Instant::now();
    let regions = classify_regions(&solution.u, &map.field, cfg.contact_tol, e)?;
    let fb = extract_delta(&domain, &map.field, &regions, e, config.samples_per_arc)?;
    timing.extract_s = secs(t);

    report.regions = Some(RegionSummary {
        plastic_nodes: regions.count(Region::Plastic),
        elastic_nodes: regions.count(Region::Elastic),
        contact_tol: regions.contact_tol,
        max_gamma_q: regions.gradient.max_gamma_q,
        plastic_mean_deviation: regions.gradient.plastic_mean_deviation,
        elastic_below_one: regions.gradient.elastic_below_one,
    });
    report.free_boundary = Some(summarize_fb(&domain, &fb));

    let t = Instant::now();
    for c in domain.corners() {
        if c.kind == CornerKind::Nonreentrant {
            report.corners.push(analyze_corner(c, &domain, &solution.u, &regions)?);
        }
    }
    for a in domain.arcs() {
        if let Ok(n) = count_plastic_components(&fb, &domain, a.id) {
            report.components.push(ArcComponents { arc: a.id, components: n });
        }
    }
    let artifacts = RunArtifacts { domain, exponent: e, map, ridge, solution, regions, free_boundary: fb };
    for &check in &config.checks {
        report.checks.push(run_check(check, config, &artifacts, &report)?);
    }
    report.passed = report.checks.iter().all(|c| c.passed);
    timing.checks_s = secs(t);
    timing.total_s = secs(start);
    report.timing = timing;
    Ok((report, Some(artifacts)))
}

fn summarize_fb(domain: &Domain, fb: &FreeBoundaryCurve) -> FreeBoundarySummary {
    let (lo, hi) = domain.bbox();
    let c = (lo + hi) * 0.5;
    let pts: Vec<_> = fb.interior_points().collect();
    let radius = if pts.is_empty() { 0.0 } else { pts.iter().map(|s| s.point.dist(c)).sum::<f64>() / pts.len() as f64 };
    FreeBoundarySummary {
        samples: fb.samples.len(),
        plastic_samples: pts.len(),
        flagged_samples: fb.samples.iter().filter(|s| s.flagged).count(),
        delta_min: fb.samples.iter().map(|s| s.delta).fold(f64::INFINITY, f64::min),
        delta_max: fb.samples.iter().map(|s| s.delta).fold(0.0, f64::max),
        fb_radius: radius,
    }
}

fn run_check(check: CheckName, config: &RunConfig, a: &RunArtifacts, report: &RunReport) -> Result<CheckReport> {
    let grid = a.map.grid();
    let h = grid.h;
    let name = check.as_str();
    Ok(match check {
        CheckName::Complementarity => {
            let cfg = config.solve_config()?;
            let tol = 10.0 * cfg.tol;
            let mut r = CheckReport::new(name, tol);
            r.record(grid.pos(0), tol - a.solution.stats.residual);
            let u = &a.solution.u.values;
            let d = &a.map.field.values;
            let (mut worst, mut at) = (f64::MAX, 0);
            for k in grid.interior_indices() {
                let m = u[k].min(d[k] - u[k]);
                if m < worst {
                    worst = m;
                    at = k;
                }
            }
            if worst < f64::MAX {
                r.record(grid.pos(at), worst);
            }
            r.notes.push(format!("residual {:e}; min(u, d_p - u) {worst:e}", a.solution.stats.residual));
            r.finish()
        }
        CheckName::GradientConstraint => {
            let bound = 1.0 + 10.0 * h;
            let mut r = CheckReport::new(name, bound);
            for k in grid.interior_indices() {
                let g = gamma_q(difference_gradient(&a.solution.u, k), a.exponent);
                r.record(grid.pos(k), bound - g);
            }
            r.finish()
        }
        CheckName::RidgeElastic => check_ridge_elastic(&a.regions, &a.ridge),
        CheckName::SegmentPlastic => check_segment_plastic(&a.domain, &a.map, &a.regions, config.segment_samples),
        CheckName::FbNondegeneracy => {
            let (f, p) = check_fb_nondegeneracy(&a.domain, &a.free_boundary, config.eta, a.exponent);
            merge_reports(name, vec![f, p])
        }
        CheckName::DeltaContinuity => check_delta_continuity(&a.free_boundary),
        CheckName::CornerElastic => {
            let mut r = CheckReport::new(name, 4.0 * h);
            for c in &report.corners {
                r.record(c.corner.vertex, c.elastic_radius - 4.0 * h);
                r.notes.push(format!(
                    "corner {}: elastic_radius {:e}, growth fit {:.4} (nu {:.4})",
                    c.corner.id, c.elastic_radius, c.growth_exponent_fit, c.nu_theory
                ));
            }
            r.finish()
        }
        CheckName::ReentrantFan => {
            let mut parts = Vec::new();
            for c in a.domain.corners().iter().filter(|c| c.kind == CornerKind::StrictReentrant) {
                parts.extend(reentrant_fan_check(c, &a.domain, a.exponent, h)?);
            }
            merge_reports(name, parts)
        }
        CheckName::PlasticComponents => {
            let mut r = CheckReport::new(name, COMPONENT_BOUND as f64);
            for c in &report.components {
                let (p, q) = a.domain.arc_ends(c.arc);
                r.record((p + q) * 0.5, COMPONENT_BOUND as f64 - c.components as f64);
                r.notes.push(format!("arc {}: {} components", c.arc, c.components));
            }
            r.finish()
        }
    })
}

fn write_fields(out: &Path, a: &RunArtifacts) -> Result<()> {
    let grid = a.map.grid();
    let mut s = String::with_capacity(grid.len() * 96);
    s.push_str(FIELDS_HEADER);
    s.push('\n');
    for k in 0..grid.len() {
        let p = grid.pos(k);
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_real(p.x),
            fmt_real(p.y),
            fmt_real(a.solution.u.values[k]),
            fmt_real(a.map.field.values[k]),
            a.regions.labels[k].as_str()
        );
    }
    fs::write(out.join("fields.csv"), s)?;
    Ok(())
}

fn write_free_boundary(out: &Path, fb: &FreeBoundaryCurve) -> Result<()> {
    let mut s = String::new();
    s.push_str(FREE_BOUNDARY_HEADER);
    s.push('\n');
    for p in fb.interior_points() {
        let _ = writeln!(s, "{},{},{},{},{}", p.arc, fmt_real(p.t), fmt_real(p.delta), fmt_real(p.point.x), fmt_real(p.point.y));
    }
    fs::write(out.join("free_boundary.csv"), s)?;
    Ok(())
}

fn write_ridge(out: &Path, a: &RunArtifacts) -> Result<()> {
    let grid = a.map.grid();
    let mut s = String::new();
    s.push_str(RIDGE_HEADER);
    s.push('\n');
    let mut focal = vec![false; grid.len()];
    for &k in &a.ridge.focal {
        focal[k] = true;
    }
    for k in a.ridge.nodes() {
        let p = grid.pos(k);
        let kind = if focal[k] { "focal" } else { "multiple" };
        let _ = writeln!(s, "{},{},{},{}", fmt_real(p.x), fmt_real(p.y), fmt_real(a.map.field.values[k]), kind);
    }
    fs::write(out.join("ridge.csv"), s)?;
    Ok(())
}
