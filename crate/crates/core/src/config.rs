//! Run configuration: a flat `key = value` text format, one key per line,
//! with shape parameters under dotted `shape.*` keys.
//!
//! ```text
//! # unit disk
//! shape = disk
//! shape.radius = 1
//! p = 2
//! eta = 4
//! resolution = 128
//! checks = ridge_elastic, fb_nondegeneracy
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boundary::{shapes, validate_degenerate_points, AssumptionStatus, CornerKind, Domain};
use crate::distance::corner_fan_rays;
use crate::error::{Error, Result};
use crate::pnorm::ExponentPair;
use crate::solver::{SolveConfig, Sweep};
use crate::vec2::Vec2;

pub const MIN_RESOLUTION: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    Disk { radius: f64, center: Vec2 },
    Square { side: f64 },
    Lshape { size: f64, cut: f64 },
    Polygon { vertices: Vec<Vec2> },
    Superellipse { exponent: f64, semi_x: f64, semi_y: f64 },
    Stadium { half_length: f64, radius: f64 },
}

impl ShapeSpec {
    pub fn build(&self) -> Result<Domain> {
        match self {
            ShapeSpec::Disk { radius, center } => shapes::disk(*center, *radius),
            ShapeSpec::Square { side } => shapes::square(*side),
            ShapeSpec::Lshape { size, cut } => shapes::lshape(*size, *cut),
            ShapeSpec::Polygon { vertices } => shapes::polygon(vertices),
            ShapeSpec::Superellipse { exponent, semi_x, semi_y } => shapes::superellipse(*exponent, *semi_x, *semi_y),
            ShapeSpec::Stadium { half_length, radius } => shapes::stadium(*half_length, *radius),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Complementarity,
    GradientConstraint,
    RidgeElastic,
    SegmentPlastic,
    FbNondegeneracy,
    DeltaContinuity,
    CornerElastic,
    ReentrantFan,
    PlasticComponents,
}

impl CheckName {
    pub const ALL: [CheckName; 9] = [
        CheckName::Complementarity,
        CheckName::GradientConstraint,
        CheckName::RidgeElastic,
        CheckName::SegmentPlastic,
        CheckName::FbNondegeneracy,
        CheckName::DeltaContinuity,
        CheckName::CornerElastic,
        CheckName::ReentrantFan,
        CheckName::PlasticComponents,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Complementarity => "complementarity",
            CheckName::GradientConstraint => "gradient_constraint",
            CheckName::RidgeElastic => "ridge_elastic",
            CheckName::SegmentPlastic => "segment_plastic",
            CheckName::FbNondegeneracy => "fb_nondegeneracy",
            CheckName::DeltaContinuity => "delta_continuity",
            CheckName::CornerElastic => "corner_elastic",
            CheckName::ReentrantFan => "reentrant_fan",
            CheckName::PlasticComponents => "plastic_components",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown check '{s}'")))
    }
}

/// Parse a comma-separated check list; `all` selects every check.
pub fn parse_checks(s: &str) -> Result<Vec<CheckName>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if item == "all" {
            out.extend(CheckName::ALL);
        } else {
            out.push(CheckName::parse(item)?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub shape: ShapeSpec,
    pub p: f64,
    pub eta: f64,
    /// Nodes per unit length.
    pub resolution: usize,
    pub checks: Vec<CheckName>,
    /// Not echoed into reports, so they do not depend on where they land.
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub svg: bool,
    pub omega: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub contact_tol: Option<f64>,
    pub sweep: Sweep,
    /// Free-boundary samples per arc.
    pub samples_per_arc: usize,
    /// Plastic nodes sampled by the segment check.
    pub segment_samples: usize,
}

impl RunConfig {
    pub fn new(shape: ShapeSpec, p: f64, eta: f64, resolution: usize) -> Self {
        RunConfig {
            shape,
            p,
            eta,
            resolution,
            checks: CheckName::ALL.to_vec(),
            out_dir: PathBuf::from("out"),
            svg: true,
            omega: None,
            tol: None,
            max_iters: None,
            contact_tol: None,
            sweep: Sweep::Lexicographic,
            samples_per_arc: 512,
            segment_samples: 500,
        }
    }

    pub fn exponent(&self) -> Result<ExponentPair> {
        ExponentPair::new(self.p).map_err(|_| Error::Config(format!("p must be a finite number >= 2, got {}", self.p)))
    }

    pub fn h(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn solve_config(&self) -> Result<SolveConfig> {
        let mut c = SolveConfig::new(self.eta, self.h())?;
        if let Some(w) = self.omega {
            c.omega = w;
        }
        if let Some(t) = self.tol {
            c.tol = t;
        }
        if let Some(m) = self.max_iters {
            c.max_iters = m;
        }
        if let Some(t) = self.contact_tol {
            c.contact_tol = t;
        }
        c.sweep = self.sweep;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.exponent()?;
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::Config(format!("resolution must be at least {MIN_RESOLUTION}, got {}", self.resolution)));
        }
        if self.samples_per_arc < 2 {
            return Err(Error::Config("samples_per_arc must be at least 2".into()));
        }
        self.solve_config()?;
        self.shape.build().map_err(|e| Error::Config(format!("invalid shape: {e}")))?;
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", n + 1)))?;
            let k = k.trim().to_string();
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", n + 1)));
            }
        }
        let mut kv = Keys(kv);
        let shape = parse_shape(&mut kv)?;
        let p = kv.num("p")?.unwrap_or(2.0);
        let eta = kv.num("eta")?.ok_or_else(|| Error::Config("missing key 'eta'".into()))?;
        let resolution = kv.int("resolution")?.ok_or_else(|| Error::Config("missing key 'resolution'".into()))?;
        let mut cfg = RunConfig::new(shape, p, eta, resolution);
        if let Some(c) = kv.take("checks") {
            cfg.checks = parse_checks(&c)?;
        }
        if let Some(d) = kv.take("out_dir") {
            cfg.out_dir = PathBuf::from(d);
        }
        if let Some(s) = kv.take("svg") {
            cfg.svg = parse_switch(&s)?;
        }
        cfg.omega = kv.num("omega")?;
        cfg.tol = kv.num("tol")?;
        cfg.max_iters = kv.int("max_iters")?;
        cfg.contact_tol = kv.num("contact_tol")?;
        if let Some(s) = kv.take("sweep") {
            cfg.sweep = match s.as_str() {
                "lexicographic" => Sweep::Lexicographic,
                "red_black" => Sweep::RedBlack,
                other => return Err(Error::Config(format!("unknown sweep '{other}'"))),
            };
        }
        if let Some(n) = kv.int("samples_per_arc")? {
            cfg.samples_per_arc = n;
        }
        if let Some(n) = kv.int("segment_samples")? {
            cfg.segment_samples = n;
        }
        if let Some(k) = kv.0.keys().next() {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_switch(s: &str) -> Result<bool> {
    match s {
        "on" | "true" | "yes" => Ok(true),
        "off" | "false" | "no" => Ok(false),
        _ => Err(Error::Config(format!("expected on/off, got '{s}'"))),
    }
}

struct Keys(BTreeMap<String, String>);

impl Keys {
    fn take(&mut self, k: &str) -> Option<String> {
        self.0.remove(k)
    }

    fn num(&mut self, k: &str) -> Result<Option<f64>> {
        self.take(k)
            .map(|v| v.parse::<f64>().map_err(|_| Error::Config(format!("'{k}': not a number: '{v}'"))))
            .transpose()
    }

    fn int(&mut self, k: &str) -> Result<Option<usize>> {
        self.take(k)
            .map(|v| v.parse::<usize>().map_err(|_| Error::Config(format!("'{k}': not a non-negative integer: '{v}'"))))
            .transpose()
    }

    fn req(&mut self, k: &str) -> Result<f64> {
        self.num(k)?.ok_or_else(|| Error::Config(format!("missing key '{k}'")))
    }
}

fn parse_shape(kv: &mut Keys) -> Result<ShapeSpec> {
    let kind = kv.take("shape").ok_or_else(|| Error::Config("missing key 'shape'".into()))?;
    Ok(match kind.as_str() {
        "disk" => ShapeSpec::Disk {
            radius: kv.req("shape.radius")?,
            center: Vec2::new(kv.num("shape.center_x")?.unwrap_or(0.0), kv.num("shape.center_y")?.unwrap_or(0.0)),
        },
        "square" => ShapeSpec::Square { side: kv.req("shape.side")? },
        "lshape" => ShapeSpec::Lshape { size: kv.req("shape.size")?, cut: kv.req("shape.cut")? },
        "polygon" => {
            let v = kv.take("shape.vertices").ok_or_else(|| Error::Config("missing key 'shape.vertices'".into()))?;
            ShapeSpec::Polygon { vertices: parse_vertices(&v)? }
        }
        "superellipse" => ShapeSpec::Superellipse {
            exponent: kv.req("shape.exponent")?,
            semi_x: kv.req("shape.semi_x")?,
            semi_y: kv.req("shape.semi_y")?,
        },
        "stadium" => ShapeSpec::Stadium { half_length: kv.req("shape.half_length")?, radius: kv.req("shape.radius")? },
        other => return Err(Error::Config(format!("unknown shape '{other}'"))),
    })
}

/// `x y; x y; ...`
fn parse_vertices(s: &str) -> Result<Vec<Vec2>> {
    s.split(';')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|pair| {
            let nums: Vec<f64> = pair
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Config(format!("bad vertex '{pair}'"))))
                .collect::<Result<_>>()?;
            match nums[..] {
                [x, y] => Ok(Vec2::new(x, y)),
                _ => Err(Error::Config(format!("bad vertex '{pair}'"))),
            }
        })
        .collect()
}

/// Human-readable warnings about degenerate boundary points and reentrant
/// corners.
pub fn validate(config: &RunConfig) -> Result<Vec<String>> {
    let e = config.exponent()?;
    let domain = config.shape.build()?;
    Ok(domain_warnings(&domain, e))
}

/// Point for messages: six decimals, no negative zero.
fn pt(v: Vec2) -> String {
    let r = |x: f64| (x * 1e6).round() / 1e6 + 0.0;
    format!("({}, {})", r(v.x), r(v.y))
}

pub fn domain_warnings(domain: &Domain, e: ExponentPair) -> Vec<String> {
    let mut out = Vec::new();
    for r in validate_degenerate_points(domain, e) {
        if r.assumption == AssumptionStatus::ViolatedUnknown {
            out.push(format!(
                "degenerate point at {} on arc {}: curvature extension not established; p-ridge behaviour near it is unknown",
                pt(r.point),
                r.arc
            ));
        } else if r.assumption == AssumptionStatus::A1HoldsProxy && r.consistent && r.c_prime_0 >= 1.0 {
            out.push(format!(
                "degenerate point at {} on arc {}: extended curvature c'(0) = {:.6} >= 1",
                pt(r.point),
                r.arc,
                r.c_prime_0
            ));
        }
    }
    for c in domain.corners() {
        if c.kind == CornerKind::StrictReentrant {
            let (m1, m2) = corner_fan_rays(c, domain, e);
            out.push(format!(
                "strict reentrant corner at {}: inward p-normal rays {} and {}; free-boundary regularity along these rays is not established",
                pt(c.vertex),
                pt(m1),
                pt(m2)
            ));
        } else if c.kind == CornerKind::Reentrant {
            out.push(format!(
                "reentrant corner at {}: free-boundary regularity along its p-normal ray is not established",
                pt(c.vertex)
            ));
        }
    }
    out
}
