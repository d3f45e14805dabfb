use thiserror::Error;

use crate::vec2::Vec2;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponent p must be a finite real >= 2, got {0}")]
    InvalidExponent(f64),

    #[error("invalid line: coefficients a and b are both zero")]
    DegenerateLine,

    #[error("angle sides are parallel or degenerate; no bisector exists")]
    DegenerateAngle,

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("p-curvature undefined at arc {arc}, t = {t}: tangent is parallel to a coordinate axis")]
    UndefinedCurvature { arc: usize, t: f64 },

    #[error("point ({}, {}) is not strictly inside the domain", .0.x, .0.y)]
    OutsideDomain(Vec2),

    #[error("d_p is not differentiable at ({}, {}): {multiplicity} closest boundary points", .point.x, .point.y)]
    NotDifferentiable { point: Vec2, multiplicity: usize },

    #[error("Laplacian of d_p is singular at ({}, {}): 1 - kappa_p d_p = {denominator:e}", .point.x, .point.y)]
    SingularLaplacian { point: Vec2, denominator: f64 },

    #[error("difference stencil leaves the domain")]
    StencilOutsideDomain,

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("projected SOR did not converge in {iterations} iterations (last max update {last_update:e})")]
    IterationLimit { iterations: usize, last_update: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
