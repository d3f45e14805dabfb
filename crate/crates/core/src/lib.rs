//! Elastic–plastic torsion with p-norm gradient constraints.
//!
//! The crate computes p-distance fields to a piecewise-smooth boundary, solves
//! the equivalent obstacle problem with projected SOR, and extracts and checks
//! the plastic set, its free boundary and the p-ridge.

// `!(x > 0.0)` rejects NaN along with nonpositive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod boundary;
pub mod config;
pub mod distance;
pub mod error;
pub mod grid;
pub mod plastic;
pub mod pnorm;
pub mod report;
pub mod solver;
pub mod svg;
pub mod vec2;

pub use config::{RunConfig, ShapeSpec};
pub use error::{Error, Result};
pub use pnorm::ExponentPair;
pub use report::{run, RunReport, RunStatus};
pub use vec2::Vec2;
