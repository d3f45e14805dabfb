//! Boundary representation: parametric arcs, corners, and the built-in shapes.

pub mod arc;
pub mod curve;
pub mod degenerate;
pub mod domain;
pub mod shapes;

pub use arc::BoundaryArc;
pub use curve::{CircleArc, ParamCurve, PeriodicSpline, Reparametrized, Segment, Superellipse};
pub use degenerate::{validate_degenerate_points, AssumptionStatus, DegeneratePointReport, TangentAxis};
pub use domain::{CornerKind, CornerRecord, Domain, Location};
