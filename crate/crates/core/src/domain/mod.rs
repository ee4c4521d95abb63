//! Planar domains: boundary curves, collars, lattice grids, and sampled fields.

mod collar;
mod curve;
mod field;
mod grid;

pub use collar::FermiCollar;
pub use curve::{build_boundary, offset_curvature, shrunk_domain, BoundaryCurve, CurveJet, CurveKind};
pub use field::{BoundaryData, ScalarField};
pub use grid::{
    build_grid, Arm, ArmEnd, BoundaryPoint, Grid, GridNode, Stencil, ARM_DIRECTIONS, COLLAPSE_FRACTION, UX, UXX, UXY,
    UY, UYY,
};
