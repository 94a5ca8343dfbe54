//! Shared numerical building blocks: grids, banded solves, quadrature.

pub mod banded;
pub mod grid;
pub mod quadrature;
pub mod sbp;

pub use banded::{solve_banded, BandedComplexSystem, BandedSystem, Scalar};
pub use grid::{ComplexGridFunction, Grid, GridFunction, RealGridFunction};
pub use quadrature::{adaptive_simpson, adaptive_simpson_vec, Quadrature, QuadratureSpec, VecQuadrature};
pub use sbp::{sbp_identity_residual, sbp_identity_scale};
