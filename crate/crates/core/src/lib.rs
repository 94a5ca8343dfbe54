//! One-dimensional quantum device simulation.
//!
//! The stationary Schrödinger equation is discretized with a fourth-order
//! compact scheme and closed with one of three transparent boundary
//! conditions:
//!
//! * [`TbcKind::C4tbc`]: direct compact discretization of the Robin-type
//!   boundary condition,
//! * [`TbcKind::D4tbc`]: discrete boundary condition built from the roots of
//!   the scheme's own dispersion relation,
//! * [`TbcKind::Adtbc`]: exact ghost-point relations from the analytic
//!   exterior solution.
//!
//! The scattering states feed an electron-density quadrature which is
//! coupled to a compact Neumann Poisson solve through a Gummel-predicted
//! Newton iteration ([`selfconsistent::run_self_consistent`]).
//!
//! Units: lengths in nm, energies and potentials in eV, densities in nm⁻³
//! internally (cm⁻³ at the file boundary), current density in A·cm⁻².

pub mod cli;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod poisson;
pub mod schrodinger;
pub mod selfconsistent;
pub mod statistics;
pub mod units;

pub use error::{Error, Result};
pub use experiments::{DeviceSpec, Preset};
pub use numerics::{Grid, GridFunction};
pub use schrodinger::{ScatteringState, SchrodingerContext, TbcKind, TbcScheme};
pub use selfconsistent::{SelfConsistentConfig, SelfConsistentResult};
pub use units::Material;

pub use num_complex::Complex64;
