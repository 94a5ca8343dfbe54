//! Stationary scattering states of the 1D Schrödinger equation on a
//! uniform grid.
//!
//! Interior rows use the fourth-order compact scheme
//! `(λ − c_{j−1})ψ_{j−1} − (2λ + 10c_j)ψ_j + (λ − c_{j+1})ψ_{j+1} = 0`
//! with `λ = 12/Δx²` and `c_j = (V_j − E)/(ħ²/2m*)`. The two boundary rows
//! come from one of the transparent boundary closures in [`boundary`].

pub mod boundary;
mod context;
pub mod dispersion;
mod solve;

pub use boundary::{BoundaryClosure, BoundaryRow, C4tbcCoefficients, GhostRelation, TbcKind, TbcScheme};
pub use context::{Interface, SchrodingerContext};
pub use dispersion::{discrete_wavenumber, dispersion_roots};
pub use solve::{
    assemble_closed, assemble_interior, interior_row, solve_right_incidence, solve_scattering, Incidence,
    ScatteringState,
};
