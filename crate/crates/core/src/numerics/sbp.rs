//! Discrete summation-by-parts identity for the operators
//! `δ_x v_{i-1/2} = (v_i − v_{i-1})/Δx`, `δ_x² v_i`, `D₊`, `D₋`:
//!
//! ```text
//! −Δx Σ_{i=0}^{N} (δ_x² u_i) v_i
//!     = Δx Σ_{i=0}^{N+1} (δ_x u_{i−½})(δ_x v_{i−½}) + (D₊u_{−1}) v_{−1} − (D₋u_{N+1}) v_{N+1}
//! ```
//!
//! The uniqueness argument for the discrete boundary conditions rests on
//! it; here it only serves as a test oracle.

use num_complex::Complex64;

use super::grid::ComplexGridFunction;

struct Terms {
    lhs: Complex64,
    rhs: Complex64,
    scale: f64,
}

fn terms(u: &ComplexGridFunction, v: &ComplexGridFunction) -> Terms {
    let grid = u.grid();
    assert_eq!(grid, v.grid(), "grid functions live on different grids");
    let n = grid.nx() as isize;
    let dx = grid.dx();

    let second = |i: isize| (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx);
    let half_u = |i: isize| (u[i] - u[i - 1]) / dx;
    let half_v = |i: isize| (v[i] - v[i - 1]) / dx;

    let mut lhs = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for i in 0..=n {
        let t = second(i) * v[i];
        lhs -= dx * t;
        scale += dx * t.norm();
    }

    let mut rhs = Complex64::new(0.0, 0.0);
    for i in 0..=n + 1 {
        let t = half_u(i) * half_v(i);
        rhs += dx * t;
        scale += dx * t.norm();
    }
    let d_plus = (u[0] - u[-1]) / dx;
    let d_minus = (u[n + 1] - u[n]) / dx;
    rhs += d_plus * v[-1] - d_minus * v[n + 1];
    scale += (d_plus * v[-1]).norm() + (d_minus * v[n + 1]).norm();

    Terms { lhs, rhs, scale }
}

/// `|LHS − RHS|` of the summation-by-parts identity; both functions must
/// carry at least one ghost node per side.
pub fn sbp_identity_residual(u: &ComplexGridFunction, v: &ComplexGridFunction) -> f64 {
    let t = terms(u, v);
    (t.lhs - t.rhs).norm()
}

/// Sum of the magnitudes of all terms entering the identity, the natural
/// scale for judging [`sbp_identity_residual`].
pub fn sbp_identity_scale(u: &ComplexGridFunction, v: &ComplexGridFunction) -> f64 {
    terms(u, v).scale
}
