//! Roots of the compact scheme's discrete dispersion relation.
//!
//! Substituting `ψ_j = α^j` into the interior scheme with a constant
//! potential `V_b` gives a quadratic in `α` whose roots are
//!
//! ```text
//! α± = [t − 5d ± i√(12 d (t − 2d))] / (t + d),   d = E − V_b.
//! ```
//!
//! For `0 ≤ d < t/2` both roots are unimodular, `α± = e^{±i k̃ Δx}`, with the
//! discrete dispersion relation `d = t(1 − cos k̃Δx)/(5 + cos k̃Δx)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `(α₊, α₋)` for energy `energy` over a flat potential `band_edge`.
///
/// Below the band edge (`d < 0`) the principal square root makes `α₊` the
/// real root of modulus below one, i.e. the wave that decays away from the
/// device, which is the analytic continuation of `e^{i k̃ Δx}`.
pub fn dispersion_roots(energy: f64, band_edge: f64, kinetic: f64, dx: f64) -> Result<(Complex64, Complex64)> {
    let t = kinetic * 12.0 / (dx * dx);
    let d = energy - band_edge;
    if !(t > 2.0 * d) {
        return Err(Error::PreconditionViolated { t, limit: 2.0 * d });
    }
    if !(t + d > 0.0) {
        return Err(Error::PreconditionViolated { t, limit: -d });
    }
    let root = Complex64::new(12.0 * d * (t - 2.0 * d), 0.0).sqrt();
    let i = Complex64::i();
    let plus = (t - 5.0 * d + i * root) / (t + d);
    let minus = (t - 5.0 * d - i * root) / (t + d);
    Ok((plus, minus))
}

/// `k̃ = arg(α)/Δx`.
pub fn discrete_wavenumber(alpha: Complex64, dx: f64) -> f64 {
    alpha.arg() / dx
}
