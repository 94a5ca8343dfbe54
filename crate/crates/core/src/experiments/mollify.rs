use rayon::prelude::*;

use crate::error::Result;
use crate::numerics::{adaptive_simpson, Grid, QuadratureSpec};

/// A bounded profile on `[0, L]`, extended constantly outside.
pub trait Profile: Sync {
    fn value(&self, x: f64) -> f64;
    /// Points where the profile or its slope may jump.
    fn breakpoints(&self) -> Vec<f64>;
}

/// `φ(x) = 5e^{5x}/(1 + e^{5x})²`, the derivative of the logistic `σ(5x)`.
pub fn kernel(x: f64) -> f64 {
    let e = (-5.0 * x.abs()).exp();
    5.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Half-width beyond which `φ < 1e-14`.
pub fn kernel_radius() -> f64 {
    (5e14f64).ln() / 5.0
}

const RELATIVE_TOLERANCE: f64 = 1e-13;

/// `(profile ∗ φ)(x_i)` at the physical nodes, by adaptive Simpson over
/// `|s| ≤ R` split wherever `x − s` crosses a breakpoint.
pub fn mollify(profile: &dyn Profile, grid: &Grid) -> Result<Vec<f64>> {
    let r = kernel_radius();
    let breaks = profile.breakpoints();
    let scale = breaks
        .iter()
        .chain(grid.nodes().iter())
        .map(|&x| profile.value(x).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    grid.nodes()
        .into_par_iter()
        .map(|x| {
            let mut cuts: Vec<f64> = breaks.iter().map(|b| x - b).filter(|s| s.abs() < r).collect();
            cuts.extend([-r, r]);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let tol = RELATIVE_TOLERANCE * scale / (cuts.len() - 1) as f64;
            let mut total = 0.0;
            for w in cuts.windows(2) {
                if w[1] - w[0] <= 0.0 {
                    continue;
                }
                // endpoints sit on breakpoints; sample the one-sided limit
                let inset = 1e-6 * (w[1] - w[0]);
                let f = |s: f64| profile.value(x - s.clamp(w[0] + inset, w[1] - inset)) * kernel(s);
                let q = adaptive_simpson(f, &QuadratureSpec::new(w[0], w[1], tol).with_panels(4))?;
                total += q.value;
            }
            Ok(total)
        })
        .collect()
}
