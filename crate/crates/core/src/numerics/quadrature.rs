//! Adaptive Simpson quadrature with the Lyness error estimate
//! `|S(left) + S(right) − S(whole)| / 15` and tolerance halving per level.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub lower: f64,
    pub upper: f64,
    /// Absolute tolerance for the whole interval.
    pub tolerance: f64,
    pub max_depth: usize,
    /// Uniform panels the interval is cut into before adaptive refinement
    /// starts. Narrow features (resonances) narrower than a panel can be
    /// missed by the five-point test, so callers with sharp integrands use
    /// several hundred.
    pub panels: usize,
}

impl QuadratureSpec {
    pub const DEFAULT_DEPTH: usize = 50;

    pub fn new(lower: f64, upper: f64, tolerance: f64) -> Self {
        QuadratureSpec {
            lower,
            upper,
            tolerance,
            max_depth: Self::DEFAULT_DEPTH,
            panels: 1,
        }
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels;
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::validation("quadrature.tolerance", "must be positive"));
        }
        if self.max_depth == 0 {
            return Err(Error::validation("quadrature.max_depth", "must be at least 1"));
        }
        if self.panels == 0 {
            return Err(Error::validation("quadrature.panels", "must be at least 1"));
        }
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(Error::validation(
                "quadrature.interval",
                format!("need finite lower < upper, got [{}, {}]", self.lower, self.upper),
            ));
        }
        Ok(())
    }

    fn panel_bounds(&self) -> Vec<(f64, f64)> {
        let h = (self.upper - self.lower) / self.panels as f64;
        (0..self.panels)
            .map(|p| {
                let a = self.lower + p as f64 * h;
                let b = if p + 1 == self.panels {
                    self.upper
                } else {
                    self.lower + (p + 1) as f64 * h
                };
                (a, b)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Set when some subinterval stopped refining at the depth limit.
    pub depth_exceeded: bool,
    pub evaluations: usize,
}

impl Quadrature {
    /// The estimate, or [`Error::DepthExceeded`] if the depth limit was hit.
    pub fn strict(self) -> Result<f64> {
        if self.depth_exceeded {
            Err(Error::DepthExceeded {
                estimate: self.value,
            })
        } else {
            Ok(self.value)
        }
    }
}

/// Adaptive Simpson integration of a scalar function.
pub fn adaptive_simpson<F>(f: F, spec: &QuadratureSpec) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    let panel_tol = spec.tolerance / spec.panels as f64;
    let mut out = Quadrature {
        value: 0.0,
        depth_exceeded: false,
        evaluations: 0,
    };
    for (a, b) in spec.panel_bounds() {
        let fa = f(a);
        let fb = f(b);
        let m = 0.5 * (a + b);
        let fm = f(m);
        out.evaluations += 3;
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        out.value += refine(&f, a, b, fa, fm, fb, whole, panel_tol, spec.max_depth, &mut out);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    stats: &mut Quadrature,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    stats.evaluations += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth <= 1 {
        stats.depth_exceeded = true;
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, stats)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, stats)
}

/// Result of [`adaptive_simpson_vec`].
#[derive(Debug, Clone, PartialEq)]
pub struct VecQuadrature {
    pub values: Vec<f64>,
    pub depth_exceeded: bool,
    pub evaluations: usize,
}

/// Adaptive Simpson integration of a vector-valued function sharing one
/// refinement tree across all components; the local error test uses the
/// max-norm over components.
///
/// Every abscissa is evaluated once for all components, which is what
/// makes per-node density integrals share their scattering solves. The
/// initial panels run in parallel and are summed in panel order, so the
/// result does not depend on the thread count.
pub fn adaptive_simpson_vec<F, E>(f: F, spec: &QuadratureSpec) -> std::result::Result<VecQuadrature, E>
where
    F: Fn(f64) -> std::result::Result<Vec<f64>, E> + Sync,
    E: Send + From<Error>,
{
    spec.validate()?;
    let panel_tol = spec.tolerance / spec.panels as f64;
    let panels: Vec<std::result::Result<VecQuadrature, E>> = spec
        .panel_bounds()
        .into_par_iter()
        .map(|(a, b)| {
            let fa = f(a)?;
            let fb = f(b)?;
            let fm = f(0.5 * (a + b))?;
            let whole = simpson(b - a, &fa, &fm, &fb);
            let mut stats = (false, 3usize);
            let values = refine_vec(&f, a, b, &fa, &fm, &fb, whole, panel_tol, spec.max_depth, &mut stats)?;
            Ok(VecQuadrature {
                values,
                depth_exceeded: stats.0,
                evaluations: stats.1,
            })
        })
        .collect();

    let mut total: Option<VecQuadrature> = None;
    for panel in panels {
        let panel = panel?;
        match total.as_mut() {
            None => total = Some(panel),
            Some(t) => {
                if t.values.len() != panel.values.len() {
                    return Err(Error::InvalidSystem("integrand changed length between samples".into()).into());
                }
                for (acc, v) in t.values.iter_mut().zip(&panel.values) {
                    *acc += v;
                }
                t.depth_exceeded |= panel.depth_exceeded;
                t.evaluations += panel.evaluations;
            }
        }
    }
    Ok(total.expect("at least one panel"))
}

fn simpson(h: f64, fa: &[f64], fm: &[f64], fb: &[f64]) -> Vec<f64> {
    fa.iter()
        .zip(fm)
        .zip(fb)
        .map(|((a, m), b)| h / 6.0 * (a + 4.0 * m + b))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn refine_vec<F, E>(
    f: &F,
    a: f64,
    b: f64,
    fa: &[f64],
    fm: &[f64],
    fb: &[f64],
    whole: Vec<f64>,
    tol: f64,
    depth: usize,
    stats: &mut (bool, usize),
) -> std::result::Result<Vec<f64>, E>
where
    F: Fn(f64) -> std::result::Result<Vec<f64>, E>,
    E: From<Error>,
{
    let m = 0.5 * (a + b);
    let flm = f(0.5 * (a + m))?;
    let frm = f(0.5 * (m + b))?;
    stats.1 += 2;
    if flm.len() != fa.len() || frm.len() != fa.len() {
        return Err(Error::InvalidSystem("integrand changed length between samples".into()).into());
    }
    let left = simpson(m - a, fa, &flm, fm);
    let right = simpson(b - m, fm, &frm, fb);
    let err = left
        .iter()
        .zip(&right)
        .zip(&whole)
        .map(|((l, r), w)| (l + r - w).abs())
        .fold(0.0, f64::max);
    let converged = err <= 15.0 * tol;
    if converged || depth <= 1 {
        if !converged {
            stats.0 = true;
        }
        return Ok(left
            .iter()
            .zip(&right)
            .zip(&whole)
            .map(|((l, r), w)| {
                let s = l + r;
                s + (s - w) / 15.0
            })
            .collect());
    }
    let mut lo = refine_vec(f, a, m, fa, &flm, fm, left, 0.5 * tol, depth - 1, stats)?;
    let hi = refine_vec(f, m, b, fm, &frm, fb, right, 0.5 * tol, depth - 1, stats)?;
    for (x, y) in lo.iter_mut().zip(hi) {
        *x += y;
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cubic_is_exact() {
        let q = adaptive_simpson(|x| x * x, &QuadratureSpec::new(0.0, 1.0, 1e-12)).unwrap();
        assert!((q.value - 1.0 / 3.0).abs() < 1e-16);
        let q = adaptive_simpson(|x| 2.0 * x * x * x - x + 4.0, &QuadratureSpec::new(-3.0, 5.0, 1e-6)).unwrap();
        // ∫ = [x⁴/2 − x²/2 + 4x] = (312.5 − 12.5 + 20) − (40.5 − 4.5 − 12)
        assert!((q.value - 296.0).abs() < 1e-11);
        assert_eq!(q.evaluations, 5);
    }

    #[test]
    fn sine_to_tolerance() {
        let q = adaptive_simpson(f64::sin, &QuadratureSpec::new(0.0, PI, 1e-10)).unwrap();
        assert!((q.value - 2.0).abs() <= 1e-10);
        assert!(!q.depth_exceeded);
    }

    #[test]
    fn depth_limit_flags() {
        let spec = QuadratureSpec::new(0.0, 1.0, 1e-14).with_depth(2);
        let q = adaptive_simpson(|x: f64| x.sqrt(), &spec).unwrap();
        assert!(q.depth_exceeded);
        assert!(matches!(q.strict(), Err(Error::DepthExceeded { .. })));
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(adaptive_simpson(|x| x, &QuadratureSpec::new(1.0, 0.0, 1e-6)).is_err());
        assert!(adaptive_simpson(|x| x, &QuadratureSpec::new(0.0, 1.0, 0.0)).is_err());
        assert!(adaptive_simpson(|x| x, &QuadratureSpec::new(0.0, 1.0, 1e-6).with_depth(0)).is_err());
    }

    #[test]
    fn vector_matches_scalar_componentwise() {
        let spec = QuadratureSpec::new(0.0, 2.0, 1e-11).with_panels(4);
        let v = adaptive_simpson_vec(|x| Ok::<_, Error>(vec![x.exp(), (3.0 * x).cos(), 1.0]), &spec).unwrap();
        assert!((v.values[0] - (2f64.exp() - 1.0)).abs() < 1e-10);
        assert!((v.values[1] - (6f64).sin() / 3.0).abs() < 1e-10);
        assert!((v.values[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn vector_errors_propagate() {
        let spec = QuadratureSpec::new(0.0, 1.0, 1e-8);
        let r = adaptive_simpson_vec(
            |x| {
                if x > 0.7 {
                    Err(Error::DegenerateDenominator)
                } else {
                    Ok(vec![x])
                }
            },
            &spec,
        );
        assert!(matches!(r, Err(Error::DegenerateDenominator)));
    }
}
