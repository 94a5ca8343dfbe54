//! Transparent boundary closures.
//!
//! Each closure is expressed through the first ghost value on each side:
//! substituting the ghost relation into the interior row at `j = 0` (and
//! `j = N_x`) yields the boundary row of the closed `(N_x+1)`-dimensional
//! system.
//!
//! * **C4TBC** eliminates the ghost through the fourth-order first-derivative
//!   closure `(ψ_x)_0 = [1/2Δx − Δx c_1/12]ψ_1 − [1/2Δx − Δx c_0/12]ψ_{−1}`
//!   plugged into the Robin condition `ψ' + ik₁ψ = 2ik₁`.
//! * **D4TBC** uses the exterior discrete plane waves: `ψ_{−1} − αψ_0 = α⁻¹ − α`,
//!   `ψ_{N+1} − βψ_N = 0` with `α`, `β` the `+` dispersion roots.
//! * **aDTBC** uses the exact exterior solution: `ψ_{−j} − e^{ik₁jΔx}ψ_0 +
//!   2i sin(k₁jΔx) = 0`, `ψ_{N+j} − e^{ik₂jΔx}ψ_N = 0`, `j = 1..=L`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::context::SchrodingerContext;
use super::dispersion::dispersion_roots;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TbcKind {
    C4tbc,
    D4tbc,
    Adtbc,
}

impl TbcKind {
    pub const ALL: [TbcKind; 3] = [TbcKind::C4tbc, TbcKind::D4tbc, TbcKind::Adtbc];

    pub fn as_str(&self) -> &'static str {
        match self {
            TbcKind::C4tbc => "c4tbc",
            TbcKind::D4tbc => "d4tbc",
            TbcKind::Adtbc => "adtbc",
        }
    }

    /// Name of the coupled Schrödinger-Poisson system built on this closure.
    pub fn coupled_name(&self) -> &'static str {
        match self {
            TbcKind::C4tbc => "C4SP",
            TbcKind::D4tbc => "DSP1",
            TbcKind::Adtbc => "DSP2",
        }
    }
}

impl fmt::Display for TbcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TbcKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c4tbc" => Ok(TbcKind::C4tbc),
            "d4tbc" | "dsp1" => Ok(TbcKind::D4tbc),
            "adtbc" | "dsp2" => Ok(TbcKind::Adtbc),
            other => Err(Error::validation("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

/// Coefficients of `a₀ψ₀ + b₁ψ₁ = d₀` and `b_{N−1}ψ_{N−1} + a_Nψ_N = 0`
/// (scaled by ħ²/2m* relative to the interior rows).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C4tbcCoefficients {
    pub a0: Complex64,
    pub b1: Complex64,
    pub d0: Complex64,
    pub b_nm1: Complex64,
    pub a_n: Complex64,
}

impl C4tbcCoefficients {
    /// Direct evaluation of the coefficient formulas. `v` holds
    /// `(V_0, V_1, V_{N−1}, V_N)`.
    pub fn compute(t: f64, dx: f64, energy: f64, v: [f64; 4], k_left: Complex64, k_right: Complex64) -> Result<Self> {
        let [v0, v1, vnm1, vn] = v;
        let i = Complex64::i();
        let den_left = t + 2.0 * (energy - v0);
        let den_right = t + 2.0 * (energy - vn);
        if den_left == 0.0 || den_right == 0.0 {
            return Err(Error::DegenerateDenominator);
        }
        let ratio_left = (t + energy - v0) / den_left;
        let ratio_right = (t + energy - vn) / den_right;
        Ok(C4tbcCoefficients {
            a0: -2.0 * t + 10.0 * (energy - v0) + 2.0 * i * k_left * t * dx * ratio_left,
            b1: Complex64::from(t + energy - v1 + (t + 2.0 * (energy - v1)) * ratio_left),
            d0: 4.0 * i * k_left * t * dx * ratio_left,
            b_nm1: Complex64::from(t + energy - vnm1 + (t + 2.0 * (energy - vnm1)) * ratio_right),
            a_n: -2.0 * t + 10.0 * (energy - vn) + 2.0 * i * k_right * t * dx * ratio_right,
        })
    }
}

/// A boundary row `boundary·ψ_b + neighbor·ψ_nb = rhs`, in the scaling of
/// the interior rows (`λ`-form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRow {
    pub boundary: Complex64,
    pub neighbor: Complex64,
    pub rhs: Complex64,
}

/// `ψ_ghost = boundary·ψ_b + neighbor·ψ_nb + offset` for the first ghost node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostRelation {
    pub boundary: Complex64,
    pub neighbor: Complex64,
    pub offset: Complex64,
}

/// The two boundary rows plus the relations that recover the first ghost
/// value on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryClosure {
    pub left_row: BoundaryRow,
    pub right_row: BoundaryRow,
    pub left_ghost: GhostRelation,
    pub right_ghost: GhostRelation,
}

/// A boundary closure with its energy-dependent data evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TbcScheme {
    C4tbc(C4tbcCoefficients),
    /// `alpha`, `beta`: `+` dispersion roots at the left/right band edges.
    D4tbc { alpha: Complex64, beta: Complex64 },
    /// Exact lead wavenumbers.
    Adtbc { k_left: Complex64, k_right: Complex64, dx: f64 },
}

impl TbcScheme {
    /// Evaluates the closure data for a left-incidence solve at `ctx`.
    pub fn new(kind: TbcKind, ctx: &SchrodingerContext) -> Result<Self> {
        let e = ctx.energy();
        let (v0, vn) = (ctx.left_potential(), ctx.right_potential());
        if e < v0 {
            return Err(Error::NotPropagating {
                energy: e,
                band_edge: v0,
            });
        }
        let dx = ctx.grid().dx();
        match kind {
            TbcKind::C4tbc => {
                let n = ctx.grid().nx() as isize;
                let v = [ctx.potential(0), ctx.potential(1), ctx.potential(n - 1), ctx.potential(n)];
                C4tbcCoefficients::compute(ctx.t(), dx, e, v, ctx.k_left(), ctx.k_right()).map(TbcScheme::C4tbc)
            }
            TbcKind::D4tbc => {
                ctx.check_precondition()?;
                let (alpha, _) = dispersion_roots(e, v0, ctx.kinetic(), dx)?;
                let (beta, _) = dispersion_roots(e, vn, ctx.kinetic(), dx)?;
                Ok(TbcScheme::D4tbc { alpha, beta })
            }
            TbcKind::Adtbc => {
                ctx.check_precondition()?;
                Ok(TbcScheme::Adtbc {
                    k_left: ctx.k_left(),
                    k_right: ctx.k_right(),
                    dx,
                })
            }
        }
    }

    pub fn kind(&self) -> TbcKind {
        match self {
            TbcScheme::C4tbc(_) => TbcKind::C4tbc,
            TbcScheme::D4tbc { .. } => TbcKind::D4tbc,
            TbcScheme::Adtbc { .. } => TbcKind::Adtbc,
        }
    }

    /// Exterior plane-wave factors `(a, b)` with `ψ_{−j} = (ψ_0 − 1)a^j + a^{−j}`
    /// and `ψ_{N+j} = b^j ψ_N`; `None` for C4TBC, which has no exterior
    /// discrete wave.
    pub fn exterior_factors(&self) -> Option<(Complex64, Complex64)> {
        match *self {
            TbcScheme::C4tbc(_) => None,
            TbcScheme::D4tbc { alpha, beta } => Some((alpha, beta)),
            TbcScheme::Adtbc { k_left, k_right, dx } => {
                let i = Complex64::i();
                Some(((i * k_left * dx).exp(), (i * k_right * dx).exp()))
            }
        }
    }

    /// Boundary rows and first-ghost relations for `ctx`.
    pub fn closure(&self, ctx: &SchrodingerContext) -> BoundaryClosure {
        let n = ctx.grid().nx() as isize;
        let lambda = ctx.lambda();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);

        let (left_ghost, right_ghost) = match *self {
            TbcScheme::C4tbc(_) => {
                let t = ctx.t();
                let dx = ctx.grid().dx();
                let e = ctx.energy();
                let i = Complex64::i();
                let den_l = t + 2.0 * (e - ctx.potential(0));
                let den_r = t + 2.0 * (e - ctx.potential(n));
                let kl = ctx.k_left();
                let kr = ctx.k_right();
                (
                    GhostRelation {
                        boundary: 2.0 * dx * t * i * kl / den_l,
                        neighbor: Complex64::from((t + 2.0 * (e - ctx.potential(1))) / den_l),
                        offset: -4.0 * dx * t * i * kl / den_l,
                    },
                    GhostRelation {
                        boundary: 2.0 * dx * t * i * kr / den_r,
                        neighbor: Complex64::from((t + 2.0 * (e - ctx.potential(n - 1))) / den_r),
                        offset: zero,
                    },
                )
            }
            _ => {
                let (a, b) = self.exterior_factors().expect("discrete exterior wave");
                (
                    GhostRelation {
                        boundary: a,
                        neighbor: zero,
                        offset: one / a - a,
                    },
                    GhostRelation {
                        boundary: b,
                        neighbor: zero,
                        offset: zero,
                    },
                )
            }
        };

        // interior row at j = 0 with V_{−1} = V_0, ghost substituted
        let c0 = ctx.c(0);
        let ghost_w = Complex64::from(lambda - c0);
        let left_row = BoundaryRow {
            boundary: -(2.0 * lambda + 10.0 * c0) + ghost_w * left_ghost.boundary,
            neighbor: (lambda - ctx.c(1)) + ghost_w * left_ghost.neighbor,
            rhs: -ghost_w * left_ghost.offset,
        };
        let cn = ctx.c(n);
        let ghost_w = Complex64::from(lambda - cn);
        let right_row = BoundaryRow {
            boundary: -(2.0 * lambda + 10.0 * cn) + ghost_w * right_ghost.boundary,
            neighbor: (lambda - ctx.c(n - 1)) + ghost_w * right_ghost.neighbor,
            rhs: -ghost_w * right_ghost.offset,
        };

        BoundaryClosure {
            left_row,
            right_row,
            left_ghost,
            right_ghost,
        }
    }
}

/// Exact-exterior ghost relations for `j = 1..=order` on each side, as
/// `(coefficient, offset)` pairs: `ψ_{−j} = coef·ψ_0 + offset` and
/// `ψ_{N+j} = coef·ψ_N + offset`.
pub fn adtbc_relations(ctx: &SchrodingerContext, order: usize) -> (Vec<(Complex64, Complex64)>, Vec<(Complex64, Complex64)>) {
    let i = Complex64::i();
    let dx = ctx.grid().dx();
    let kl = ctx.k_left();
    let kr = ctx.k_right();
    let left = (1..=order)
        .map(|j| {
            let phase = j as f64 * dx * kl;
            ((i * phase).exp(), -2.0 * i * phase.sin())
        })
        .collect();
    let right = (1..=order)
        .map(|j| ((i * kr * (j as f64 * dx)).exp(), Complex64::new(0.0, 0.0)))
        .collect();
    (left, right)
}
