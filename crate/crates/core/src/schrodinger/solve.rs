use num_complex::Complex64;
use serde::Serialize;

use super::boundary::{adtbc_relations, TbcKind, TbcScheme};
use super::context::SchrodingerContext;
use crate::error::Result;
use crate::numerics::{solve_banded, BandedComplexSystem, ComplexGridFunction, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Incidence {
    Left,
    Right,
}

/// A solved scattering state with unit incident amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringState {
    /// Wave function including reconstructed ghost values.
    pub psi: ComplexGridFunction,
    pub energy: f64,
    pub incidence: Incidence,
    /// Lead wavenumbers at `x = 0` and `x = L`.
    pub k_left: Complex64,
    pub k_right: Complex64,
    /// `r = ψ − 1` at the injecting boundary node.
    pub reflection: Complex64,
    /// `1 − |r|²` clamped to `[0, 1]`.
    pub transmission: f64,
    /// `1 − |r|²` before clamping.
    pub transmission_raw: f64,
    /// `‖Aψ − b‖∞` of the closed system.
    pub residual: f64,
}

/// Interior row `j` as coefficients of `(ψ_{j−1}, ψ_j, ψ_{j+1})`.
pub fn interior_row(ctx: &SchrodingerContext, j: isize) -> [Complex64; 3] {
    let lambda = ctx.lambda();
    let mut lo = lambda - ctx.c(j - 1);
    let mut mid = -(2.0 * lambda + 10.0 * ctx.c(j));
    let mut hi = lambda - ctx.c(j + 1);
    let dx = ctx.grid().dx();
    for f in ctx.interfaces() {
        let dc = f.jump() / ctx.kinetic();
        match f.node as isize - j {
            0 => {
                // cancels the jump in the third derivative and the kink
                // seen by the central first difference
                lo += 0.5 * dc;
                hi -= 0.5 * dc;
                mid += 0.25 * dx * dx * dc * dc;
            }
            // neighbours see the one-sided value at the interface node
            1 => hi += 0.5 * dc,
            -1 => lo -= 0.5 * dc,
            _ => {}
        }
    }
    [Complex64::from(lo), Complex64::from(mid), Complex64::from(hi)]
}

/// Tridiagonal system of dimension `N_x + 1` with rows `1..N_x−1` filled
/// and zero boundary rows.
pub fn assemble_interior(ctx: &SchrodingerContext) -> Result<BandedComplexSystem> {
    let n = ctx.grid().nx();
    let mut sys = BandedComplexSystem::tridiagonal(n + 1)?;
    for j in 1..n {
        let [lo, mid, hi] = interior_row(ctx, j as isize);
        sys.set_row(j, &[(j - 1, lo), (j, mid), (j + 1, hi)], Complex64::new(0.0, 0.0));
    }
    Ok(sys)
}

/// The complete left-incidence system: interior rows plus the closure's
/// boundary rows.
pub fn assemble_closed(ctx: &SchrodingerContext, scheme: &TbcScheme) -> Result<BandedComplexSystem> {
    let n = ctx.grid().nx();
    let mut sys = assemble_interior(ctx)?;
    let closure = scheme.closure(ctx);
    let l = closure.left_row;
    let r = closure.right_row;
    sys.set_row(0, &[(0, l.boundary), (1, l.neighbor)], l.rhs);
    sys.set_row(n, &[(n - 1, r.neighbor), (n, r.boundary)], r.rhs);
    Ok(sys)
}

/// Left-incidence scattering state: unit wave injected at `x = 0`.
pub fn solve_scattering(ctx: &SchrodingerContext, scheme: &TbcScheme) -> Result<ScatteringState> {
    let n = ctx.grid().nx();
    let sys = assemble_closed(ctx, scheme)?;
    let nodal = solve_banded(&sys)?;
    let residual = sys.residual_inf(&nodal);

    let grid = *ctx.grid();
    let ghosts = grid.ghosts() as isize;
    let ni = n as isize;
    let mut psi = GridFunction::filled(grid, Complex64::new(0.0, 0.0));
    psi.interior_mut().copy_from_slice(&nodal);

    let psi0 = nodal[0];
    let psin = nodal[n];
    match scheme.exterior_factors() {
        Some((a, b)) => {
            let (mut aj, mut bj) = (a, b);
            for j in 1..=ghosts {
                psi[-j] = (psi0 - 1.0) * aj + 1.0 / aj;
                psi[ni + j] = bj * psin;
                aj *= a;
                bj *= b;
            }
        }
        None => {
            let cl = scheme.closure(ctx);
            psi[-1] = cl.left_ghost.boundary * psi0 + cl.left_ghost.neighbor * nodal[1] + cl.left_ghost.offset;
            psi[ni + 1] = cl.right_ghost.boundary * psin + cl.right_ghost.neighbor * nodal[n - 1] + cl.right_ghost.offset;
            // beyond the first ghost C4TBC has no discrete exterior wave; use the exact one
            let (left, right) = adtbc_relations(ctx, grid.ghosts());
            for j in 2..=ghosts {
                let (c, o) = left[(j - 1) as usize];
                psi[-j] = c * psi0 + o;
                let (c, o) = right[(j - 1) as usize];
                psi[ni + j] = c * psin + o;
            }
        }
    }

    let reflection = psi0 - 1.0;
    let raw = 1.0 - reflection.norm_sqr();
    Ok(ScatteringState {
        psi,
        energy: ctx.energy(),
        incidence: Incidence::Left,
        k_left: ctx.k_left(),
        k_right: ctx.k_right(),
        reflection,
        transmission: raw.clamp(0.0, 1.0),
        transmission_raw: raw,
        residual,
    })
}

/// Right-incidence scattering state: unit wave injected at `x = L`,
/// obtained by solving the mirrored device with left incidence and
/// mirroring back.
pub fn solve_right_incidence(ctx: &SchrodingerContext, kind: TbcKind) -> Result<ScatteringState> {
    let mirror = ctx.mirrored();
    let scheme = TbcScheme::new(kind, &mirror)?;
    let state = solve_scattering(&mirror, &scheme)?;
    let grid = *ctx.grid();
    let n = grid.nx() as isize;
    let psi = GridFunction::from_fn(grid, |i| state.psi[n - i]);
    Ok(ScatteringState {
        psi,
        incidence: Incidence::Right,
        k_left: ctx.k_left(),
        k_right: ctx.k_right(),
        ..state
    })
}

impl SchrodingerContext {
    /// Builds the closure for `kind` and solves with incidence from `side`.
    pub fn solve(&self, kind: TbcKind, side: Incidence) -> Result<ScatteringState> {
        match side {
            Incidence::Left => solve_scattering(self, &TbcScheme::new(kind, self)?),
            Incidence::Right => solve_right_incidence(self, kind),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid;
    use crate::schrodinger::{dispersion_roots, Interface};

    fn free(nx: usize) -> SchrodingerContext {
        let g = Grid::new(10.0, nx, 1).unwrap();
        SchrodingerContext::new(g, vec![0.0; nx + 1], 0.5, 0.5).unwrap()
    }

    #[test]
    fn flat_band_at_energy_is_pure_laplacian() {
        let g = Grid::new(1.0, 10, 1).unwrap();
        let ctx = SchrodingerContext::new(g, vec![0.25; 11], 0.3, 0.25).unwrap();
        let l = ctx.lambda();
        let row = interior_row(&ctx, 4);
        assert_eq!(row.map(|c| c.re), [l, -2.0 * l, l]);
    }

    #[test]
    fn reference_interior_row() {
        let row = interior_row(&free(100), 5);
        let re = row.map(|c| c.re);
        assert!((re[0] - 1201.0).abs() < 1e-9);
        assert!((re[1] + 2390.0).abs() < 1e-9);
        assert!((re[2] - 1201.0).abs() < 1e-9);
    }

    #[test]
    fn discrete_plane_wave_annihilates_interior() {
        let ctx = free(100);
        let (alpha, _) = dispersion_roots(0.5, 0.0, 0.5, 0.1).unwrap();
        for j in 1..100 {
            let [a, b, c] = interior_row(&ctx, j);
            let res = a * alpha.powi(j as i32 - 1) + b * alpha.powi(j as i32) + c * alpha.powi(j as i32 + 1);
            assert!(res.norm() <= 1e-12 * ctx.lambda());
        }
    }

    #[test]
    fn d4tbc_free_particle_is_exact_plane_wave() {
        let ctx = free(100);
        let st = ctx.solve(TbcKind::D4tbc, Incidence::Left).unwrap();
        let (alpha, _) = dispersion_roots(0.5, 0.0, 0.5, 0.1).unwrap();
        for j in -1..=101isize {
            assert!((st.psi[j] - alpha.powi(j as i32)).norm() < 1e-12, "node {j}");
        }
        assert!(st.reflection.norm() < 1e-12);
        assert!((st.transmission - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adtbc_free_particle_full_transmission() {
        let st = free(200).solve(TbcKind::Adtbc, Incidence::Left).unwrap();
        assert!((st.transmission_raw - 1.0).abs() < 1e-8);
        let st = free(200).solve(TbcKind::Adtbc, Incidence::Right).unwrap();
        assert!((st.transmission_raw - 1.0).abs() < 1e-8);
    }

    #[test]
    fn right_incidence_on_symmetric_potential_mirrors() {
        let nx = 120;
        let g = Grid::new(12.0, nx, 1).unwrap();
        let pot: Vec<f64> = (0..=nx).map(|j| 0.2 * (-((j as f64 - 60.0) / 15.0).powi(2)).exp()).collect();
        let ctx = SchrodingerContext::new(g, pot, 0.5, 0.35).unwrap();
        for kind in [TbcKind::D4tbc, TbcKind::Adtbc] {
            let l = ctx.solve(kind, Incidence::Left).unwrap();
            let r = ctx.solve(kind, Incidence::Right).unwrap();
            for i in -1..=(nx as isize + 1) {
                assert!((r.psi[i].norm() - l.psi[nx as isize - i].norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reciprocity_on_asymmetric_step() {
        let nx = 200;
        let g = Grid::new(20.0, nx, 1).unwrap();
        let pot: Vec<f64> = (0..=nx)
            .map(|j| {
                let x = j as f64 * 0.1;
                0.15 * (1.0 + ((x - 8.0) / 0.7).tanh()) + 0.1 * (-((x - 12.0) / 1.5).powi(2)).exp()
            })
            .collect();
        let ctx = SchrodingerContext::new(g, pot, 0.5, 0.6).unwrap();
        for kind in [TbcKind::D4tbc, TbcKind::Adtbc] {
            let l = ctx.solve(kind, Incidence::Left).unwrap();
            let r = ctx.solve(kind, Incidence::Right).unwrap();
            assert!((l.transmission_raw - r.transmission_raw).abs() < 1e-10, "{kind}");
        }
    }

    fn square_barrier(dx: f64, corrected: bool) -> f64 {
        let kin = 0.5687;
        let nx = (30.0 / dx).round() as usize;
        let g = Grid::new(30.0, nx, 1).unwrap();
        let (ja, jb) = ((10.0 / dx).round() as usize, (15.0 / dx).round() as usize);
        let pot: Vec<f64> = (0..=nx).map(|j| if j > ja && j < jb { 0.3 } else { 0.0 }).collect();
        let mut worst = 0.0f64;
        for e in [0.12, 0.27, 0.37, 0.45] {
            let mut ctx = SchrodingerContext::new(g, pot.clone(), kin, e).unwrap();
            if corrected {
                ctx = ctx
                    .with_interfaces(vec![
                        Interface { node: ja, below: 0.0, above: 0.3 },
                        Interface { node: jb, below: 0.3, above: 0.0 },
                    ])
                    .unwrap();
            }
            let t = ctx.solve(TbcKind::D4tbc, Incidence::Left).unwrap().transmission;
            let (v, w): (f64, f64) = (0.3, 5.0);
            let exact = if e < v {
                let kap = ((v - e) / kin).sqrt();
                1.0 / (1.0 + v * v * (kap * w).sinh().powi(2) / (4.0 * e * (v - e)))
            } else {
                let q = ((e - v) / kin).sqrt();
                1.0 / (1.0 + v * v * (q * w).sin().powi(2) / (4.0 * e * (e - v)))
            };
            worst = worst.max((t - exact).abs());
        }
        worst
    }

    #[test]
    fn interface_correction_restores_fourth_order() {
        let (coarse, fine) = (square_barrier(0.1, true), square_barrier(0.05, true));
        assert!((coarse / fine).log2() > 3.7, "{coarse:e} {fine:e}");
        assert!(fine < 1e-7);
        // without it the jump costs two orders
        let (coarse, fine) = (square_barrier(0.1, false), square_barrier(0.05, false));
        assert!((coarse / fine).log2() < 2.5);
    }

    #[test]
    fn interfaces_survive_mirroring() {
        let g = Grid::new(10.0, 100, 1).unwrap();
        let pot: Vec<f64> = (0..=100).map(|j| if j > 30 && j < 55 { 0.2 } else { 0.0 }).collect();
        let ctx = SchrodingerContext::new(g, pot, 0.5, 0.3)
            .unwrap()
            .with_interfaces(vec![
                Interface { node: 30, below: 0.0, above: 0.2 },
                Interface { node: 55, below: 0.2, above: 0.0 },
            ])
            .unwrap();
        let l = ctx.solve(TbcKind::D4tbc, Incidence::Left).unwrap();
        let r = ctx.solve(TbcKind::D4tbc, Incidence::Right).unwrap();
        assert!((l.transmission_raw - r.transmission_raw).abs() < 1e-10);
        assert_eq!(ctx.mirrored().interfaces()[0].node, 45);
    }

    #[test]
    fn interface_placement_is_validated() {
        let g = Grid::new(10.0, 100, 1).unwrap();
        let ctx = SchrodingerContext::new(g, vec![0.0; 101], 0.5, 0.3).unwrap();
        let f = |node| Interface { node, below: 0.0, above: 0.1 };
        assert!(ctx.clone().with_interfaces(vec![f(1)]).is_err());
        assert!(ctx.clone().with_interfaces(vec![f(40), f(41)]).is_err());
        assert!(ctx.with_interfaces(vec![f(40), f(42)]).is_ok());
    }

    #[test]
    fn evanescent_exit_lead() {
        // left lead at 0, right lead above E: total reflection
        let nx = 100;
        let g = Grid::new(10.0, nx, 2).unwrap();
        let pot: Vec<f64> = (0..=nx).map(|j| 0.5 * (1.0 + ((j as f64 * 0.1 - 5.0) / 0.5).tanh())).collect();
        let ctx = SchrodingerContext::new(g, pot, 0.5, 0.4).unwrap();
        for kind in [TbcKind::D4tbc, TbcKind::Adtbc] {
            let st = ctx.solve(kind, Incidence::Left).unwrap();
            assert!(st.transmission_raw.abs() < 1e-6, "{kind}: {}", st.transmission_raw);
            assert!(st.psi[nx as isize + 2].norm() < st.psi[nx as isize].norm());
        }
    }
}
