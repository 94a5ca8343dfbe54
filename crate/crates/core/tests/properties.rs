use num_complex::Complex64;
use proptest::prelude::*;
use qdev::experiments::{kernel, kernel_radius, mollify, PiecewiseConstant, Preset, Region};
use qdev::numerics::{adaptive_simpson, sbp_identity_residual, sbp_identity_scale, solve_banded, BandedSystem, Grid, GridFunction, QuadratureSpec};
use qdev::schrodinger::{discrete_wavenumber, dispersion_roots, Incidence};
use qdev::selfconsistent::BiasSweep;
use qdev::statistics::softplus;
use qdev::{DeviceSpec, SchrodingerContext, TbcKind};

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #[test]
    fn propagating_roots_are_unimodular_and_reciprocal(kinetic in 0.05..2.0f64, d in 1e-4..1.0f64, dx in 0.01..1.0f64) {
        prop_assume!(12.0 * kinetic / (dx * dx) > 2.0 * d);
        let (plus, minus) = dispersion_roots(d, 0.0, kinetic, dx).unwrap();
        prop_assert!((plus.norm() - 1.0).abs() < 1e-13);
        prop_assert!((plus * minus - 1.0).norm() < 1e-13);
        prop_assert!((plus - minus.conj()).norm() < 1e-13);
        let t = 12.0 * kinetic / (dx * dx);
        let c = (discrete_wavenumber(plus, dx) * dx).cos();
        prop_assert!((t * (1.0 - c) / (5.0 + c) - d).abs() < 1e-10 * t.max(1.0));
    }

    #[test]
    fn evanescent_root_decays(kinetic in 0.05..2.0f64, d in 1e-4..1.0f64, dx in 0.01..1.0f64) {
        let (plus, minus) = dispersion_roots(-d, 0.0, kinetic, dx).unwrap();
        prop_assert!(plus.im.abs() < 1e-14 && plus.re > 0.0 && plus.re < 1.0);
        prop_assert!((plus * minus - 1.0).norm() < 1e-12);
    }

    #[test]
    fn summation_by_parts_holds(
        length in 0.1..20.0f64,
        values in proptest::collection::vec(complex(), 38),
    ) {
        let grid = Grid::new(length, 16, 1).unwrap();
        let u = GridFunction::from_storage(grid, values[..19].to_vec()).unwrap();
        let v = GridFunction::from_storage(grid, values[19..].to_vec()).unwrap();
        prop_assert!(sbp_identity_residual(&u, &v) <= 1e-12 * sbp_identity_scale(&u, &v));
    }

    #[test]
    fn banded_solution_has_small_residual(
        n in 2usize..48,
        lower in 0usize..3,
        upper in 0usize..3,
        entries in proptest::collection::vec(complex(), 48 * 8),
    ) {
        let mut sys = BandedSystem::new(n, lower, upper).unwrap();
        let mut it = entries.into_iter().cycle();
        for i in 0..n {
            for j in i.saturating_sub(lower)..=(i + upper).min(n - 1) {
                let shift = if i == j { Complex64::new(3.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                sys.set(i, j, it.next().unwrap() + shift);
            }
            sys.set_rhs(i, it.next().unwrap());
        }
        let x = solve_banded(&sys).unwrap();
        prop_assert!(sys.residual_inf(&x) <= 1e-12 * sys.norm_inf());
    }

    #[test]
    fn softplus_is_consistent(x in -700.0..700.0f64) {
        prop_assert!(softplus(x) > 0.0 || x < -700.0);
        prop_assert!((softplus(x) - softplus(-x) - x).abs() <= 1e-12 * x.abs().max(1.0));
        prop_assert!(softplus(x + 1e-3) >= softplus(x));
    }

    #[test]
    fn simpson_is_exact_on_cubics(c in proptest::array::uniform4(-5.0..5.0f64), a in -3.0..0.0f64, b in 0.1..3.0f64) {
        let f = |x: f64| c[0] + x * (c[1] + x * (c[2] + x * c[3]));
        let exact = |x: f64| x * (c[0] + x * (c[1] / 2.0 + x * (c[2] / 3.0 + x * c[3] / 4.0)));
        let q = adaptive_simpson(f, &QuadratureSpec::new(a, b, 1e-12)).unwrap();
        prop_assert!((q.value - (exact(b) - exact(a))).abs() <= 1e-11 * (1.0 + exact(b).abs() + exact(a).abs()));
    }

    #[test]
    fn mollified_constant_is_unchanged(value in -1e3..1e3f64, length in 5.0..50.0f64, nx in 8usize..64) {
        let regions = [Region::new(0.0, length, value)];
        let grid = Grid::new(length, nx, 1).unwrap();
        for m in mollify(&PiecewiseConstant::new(&regions, length), &grid).unwrap() {
            prop_assert!((m - value).abs() <= 1e-11 * value.abs().max(1.0));
        }
    }

    #[test]
    fn mollified_profile_stays_in_range(lo in -5.0..0.0f64, hi in 0.0..5.0f64, cut in 0.2..0.8f64) {
        let length = 20.0;
        let regions = [Region::new(0.0, cut * length, lo), Region::new(cut * length, length, hi)];
        let grid = Grid::new(length, 80, 1).unwrap();
        let m = mollify(&PiecewiseConstant::new(&regions, length), &grid).unwrap();
        for w in m.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
        prop_assert!(m.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
    }

    #[test]
    fn sweep_points_are_evenly_snapped(start in -0.5..0.5f64, steps in 0usize..40, step in 0.005..0.1f64) {
        let start = (start * 1e3).round() / 1e3;
        let step = (step * 1e3).round() / 1e3;
        let stop = start + steps as f64 * step;
        let p = BiasSweep::new(start, stop, step).points();
        prop_assert_eq!(p.len(), steps + 1);
        for (i, v) in p.iter().enumerate() {
            prop_assert!((v - (start + i as f64 * step)).abs() < 1e-12);
        }
    }

    #[test]
    fn device_toml_round_trips(length in 10.0..200.0f64, nx in 4usize..2000, fermi in -0.1..0.4f64, temperature in 4.0..400.0f64) {
        let mut d: DeviceSpec = Preset::RtdB.build();
        d.length = length;
        d.doping = vec![Region::new(0.0, length, 1e18)];
        d.band = vec![Region::new(0.25 * length, 0.3 * length, 0.3)];
        d.nx = nx;
        d.fermi_level = fermi;
        d.temperature = temperature;
        let back = DeviceSpec::from_toml(&d.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn transmission_is_a_probability(heights in proptest::collection::vec(0.0..0.4f64, 6), energy in 0.005..0.6f64) {
        let nx = 120;
        let grid = Grid::new(30.0, nx, 1).unwrap();
        let potential: Vec<f64> = (0..=nx)
            .map(|i| if i < 10 || i > nx - 10 { 0.0 } else { heights[(i - 10) * heights.len() / (nx - 19)] })
            .collect();
        let ctx = SchrodingerContext::new(grid, potential, 0.5687, energy).unwrap();
        for kind in TbcKind::ALL {
            let left = ctx.solve(kind, Incidence::Left).unwrap();
            let right = ctx.solve(kind, Incidence::Right).unwrap();
            prop_assert!((0.0..=1.0).contains(&left.transmission));
            prop_assert!((left.transmission - right.transmission).abs() < 1e-8, "{kind}: {} vs {}", left.transmission, right.transmission);
        }
    }
}

#[test]
fn kernel_has_unit_mass() {
    let r = kernel_radius();
    let q = adaptive_simpson(kernel, &QuadratureSpec::new(-r, r, 1e-14)).unwrap();
    assert!((q.value - 1.0).abs() < 1e-12, "{}", q.value);
}
