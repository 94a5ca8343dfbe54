//! Transmission through a square barrier against the closed-form result.
//!
//! The barrier edges sit on grid nodes; the one-sided interface rows keep
//! the scheme fourth order across the jump.

use num_complex::Complex64;
use qdev::numerics::Grid;
use qdev::schrodinger::{Incidence, Interface};
use qdev::{Material, SchrodingerContext, TbcKind};

/// `T(E)` for a barrier of height `v0` and width `a` (nm, eV).
fn analytic(kinetic: f64, v0: f64, a: f64, e: f64) -> f64 {
    let k = (e / kinetic).sqrt();
    if (e - v0).abs() < 1e-12 {
        return 1.0 / (1.0 + (0.5 * k * a).powi(2));
    }
    let q = Complex64::new((e - v0) / kinetic, 0.0).sqrt();
    let s = (q * a).sin();
    let denom = 1.0 + ((k * k - q * q) * s / (2.0 * k * q)).norm_sqr();
    1.0 / denom
}

fn main() -> qdev::Result<()> {
    let material = Material::new(0.067, 11.44);
    let (length, start, end, height) = (30.0, 10.0, 15.0, 0.3);
    let dx = 0.05;
    let nx = (length / dx) as usize;
    let grid = Grid::new(length, nx, 1)?;
    let (i0, i1) = ((start / dx) as usize, (end / dx) as usize);
    let potential: Vec<f64> = (0..=nx).map(|i| if i > i0 && i < i1 { height } else { 0.0 }).collect();
    let interfaces = vec![
        Interface { node: i0, below: 0.0, above: height },
        Interface { node: i1, below: height, above: 0.0 },
    ];

    println!("{:>8} {:>14} {:>14} {:>10}", "E (eV)", "numeric", "analytic", "abs err");
    let mut worst: f64 = 0.0;
    for n in 1..=25 {
        let e = 0.02 * n as f64;
        let ctx = SchrodingerContext::new(grid, potential.clone(), material.kinetic, e)?.with_interfaces(interfaces.clone())?;
        let t = ctx.solve(TbcKind::D4tbc, Incidence::Left)?.transmission;
        let exact = analytic(material.kinetic, height, end - start, e);
        worst = worst.max((t - exact).abs());
        println!("{e:8.3} {t:14.8e} {exact:14.8e} {:10.2e}", (t - exact).abs());
    }
    println!("max |T - T_exact| = {worst:.2e}");
    Ok(())
}
