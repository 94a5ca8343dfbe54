//! Discrete dispersion of the compact interior scheme.
//!
//! For a flat band the scheme propagates `α^j` with `α = e^{ik̃Δx}`; the
//! discrete wavenumber `k̃` differs from the exact `k` at fourth order.

use qdev::schrodinger::{discrete_wavenumber, dispersion_roots};

fn main() -> qdev::Result<()> {
    let kinetic: f64 = 1.0;
    let (energy, band) = (0.5, 0.0);
    let k: f64 = ((energy - band) / kinetic).sqrt();

    println!("{:>10} {:>22} {:>12} {:>8}", "dx", "|alpha+| - 1", "k~ - k", "order");
    let mut prev: Option<(f64, f64)> = None;
    for dx in [0.4, 0.2, 0.1, 0.05, 0.025] {
        let (plus, minus) = dispersion_roots(energy, band, kinetic, dx)?;
        assert!((plus * minus - 1.0).norm() < 1e-12);
        let err = discrete_wavenumber(plus, dx) - k;
        let order = prev.map(|(d, e)| (e / err).abs().ln() / (d / dx).ln());
        println!(
            "{:10.4} {:22.3e} {:12.4e} {:>8}",
            dx,
            plus.norm() - 1.0,
            err,
            order.map(|p| format!("{p:.4}")).unwrap_or_default()
        );
        prev = Some((dx, err));
    }

    // below the band edge the roots turn real and the wave decays
    let (plus, _) = dispersion_roots(-0.2, 0.0, kinetic, 0.1)?;
    println!("\nevanescent root at E - V = -0.2: {plus:.6}");
    Ok(())
}
