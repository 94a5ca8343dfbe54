//! Modulus of a free-particle scattering state under the three boundary
//! closures (`ħ = m* = 1`, `E = 0.5`, `L = 10`, `N_x = 100`).
//!
//! An exact plane wave has `|ψ| ≡ 1`; any ripple comes from the boundary.
//!
//! ```text
//! cargo run --example free_particle
//! ```

use qdev::experiments::{oscillation_metric, Preset};
use qdev::schrodinger::Incidence;
use qdev::{SchrodingerContext, TbcKind};

fn main() -> qdev::Result<()> {
    let device = Preset::FreeParticle.build();
    let grid = device.grid()?;
    let energy = device.probe_energy.unwrap_or(0.5);
    let ctx = SchrodingerContext::new(grid, vec![0.0; device.nx + 1], device.material().kinetic, energy)?;

    let mut states = Vec::new();
    for kind in TbcKind::ALL {
        let state = ctx.solve(kind, Incidence::Left)?;
        println!(
            "{:<6} max||psi|-1| = {:.3e}   T = {:.12}   residual = {:.1e}",
            kind.as_str(),
            oscillation_metric(&state),
            state.transmission,
            state.residual
        );
        states.push(state);
    }

    println!("\n{:>6} {:>14} {:>14} {:>14}", "x", "c4tbc", "d4tbc", "adtbc");
    for i in (0..=device.nx).step_by(10) {
        let row: Vec<String> = states.iter().map(|s| format!("{:14.10}", s.psi[i as isize].norm())).collect();
        println!("{:6.2} {}", grid.x(i as isize), row.join(" "));
    }
    Ok(())
}
