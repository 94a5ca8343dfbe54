//! `T(E)` of the prescribed-drop diode at a few biases, with the resonant
//! peaks located on a fine energy grid.

use qdev::experiments::Preset;
use qdev::selfconsistent::device_solver;
use qdev::statistics::transmission_table;
use qdev::TbcKind;

fn peaks(table: &[(f64, f64)]) -> Vec<(f64, f64)> {
    table
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1 && w[1].1 > 1e-3)
        .map(|w| w[1])
        .collect()
}

fn main() -> qdev::Result<()> {
    let device = Preset::RtdA.build();
    let zeros = vec![0.0; device.nx + 1];
    for bias in [0.0, 0.1, 0.2] {
        let solver = device_solver(&device, device.fixed_potential(bias)?, &zeros, TbcKind::D4tbc)?;
        let table = transmission_table(&solver, 1e-4, 0.3, 6000)?;
        let found: Vec<String> = peaks(&table).iter().map(|(e, t)| format!("{e:.4} eV (T = {t:.3})")).collect();
        println!("V_ds = {bias:.1} V: {}", found.join(", "));
    }
    Ok(())
}
