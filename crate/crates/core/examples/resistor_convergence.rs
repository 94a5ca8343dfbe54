//! Grid-refinement study of the self-consistent potential on the resistor
//! with smoothed doping, for both coupled systems.
//!
//! Each grid is compared with the nodal restriction of a finer reference
//! solution. Takes a few minutes in release mode.

use qdev::experiments::{potential_study, Preset};
use qdev::selfconsistent::SelfConsistentConfig;
use qdev::TbcKind;

fn main() -> qdev::Result<()> {
    let mut device = Preset::Resistor.build();
    device.smoothing.doping = true;
    let config = SelfConsistentConfig {
        anderson_depth: 8,
        ..Default::default()
    };
    for kind in [TbcKind::D4tbc, TbcKind::Adtbc] {
        let report = potential_study(&device, kind, &[50, 100, 200, 400], 800, &config)?;
        println!("{} ({})", kind.coupled_name(), report.reference);
        for e in &report.entries {
            let order = e.order.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into());
            println!("  nx = {:4}  max|dV| = {:.4e} eV  order = {order}", e.nx, e.error);
        }
    }
    Ok(())
}
