//! Grid-halving study on the free particle for D4TBC and aDTBC.
//!
//! Errors are `max_j |ψ_j − e^{ikx_j}|`; orders compare consecutive grids.

use qdev::experiments::{plane_wave_study, Preset};
use qdev::TbcKind;

fn main() -> qdev::Result<()> {
    let device = Preset::FreeParticle.build();
    for kind in [TbcKind::D4tbc, TbcKind::Adtbc] {
        let report = plane_wave_study(&device, kind, &[100, 200, 400, 800])?;
        println!("{kind}");
        for e in &report.entries {
            let order = e.order.map(|p| format!("{p:.5}")).unwrap_or_else(|| "-".into());
            println!("  nx = {:4}  error = {:.4e}  order = {order}", e.nx, e.error);
        }
    }
    Ok(())
}
