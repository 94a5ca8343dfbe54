//! Self-consistent I-V curve of the double-barrier diode. The heaviest
//! example: expect several minutes per scheme in release mode.
//!
//! ```text
//! cargo run --release --example rtd_b_iv -- adtbc
//! ```

use qdev::experiments::Preset;
use qdev::selfconsistent::{bias_sweep, SelfConsistentConfig};
use qdev::TbcKind;

fn main() -> qdev::Result<()> {
    let scheme: TbcKind = std::env::args().nth(1).as_deref().unwrap_or("d4tbc").parse()?;
    let device = Preset::RtdB.build();
    let config = SelfConsistentConfig {
        anderson_depth: 8,
        ..Default::default()
    };
    println!("{} on {} (dx = {} nm)", scheme.coupled_name(), device.name, device.dx());
    for point in bias_sweep(&device, scheme, &Preset::RtdB.default_sweep().points(), &config)? {
        match point.result {
            Ok(r) => println!(
                "V_ds = {:.2} V  I = {:.6e} A/cm^2  outer = {:2}  drop = {:.4} eV",
                r.bias,
                r.current,
                r.outer_iterations,
                r.potential[0] - r.potential[device.nx]
            ),
            Err(e) => println!("V_ds = {:.2} V  failed: {e}", point.bias),
        }
    }
    Ok(())
}
