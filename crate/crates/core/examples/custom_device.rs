//! A device written as TOML and solved at one bias.

use qdev::experiments::DeviceSpec;
use qdev::selfconsistent::{run_self_consistent, SelfConsistentConfig};

const DEVICE: &str = r#"
name = "single_barrier_diode"
length = 60.0
nx = 240
mass_ratio = 0.067
permittivity_ratio = 12.9
temperature = 300.0
fermi_level = 0.04

[[doping]]
start = 0.0
end = 20.0
value = 1e18

[[doping]]
start = 20.0
end = 40.0
value = 1e16

[[doping]]
start = 40.0
end = 60.0
value = 1e18

[[band]]
start = 28.0
end = 32.0
value = 0.2

[smoothing]
doping = true
"#;

fn main() -> qdev::Result<()> {
    let device = DeviceSpec::from_toml(DEVICE)?;
    let config = SelfConsistentConfig {
        anderson_depth: 8,
        ..Default::default()
    };
    let r = run_self_consistent(&device, device.scheme, 0.05, &config)?;
    println!(
        "{}: {} outer steps, I = {:.4e} A/cm^2",
        device.name, r.outer_iterations, r.current
    );
    let n = r.density.per_cm3();
    for i in (0..=device.nx).step_by(20) {
        println!("x = {:5.1} nm  V = {:+.5} eV  n = {:.4e} cm^-3", r.grid.x(i as isize), r.potential[i], n[i]);
    }
    Ok(())
}
