//! Self-consistent I-V curve of the n++/n+/n++ resistor, with a straight
//! line fitted through the points.
//!
//! ```text
//! cargo run --release --example resistor_iv -- [d4tbc|adtbc]
//! ```

use qdev::experiments::Preset;
use qdev::selfconsistent::{bias_sweep, SelfConsistentConfig};
use qdev::TbcKind;

fn main() -> qdev::Result<()> {
    let scheme: TbcKind = std::env::args().nth(1).as_deref().unwrap_or("d4tbc").parse()?;
    let device = Preset::Resistor.build();
    let config = SelfConsistentConfig {
        anderson_depth: 8,
        ..Default::default()
    };
    let biases = Preset::Resistor.default_sweep().points();

    let mut iv = Vec::new();
    for point in bias_sweep(&device, scheme, &biases, &config)? {
        let r = point.result?;
        println!(
            "V_ds = {:.2} V  I = {:.6e} A/cm^2  outer = {:3}  V_s(L) = {:+.5} eV",
            r.bias,
            r.current,
            r.outer_iterations,
            r.potential_s[device.nx]
        );
        iv.push((r.bias, r.current));
    }

    // least-squares line through the origin-free points
    let n = iv.len() as f64;
    let (sx, sy) = iv.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = iv.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = iv.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let worst = iv.iter().map(|(x, y)| (y - (my + slope * (x - mx))).abs()).fold(0.0, f64::max);
    let peak = iv.iter().map(|(_, y)| y.abs()).fold(0.0, f64::max);
    println!("conductance {slope:.4e} A/cm^2/V, worst residual {:.3}% of peak", 100.0 * worst / peak);
    Ok(())
}
