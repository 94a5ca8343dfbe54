//! I-V curve of the double-barrier diode with a prescribed linear drop
//! across the undoped region. One Schrödinger pass per bias.

use qdev::experiments::Preset;
use qdev::selfconsistent::{bias_sweep, SelfConsistentConfig};
use qdev::TbcKind;

fn main() -> qdev::Result<()> {
    let device = Preset::RtdA.build();
    let biases = Preset::RtdA.default_sweep().points();
    let config = SelfConsistentConfig::default();

    let mut curves = Vec::new();
    for kind in [TbcKind::D4tbc, TbcKind::Adtbc] {
        let iv: Vec<(f64, f64)> = bias_sweep(&device, kind, &biases, &config)?
            .into_iter()
            .map(|p| p.result.map(|r| (r.bias, r.current)))
            .collect::<qdev::Result<_>>()?;
        curves.push(iv);
    }

    println!("{:>6} {:>14} {:>14}", "V_ds", "I d4tbc", "I adtbc");
    for (a, b) in curves[0].iter().zip(&curves[1]) {
        println!("{:6.2} {:14.6e} {:14.6e}", a.0, a.1, b.1);
    }
    for (kind, iv) in ["d4tbc", "adtbc"].iter().zip(&curves) {
        // first local maximum; past the valley the current climbs again
        let peak = iv.windows(3).find(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1).map(|w| w[1]);
        if let Some((v, i)) = peak {
            println!("{kind}: resonance peak {i:.3e} A/cm^2 at {v:.2} V");
        }
    }
    Ok(())
}
