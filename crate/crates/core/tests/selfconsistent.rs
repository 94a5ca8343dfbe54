use qdev::experiments::Preset;
use qdev::selfconsistent::{bias_sweep, run_self_consistent, run_self_consistent_from, SelfConsistentConfig};
use qdev::TbcKind;

fn accelerated() -> SelfConsistentConfig {
    SelfConsistentConfig {
        anderson_depth: 8,
        ..Default::default()
    }
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let device = Preset::RtdA.build();
    let config = SelfConsistentConfig::default();
    let a = run_self_consistent(&device, TbcKind::Adtbc, 0.1, &config).unwrap();
    let b = run_self_consistent(&device, TbcKind::Adtbc, 0.1, &config).unwrap();
    assert_eq!(a.current.to_bits(), b.current.to_bits());
    assert_eq!(a.density.values, b.density.values);
}

#[test]
fn warm_and_cold_starts_reach_the_same_potential() {
    let mut device = Preset::Resistor.build();
    device.nx = 50;
    let config = accelerated();
    let cold = run_self_consistent(&device, TbcKind::D4tbc, 0.05, &config).unwrap();
    let zero = run_self_consistent(&device, TbcKind::D4tbc, 0.0, &config).unwrap();
    let warm = run_self_consistent_from(&device, TbcKind::D4tbc, 0.05, &config, Some(&zero.potential_s)).unwrap();
    let gap = cold.potential.iter().zip(&warm.potential).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(gap < 1e-8, "{gap:e}");
    assert!((cold.current - warm.current).abs() <= 1e-6 * cold.current.abs());
}

#[test]
fn prescribed_sweep_current_vanishes_only_at_zero_bias() {
    let device = Preset::RtdA.build();
    let points = bias_sweep(&device, TbcKind::D4tbc, &[0.0, 0.02, 0.04], &SelfConsistentConfig::default()).unwrap();
    let iv: Vec<f64> = points.into_iter().map(|p| p.result.unwrap().current).collect();
    assert_eq!(iv[0], 0.0);
    assert!(iv[1] > 0.0 && iv[2] > iv[1], "{iv:?}");
}
