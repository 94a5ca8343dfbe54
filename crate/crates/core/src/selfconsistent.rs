//! The outer Schrödinger–Poisson fixed point.
//!
//! Each outer step solves scattering states on the current potential,
//! integrates the density, and updates `V_s` with the Gummel-predicted
//! Newton solve. The loop stops once `‖ΔV_s‖∞` reaches the tolerance.
//! Devices with a prescribed potential take a single Schrödinger pass.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{DeviceSpec, Prescribed};
use crate::numerics::Grid;
use crate::poisson::{newton_solve, NewtonConfig, PoissonProblem};
use crate::schrodinger::{SchrodingerContext, TbcKind};
use crate::statistics::{current_density, electron_density, DensityProfile, DeviceSolver, QuadratureConfig, ThermalContext};

/// Evenly spaced drain biases `start, start + step, …, stop` (V).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasSweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl BiasSweep {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        BiasSweep { start, stop, step }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::validation("sweep.step", "must be positive"));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.stop >= self.start) {
            return Err(Error::validation("sweep.stop", "must not lie below sweep.start"));
        }
        Ok(())
    }

    /// The bias points `start + i·step`, snapped to 1e-12 V so that
    /// decimal steps print as written.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| ((self.start + i as f64 * self.step) * 1e12).round() / 1e12).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelfConsistentConfig {
    /// Outer stop criterion on `‖ΔV_s‖∞` (eV).
    pub tolerance: f64,
    pub max_outer: usize,
    /// `V_s ← V_s + mixing·(V_new − V_s)`; 1 is plain replacement.
    pub mixing: f64,
    /// Past steps combined by Anderson extrapolation; 0 disables it.
    /// Same fixed point and stop test, far fewer outer steps on
    /// degenerate devices.
    pub anderson_depth: usize,
    /// Upper end of the energy integrals (eV).
    pub energy_cutoff: f64,
    /// Linear drop added to the band profile at every bias, on top of the
    /// solved `V_s`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub superposed_ramp: Option<Prescribed>,
    pub newton: NewtonConfig,
    pub quadrature: QuadratureConfig,
}

impl Default for SelfConsistentConfig {
    fn default() -> Self {
        SelfConsistentConfig {
            tolerance: 1e-10,
            max_outer: 200,
            mixing: 1.0,
            anderson_depth: 0,
            energy_cutoff: ThermalContext::DEFAULT_CUTOFF,
            superposed_ramp: None,
            newton: NewtonConfig::default(),
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl SelfConsistentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::validation("selfconsistent.tolerance", "must be positive"));
        }
        if self.max_outer == 0 {
            return Err(Error::validation("selfconsistent.max_outer", "must be at least 1"));
        }
        if !(self.mixing > 0.0 && self.mixing <= 1.0) {
            return Err(Error::validation("selfconsistent.mixing", "must lie in (0, 1]"));
        }
        self.newton.validate()?;
        self.quadrature.validate()
    }
}

/// Converged device state at one bias.
#[derive(Debug, Clone)]
pub struct SelfConsistentResult {
    pub scheme: TbcKind,
    /// V
    pub bias: f64,
    pub grid: Grid,
    /// Solved (or prescribed) `V_s` on nodes `0..=N_x` (eV).
    pub potential_s: Vec<f64>,
    /// Total `V = V_b + V_s` on nodes `0..=N_x` (eV).
    pub potential: Vec<f64>,
    pub density: DensityProfile,
    /// A·cm⁻² (nondimensional devices: `(1/2π)∫T·ΔF dE`).
    pub current: f64,
    /// Zero when the potential was prescribed.
    pub outer_iterations: usize,
    /// `‖ΔV_s‖∞` per outer step.
    pub history: Vec<f64>,
    pub newton_iterations: Vec<usize>,
    /// Some quadrature stopped at its depth limit.
    pub quadrature_warning: bool,
    /// Scattering solver on the final potential, for tabulating `T(E)`.
    pub solver: DeviceSolver,
}

impl SelfConsistentResult {
    /// `DSP1`/`DSP2` style tag.
    pub fn scheme_name(&self) -> &'static str {
        self.scheme.coupled_name()
    }
}

/// Scattering-state provider for a given total potential.
pub fn device_solver(device: &DeviceSpec, potential: Vec<f64>, potential_s: &[f64], kind: TbcKind) -> Result<DeviceSolver> {
    let grid = device.grid()?;
    let ctx = SchrodingerContext::new(grid, potential, device.material().kinetic, 0.0)?;
    let ctx = ctx.with_interfaces(device.interfaces(potential_s))?;
    Ok(DeviceSolver::new(ctx, kind))
}

fn check_resolution(grid: &Grid, kinetic: f64, cutoff: f64, lowest: f64) -> Result<()> {
    let t = kinetic * grid.lambda();
    let limit = 2.0 * (cutoff - lowest);
    if t > limit {
        Ok(())
    } else {
        Err(Error::PreconditionViolated { t, limit })
    }
}

/// Runs the outer loop at drain bias `bias` (V) from `V_s ≡ 0`.
pub fn run_self_consistent(device: &DeviceSpec, scheme: TbcKind, bias: f64, config: &SelfConsistentConfig) -> Result<SelfConsistentResult> {
    run_self_consistent_from(device, scheme, bias, config, None)
}

struct Setup {
    grid: Grid,
    material: crate::units::Material,
    thermal: ThermalContext,
    /// `V_b` plus any prescribed or superposed drop.
    fixed: Vec<f64>,
}

fn prepare(device: &DeviceSpec, bias: f64, config: &SelfConsistentConfig) -> Result<Setup> {
    device.validate()?;
    config.validate()?;
    let grid = device.grid()?;
    let material = device.material();
    let thermal = device.thermal()?.with_bias(bias).with_cutoff(config.energy_cutoff)?;
    let mut fixed = device.fixed_potential(bias)?;
    if let (Some(ramp), None) = (config.superposed_ramp, device.prescribed) {
        for (v, x) in fixed.iter_mut().zip(grid.nodes()) {
            *v += ramp.value(x, bias);
        }
    }
    let lowest = fixed.iter().cloned().fold(f64::INFINITY, f64::min);
    check_resolution(&grid, material.kinetic, config.energy_cutoff, lowest)?;
    Ok(Setup {
        grid,
        material,
        thermal,
        fixed,
    })
}

/// As [`run_self_consistent`], starting from `initial` (nodal `V_s`).
pub fn run_self_consistent_from(
    device: &DeviceSpec,
    scheme: TbcKind,
    bias: f64,
    config: &SelfConsistentConfig,
    initial: Option<&[f64]>,
) -> Result<SelfConsistentResult> {
    let setup = prepare(device, bias, config)?;
    if let Some(p) = device.prescribed {
        let Setup {
            grid,
            material,
            thermal,
            fixed,
        } = setup;
        let ramp: Vec<f64> = grid.nodes().iter().map(|&x| p.value(x, bias)).collect();
        let zeros = vec![0.0; grid.nx() + 1];
        let solver = device_solver(device, fixed.clone(), &zeros, scheme)?;
        let density = electron_density(&solver, &thermal, &config.quadrature)?;
        let current = current_density(&solver, &thermal, &config.quadrature)?;
        return Ok(SelfConsistentResult {
            scheme,
            bias,
            grid,
            potential_s: ramp,
            potential: fixed,
            quadrature_warning: density.depth_exceeded || current.depth_exceeded,
            density,
            current: current.scaled(material.current_scale),
            outer_iterations: 0,
            history: Vec::new(),
            newton_iterations: Vec::new(),
            solver,
        });
    }
    let problem = PoissonProblem::new(setup.grid, &device.doping_nodes()?, setup.material.coulomb, setup.thermal.kt)?;
    outer_loop(device, &setup, &problem, scheme, bias, config, initial)
}

/// Outer loop against caller-supplied electrostatics, for instance doping
/// that includes the ghost nodes. The device's own doping is ignored.
pub fn run_self_consistent_with(
    device: &DeviceSpec,
    problem: &PoissonProblem,
    scheme: TbcKind,
    bias: f64,
    config: &SelfConsistentConfig,
    initial: Option<&[f64]>,
) -> Result<SelfConsistentResult> {
    let setup = prepare(device, bias, config)?;
    if device.prescribed.is_some() {
        return Err(Error::validation("prescribed", "a prescribed potential leaves nothing to solve"));
    }
    if problem.grid().nx() != setup.grid.nx() || problem.grid().dx() != setup.grid.dx() {
        return Err(Error::InvalidSystem("Poisson grid does not match the device grid".into()));
    }
    outer_loop(device, &setup, problem, scheme, bias, config, initial)
}

fn outer_loop(
    device: &DeviceSpec,
    setup: &Setup,
    problem: &PoissonProblem,
    scheme: TbcKind,
    bias: f64,
    config: &SelfConsistentConfig,
    initial: Option<&[f64]>,
) -> Result<SelfConsistentResult> {
    let n = setup.grid.nx();
    let thermal = &setup.thermal;
    let total = |vs: &[f64]| setup.fixed.iter().zip(vs).map(|(a, b)| a + b).collect::<Vec<f64>>();
    let mut vs = match initial {
        Some(v) if v.len() == n + 1 => v.to_vec(),
        Some(v) => {
            return Err(Error::InvalidSystem(format!("initial potential needs {} values, got {}", n + 1, v.len())));
        }
        None => vec![0.0; n + 1],
    };
    let mut mixer = Anderson::new(config.anderson_depth, config.mixing);
    let mut history = Vec::new();
    let mut newton_iterations = Vec::new();
    let mut warning = false;

    for it in 1..=config.max_outer {
        let outer = |e: Error| Error::Outer {
            iteration: it,
            source: Box::new(e),
        };
        let solver = device_solver(device, total(&vs), &vs, scheme).map_err(outer)?;
        let density = electron_density(&solver, thermal, &config.quadrature).map_err(outer)?;
        warning |= density.depth_exceeded;
        let step = newton_solve(problem, &density.values, &vs, &config.newton).map_err(outer)?;
        newton_iterations.push(step.iterations);
        let new = step.state.nodal().to_vec();
        let update = new.iter().zip(&vs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        history.push(update);

        if update <= config.tolerance {
            let potential = total(&new);
            let solver = device_solver(device, potential.clone(), &new, scheme).map_err(outer)?;
            let current = current_density(&solver, thermal, &config.quadrature).map_err(outer)?;
            return Ok(SelfConsistentResult {
                scheme,
                bias,
                grid: setup.grid,
                potential_s: new,
                potential,
                density,
                current: current.scaled(setup.material.current_scale),
                outer_iterations: it,
                history,
                newton_iterations,
                quadrature_warning: warning || current.depth_exceeded,
                solver,
            });
        }
        vs = mixer.next(&vs, &new);
    }
    Err(Error::OuterMaxIterations {
        iterations: config.max_outer,
        last_update: history.last().copied().unwrap_or(f64::NAN),
        history,
        last: vs,
    })
}

/// Anderson mixing of the map `V ↦ G(V)` over the last `depth` steps;
/// depth 0 is linear mixing.
struct Anderson {
    depth: usize,
    beta: f64,
    dx: VecDeque<Vec<f64>>,
    df: VecDeque<Vec<f64>>,
    last: Option<(Vec<f64>, Vec<f64>)>,
}

impl Anderson {
    fn new(depth: usize, beta: f64) -> Self {
        Anderson {
            depth,
            beta,
            dx: VecDeque::new(),
            df: VecDeque::new(),
            last: None,
        }
    }

    fn next(&mut self, x: &[f64], g: &[f64]) -> Vec<f64> {
        let f: Vec<f64> = g.iter().zip(x).map(|(a, b)| a - b).collect();
        let mut out: Vec<f64> = x.iter().zip(&f).map(|(a, b)| a + self.beta * b).collect();
        if self.depth == 0 {
            return out;
        }
        if let Some((xp, fp)) = self.last.take() {
            self.dx.push_back(x.iter().zip(&xp).map(|(a, b)| a - b).collect());
            self.df.push_back(f.iter().zip(&fp).map(|(a, b)| a - b).collect());
            if self.dx.len() > self.depth {
                self.dx.pop_front();
                self.df.pop_front();
            }
        }
        let gamma = least_squares(&self.df, &f);
        for ((dx, df), c) in self.dx.iter().zip(&self.df).zip(gamma) {
            for ((o, a), b) in out.iter_mut().zip(dx).zip(df) {
                *o -= c * (a + self.beta * b);
            }
        }
        self.last = Some((x.to_vec(), f));
        out
    }
}

/// `argmin ‖b − Σ γ_j c_j‖₂` by modified Gram–Schmidt; nearly dependent
/// columns get a zero coefficient.
fn least_squares(columns: &VecDeque<Vec<f64>>, b: &[f64]) -> Vec<f64> {
    let m = columns.len();
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, c)| a * c).sum::<f64>();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut r = vec![vec![0.0; m]; m];
    let mut kept = vec![false; m];
    for j in 0..m {
        let mut v = columns[j].clone();
        let original = dot(&v, &v).sqrt();
        for (i, qi) in q.iter().enumerate() {
            if !kept[i] {
                continue;
            }
            let c = dot(qi, &v);
            r[i][j] = c;
            v.iter_mut().zip(qi).for_each(|(a, e)| *a -= c * e);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-10 * original && norm > 0.0 {
            kept[j] = true;
            r[j][j] = norm;
            v.iter_mut().for_each(|a| *a /= norm);
        }
        q.push(v);
    }
    let rhs: Vec<f64> = (0..m).map(|i| if kept[i] { dot(&q[i], b) } else { 0.0 }).collect();
    let mut gamma = vec![0.0; m];
    for i in (0..m).rev() {
        if !kept[i] {
            continue;
        }
        let s: f64 = (i + 1..m).filter(|&k| kept[k]).map(|k| r[i][k] * gamma[k]).sum();
        gamma[i] = (rhs[i] - s) / r[i][i];
    }
    gamma
}

/// One entry of a sweep; failures are kept and the sweep goes on.
#[derive(Debug)]
pub struct BiasPoint {
    pub bias: f64,
    pub result: Result<SelfConsistentResult>,
}

/// Runs every bias in order, warm-starting each from the previous
/// converged `V_s`.
pub fn bias_sweep(device: &DeviceSpec, scheme: TbcKind, biases: &[f64], config: &SelfConsistentConfig) -> Result<Vec<BiasPoint>> {
    let increasing = biases.windows(2).all(|w| w[1] > w[0]);
    let decreasing = biases.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::validation("sweep", "biases must be strictly monotone"));
    }
    let mut out = Vec::with_capacity(biases.len());
    let mut warm: Option<Vec<f64>> = None;
    for &bias in biases {
        let result = run_self_consistent_from(device, scheme, bias, config, warm.as_deref());
        if let Ok(r) = &result {
            if r.outer_iterations > 0 {
                warm = Some(r.potential_s.clone());
            }
        }
        out.push(BiasPoint { bias, result });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Preset;

    fn small_resistor() -> DeviceSpec {
        let mut d = Preset::Resistor.build();
        d.nx = 50;
        d
    }

    #[test]
    fn sweep_points_do_not_drift() {
        let p = BiasSweep::new(0.0, 0.4, 0.02).points();
        assert_eq!(p.len(), 21);
        assert_eq!(p[13], 0.26);
        assert_eq!(p[3], 0.06);
        assert_eq!(BiasSweep::new(0.1, 0.1, 0.05).points(), vec![0.1]);
        assert!(BiasSweep::new(0.0, 1.0, 0.0).validate().is_err());
    }

    #[test]
    fn prescribed_potential_takes_one_pass() {
        let mut d = Preset::RtdA.build();
        d.nx = 135;
        let r = run_self_consistent(&d, TbcKind::D4tbc, 0.1, &SelfConsistentConfig::default()).unwrap();
        assert_eq!(r.outer_iterations, 0);
        assert!(r.newton_iterations.is_empty());
        assert!((r.potential_s[135] + 0.1).abs() < 1e-15);
        assert!(r.current > 0.0);
    }

    #[test]
    fn resistor_converges_at_equilibrium() {
        let d = small_resistor();
        let r = run_self_consistent(&d, TbcKind::D4tbc, 0.0, &SelfConsistentConfig::default()).unwrap();
        assert!(*r.history.last().unwrap() <= 1e-10);
        assert_eq!(r.current, 0.0);
        let n = r.density.per_cm3();
        // more electrons in the heavily doped contacts, mirror symmetric
        assert!(n[0] > n[25]);
        for i in 0..=50 {
            assert!((n[i] - n[50 - i]).abs() <= 1e-2 * n[i], "{i}");
        }
        assert!(r.density.values.storage().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn converged_potential_is_a_fixed_point() {
        let d = small_resistor();
        let cfg = SelfConsistentConfig::default();
        let first = run_self_consistent(&d, TbcKind::Adtbc, 0.0, &cfg).unwrap();
        let again = run_self_consistent_from(&d, TbcKind::Adtbc, 0.0, &cfg, Some(&first.potential_s)).unwrap();
        assert!(again.history[0] < 1e-8, "{:?}", again.history);
        assert!(again.outer_iterations < first.outer_iterations / 4);
    }

    #[test]
    fn non_monotone_sweep_is_rejected() {
        let d = small_resistor();
        assert!(bias_sweep(&d, TbcKind::D4tbc, &[0.0, 0.1, 0.05], &SelfConsistentConfig::default()).is_err());
    }

    #[test]
    fn coarse_grid_is_rejected_up_front() {
        let mut d = small_resistor();
        d.nx = 4;
        let r = run_self_consistent(&d, TbcKind::D4tbc, 0.0, &SelfConsistentConfig::default());
        assert!(matches!(r, Err(Error::PreconditionViolated { .. })), "{r:?}");
    }
}
