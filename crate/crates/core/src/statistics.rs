//! Fermi supply function, electron density and terminal current.
//!
//! Densities are integrals over the wavenumber of the injecting contact,
//! currents integrals over energy. Both use adaptive Simpson; the density
//! integrand is the whole nodal vector `F·|ψ_i|²` so a single refinement
//! tree (and a single scattering solve per abscissa) serves every node.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, adaptive_simpson_vec, Grid, QuadratureSpec, RealGridFunction};
use crate::schrodinger::{Incidence, ScatteringState, SchrodingerContext, TbcKind};
use crate::units::{thermal_energy, PER_NM3_TO_PER_CM3};

/// Contact statistics at one bias point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalContext {
    /// Fermi level of the left contact (eV).
    pub fermi_level: f64,
    /// Lattice temperature (K).
    pub temperature: f64,
    /// k_B·T (eV).
    pub kt: f64,
    /// ħ²/2m* (eV·nm²).
    pub kinetic: f64,
    /// q·V_ds (eV); the right Fermi level sits this far below the left one.
    pub bias: f64,
    /// Upper end of every energy integral (eV).
    pub energy_cutoff: f64,
}

impl ThermalContext {
    pub const DEFAULT_CUTOFF: f64 = 0.8;

    pub fn new(fermi_level: f64, temperature: f64, kinetic: f64) -> Result<Self> {
        Self::with_kt(fermi_level, temperature, thermal_energy(temperature), kinetic)
    }

    /// For nondimensional runs where k_B·T is given directly.
    pub fn with_kt(fermi_level: f64, temperature: f64, kt: f64, kinetic: f64) -> Result<Self> {
        let ctx = ThermalContext {
            fermi_level,
            temperature,
            kt,
            kinetic,
            bias: 0.0,
            energy_cutoff: Self::DEFAULT_CUTOFF,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    pub fn with_cutoff(mut self, energy_cutoff: f64) -> Result<Self> {
        self.energy_cutoff = energy_cutoff;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.kt > 0.0) {
            return Err(Error::validation("temperature", "must be positive"));
        }
        if !(self.kinetic > 0.0) {
            return Err(Error::validation("kinetic", "must be positive"));
        }
        if !(self.energy_cutoff > self.fermi_level) {
            return Err(Error::validation("energy_cutoff", "must lie above the Fermi level"));
        }
        if !self.bias.is_finite() {
            return Err(Error::validation("bias", "must be finite"));
        }
        Ok(())
    }

    /// `m*·k_B·T/(πħ²)` in nm⁻².
    pub fn prefactor(&self) -> f64 {
        self.kt / (2.0 * PI * self.kinetic)
    }

    pub fn right_fermi_level(&self) -> f64 {
        self.fermi_level - self.bias
    }

    /// Fermi level of the contact a state of the given incidence comes from.
    pub fn contact_fermi_level(&self, side: Incidence) -> f64 {
        match side {
            Incidence::Left => self.fermi_level,
            Incidence::Right => self.right_fermi_level(),
        }
    }
}

/// `ln(1 + eˣ)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Transverse-integrated occupation `F(mu − E)` (nm⁻²).
pub fn fermi_weight(energy: f64, mu: f64, thermal: &ThermalContext) -> f64 {
    thermal.prefactor() * softplus((mu - energy) / thermal.kt)
}

/// Source of scattering states for the density quadrature.
pub trait StateProvider: Sync {
    fn grid(&self) -> &Grid;
    /// Band edges `(V₀, V_N)` of the two leads.
    fn band_edges(&self) -> (f64, f64);
    fn state(&self, energy: f64, incidence: Incidence) -> Result<ScatteringState>;
}

/// Source of `T(E)` for the current integral.
pub trait TransmissionProvider: Sync {
    fn band_edges(&self) -> (f64, f64);
    fn transmission(&self, energy: f64) -> Result<f64>;
}

/// A fixed potential solved with one boundary closure.
#[derive(Debug, Clone)]
pub struct DeviceSolver {
    pub context: SchrodingerContext,
    pub kind: TbcKind,
}

impl DeviceSolver {
    pub fn new(context: SchrodingerContext, kind: TbcKind) -> Self {
        DeviceSolver { context, kind }
    }
}

impl StateProvider for DeviceSolver {
    fn grid(&self) -> &Grid {
        self.context.grid()
    }

    fn band_edges(&self) -> (f64, f64) {
        (self.context.left_potential(), self.context.right_potential())
    }

    fn state(&self, energy: f64, incidence: Incidence) -> Result<ScatteringState> {
        self.context.at_energy(energy).solve(self.kind, incidence)
    }
}

impl TransmissionProvider for DeviceSolver {
    fn band_edges(&self) -> (f64, f64) {
        StateProvider::band_edges(self)
    }

    fn transmission(&self, energy: f64) -> Result<f64> {
        Ok(self.state(energy, Incidence::Left)?.transmission)
    }
}

/// Controls for the density and current integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Tolerance relative to the integral of the bare supply function.
    pub tolerance: f64,
    /// Uniform panels before adaptive refinement.
    pub panels: usize,
    /// Bisection levels per panel. Deeper levels only chase round-off
    /// near sharp resonances, at exponential cost.
    pub max_depth: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            tolerance: 1e-10,
            panels: 256,
            max_depth: 20,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::validation("quadrature.tolerance", "must be positive"));
        }
        if self.panels == 0 {
            return Err(Error::validation("quadrature.panels", "must be at least 1"));
        }
        if self.max_depth == 0 {
            return Err(Error::validation("quadrature.max_depth", "must be at least 1"));
        }
        Ok(())
    }
}

/// Electron density on nodes `−1..=N_x+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    /// nm⁻³
    pub values: RealGridFunction,
    /// Some part of the quadrature hit the depth limit.
    pub depth_exceeded: bool,
    pub evaluations: usize,
}

impl DensityProfile {
    pub fn at(&self, i: isize) -> f64 {
        self.values[i]
    }

    /// Nodal values `0..=N_x` in cm⁻³.
    pub fn per_cm3(&self) -> Vec<f64> {
        self.values.interior().iter().map(|n| n * PER_NM3_TO_PER_CM3).collect()
    }
}

// avoids the k = 0 state, whose boundary relations carry no injection
const EDGE_OFFSET: f64 = 1e-10;

/// `n_i = (1/2π)[∫F(μ_L − E)|ψᴸ_i|² dk + ∫F(μ_R − E)|ψᴿ_i|² dk]`, each
/// integral over the wavenumber of the injecting lead up to the energy
/// cutoff.
pub fn electron_density<P: StateProvider + ?Sized>(
    provider: &P,
    thermal: &ThermalContext,
    quad: &QuadratureConfig,
) -> Result<DensityProfile> {
    thermal.validate()?;
    quad.validate()?;
    let grid = provider.grid().with_ghosts(1)?;
    let n = grid.nx() as isize;
    let (v0, vn) = provider.band_edges();
    let mut total = vec![0.0; grid.storage_len()];
    let mut depth_exceeded = false;
    let mut evaluations = 0;

    for (side, edge) in [(Incidence::Left, v0), (Incidence::Right, vn)] {
        let mu = thermal.contact_fermi_level(side);
        if thermal.energy_cutoff <= edge {
            continue;
        }
        let k_max = ((thermal.energy_cutoff - edge) / thermal.kinetic).sqrt();
        let energy = |k: f64| edge + thermal.kinetic * k.max(EDGE_OFFSET * k_max).powi(2);
        let supply = |k: f64| fermi_weight(energy(k), mu, thermal);

        let scale = adaptive_simpson(supply, &QuadratureSpec::new(0.0, k_max, 1e-3 * quad.tolerance * k_max * thermal.prefactor()))?.value;
        if !(scale > 0.0) {
            continue;
        }
        let spec = QuadratureSpec::new(0.0, k_max, quad.tolerance * scale)
            .with_panels(quad.panels)
            .with_depth(quad.max_depth);
        let result = adaptive_simpson_vec(
            |k| -> Result<Vec<f64>> {
                let w = supply(k);
                if w == 0.0 {
                    return Ok(vec![0.0; (n + 3) as usize]);
                }
                let st = provider.state(energy(k), side)?;
                Ok((-1..=n + 1).map(|i| w * st.psi[i].norm_sqr()).collect())
            },
            &spec,
        )?;
        for (acc, v) in total.iter_mut().zip(&result.values) {
            *acc += v / (2.0 * PI);
        }
        depth_exceeded |= result.depth_exceeded;
        evaluations += result.evaluations;
    }

    for v in total.iter_mut() {
        *v = v.max(0.0);
    }
    Ok(DensityProfile {
        values: RealGridFunction::from_storage(grid, total)?,
        depth_exceeded,
        evaluations,
    })
}

/// Current density result; `value` is in the units of `∫T·ΔF dE` times
/// the caller's scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentDensity {
    /// `(1/2πħ)∫T(E)[F(μ_L − E) − F(μ_R − E)] dE` in eV·nm⁻²/(2πħ) units,
    /// i.e. before multiplying by `q²/(2πħ)`.
    pub integral: f64,
    pub depth_exceeded: bool,
    pub evaluations: usize,
}

impl CurrentDensity {
    /// Physical current density given the material's `current_scale`.
    pub fn scaled(&self, current_scale: f64) -> f64 {
        self.integral * current_scale
    }
}

/// `∫T(E)[F(μ_L − E) − F(μ_R − E)] dE` from the higher band edge to the
/// cutoff. Below the higher edge one lead carries no propagating mode.
pub fn current_density<P: TransmissionProvider + ?Sized>(
    provider: &P,
    thermal: &ThermalContext,
    quad: &QuadratureConfig,
) -> Result<CurrentDensity> {
    thermal.validate()?;
    quad.validate()?;
    let zero = CurrentDensity {
        integral: 0.0,
        depth_exceeded: false,
        evaluations: 0,
    };
    let (v0, vn) = provider.band_edges();
    let lower = v0.max(vn);
    let upper = thermal.energy_cutoff;
    if upper <= lower || thermal.bias == 0.0 {
        return Ok(zero);
    }
    let supply = |e: f64| fermi_weight(e, thermal.fermi_level, thermal) - fermi_weight(e, thermal.right_fermi_level(), thermal);
    let scale = adaptive_simpson(|e| supply(e).abs(), &QuadratureSpec::new(lower, upper, 1e-3 * quad.tolerance * (upper - lower) * thermal.prefactor()))?.value;
    if !(scale > 0.0) {
        return Ok(zero);
    }
    let floor = lower + EDGE_OFFSET * (upper - lower);
    let spec = QuadratureSpec::new(lower, upper, quad.tolerance * scale)
        .with_panels(quad.panels)
        .with_depth(quad.max_depth);
    let result = adaptive_simpson_vec(
        |e| -> Result<Vec<f64>> {
            let w = supply(e);
            if w == 0.0 {
                return Ok(vec![0.0]);
            }
            Ok(vec![w * provider.transmission(e.max(floor))?])
        },
        &spec,
    )?;
    Ok(CurrentDensity {
        integral: result.values[0],
        depth_exceeded: result.depth_exceeded,
        evaluations: result.evaluations,
    })
}

/// Samples `T(E)` on a uniform energy grid (for output files).
pub fn transmission_table<P: TransmissionProvider + ?Sized>(provider: &P, lower: f64, upper: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    use rayon::prelude::*;
    if points < 2 || !(upper > lower) {
        return Err(Error::validation("transmission.points", "need at least two points on a nonempty range"));
    }
    let (v0, vn) = provider.band_edges();
    let edge = v0.max(vn);
    (0..points)
        .into_par_iter()
        .map(|i| {
            let e = lower + (upper - lower) * i as f64 / (points - 1) as f64;
            let t = if e <= edge { 0.0 } else { provider.transmission(e)? };
            Ok((e, t))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::Material;

    fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut s = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    fn resistor_thermal() -> ThermalContext {
        ThermalContext::new(0.318, 300.0, Material::new(0.25, 10.0).kinetic).unwrap()
    }

    fn free_solver(kind: TbcKind) -> DeviceSolver {
        let kin = Material::new(0.25, 10.0).kinetic;
        let g = Grid::new(3.0, 30, 1).unwrap();
        DeviceSolver::new(SchrodingerContext::new(g, vec![0.0; 31], kin, 0.0).unwrap(), kind)
    }

    #[test]
    fn fermi_weight_limits() {
        let th = resistor_thermal();
        let p = th.prefactor();
        assert!((fermi_weight(0.2, 0.2, &th) - p * 2f64.ln()).abs() < 1e-15 * p);
        let w = fermi_weight(0.2 + 40.0 * th.kt, 0.2, &th);
        assert!((w / (p * (-40f64).exp()) - 1.0).abs() < 1e-12);
        // deep below the Fermi level the weight is linear and finite
        let w = fermi_weight(-1e3, 0.2, &th);
        assert!(w.is_finite());
        assert!((w / p - (1e3 + 0.2) / th.kt).abs() < 1e-9);
    }

    #[test]
    fn supply_tail_at_cutoff() {
        let kin = Material::new(0.067, 11.44).kinetic;
        let th = ThermalContext::new(0.0427, 300.0, kin).unwrap();
        assert!(fermi_weight(0.8, th.fermi_level, &th) < 1e-10 * th.prefactor());
        // the resistor's higher Fermi level leaves a larger tail
        let th = resistor_thermal();
        let rel = fermi_weight(0.8, th.fermi_level, &th) / th.prefactor();
        assert!(rel > 1e-10 && rel < 1e-8, "{rel:e}");
    }

    #[test]
    fn rejects_bad_thermal_parameters() {
        assert!(ThermalContext::new(0.3, 0.0, 0.1).is_err());
        assert!(ThermalContext::new(0.9, 300.0, 0.1).is_err());
        assert!(resistor_thermal().with_cutoff(0.1).is_err());
    }

    #[test]
    fn empty_contacts_give_zero_density() {
        let mut th = resistor_thermal();
        th.fermi_level = -10.0;
        let n = electron_density(&free_solver(TbcKind::D4tbc), &th, &QuadratureConfig::default()).unwrap();
        assert!(n.values.storage().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn free_electron_density_matches_dense_oracle() {
        let th = resistor_thermal();
        let k_max = (th.energy_cutoff / th.kinetic).sqrt();
        let oracle = composite_simpson(|k| fermi_weight(th.kinetic * k * k, th.fermi_level, &th), 0.0, k_max, 1_000_000) / PI;
        // |ψ|² ≡ 1 holds exactly only for the discrete closure; the exact
        // one carries an O(Δx⁴) modulus ripple
        for (kind, tol) in [(TbcKind::D4tbc, 1e-8), (TbcKind::Adtbc, 1e-6)] {
            let n = electron_density(&free_solver(kind), &th, &QuadratureConfig::default()).unwrap();
            assert!(!n.depth_exceeded);
            for i in -1..=31 {
                assert!((n.at(i) / oracle - 1.0).abs() < tol, "{kind} node {i}: {} vs {oracle}", n.at(i));
            }
        }
    }

    #[test]
    fn tighter_tolerance_moves_density_less_than_previous_tolerance() {
        let kin = Material::new(0.25, 10.0).kinetic;
        let g = Grid::new(6.0, 60, 1).unwrap();
        let pot: Vec<f64> = (0..=60).map(|j| 0.1 * (-((j as f64 - 30.0) / 8.0).powi(2)).exp()).collect();
        let solver = DeviceSolver::new(SchrodingerContext::new(g, pot, kin, 0.0).unwrap(), TbcKind::D4tbc);
        let th = resistor_thermal().with_bias(0.05);
        let tol = 1e-6;
        let coarse = QuadratureConfig { tolerance: tol, panels: 8, ..Default::default() };
        let fine = QuadratureConfig { tolerance: tol / 2.0, ..coarse };
        let a = electron_density(&solver, &th, &coarse).unwrap();
        let b = electron_density(&solver, &th, &fine).unwrap();
        let scale = a.values.storage().iter().cloned().fold(0.0, f64::max);
        for i in -1..=61 {
            assert!((a.at(i) - b.at(i)).abs() <= tol * scale);
        }
    }

    #[test]
    fn zero_bias_current_is_exactly_zero() {
        let th = resistor_thermal();
        let i = current_density(&free_solver(TbcKind::D4tbc), &th, &QuadratureConfig::default()).unwrap();
        assert_eq!(i.integral, 0.0);
    }

    struct Transparent;

    impl TransmissionProvider for Transparent {
        fn band_edges(&self) -> (f64, f64) {
            (0.0, 0.0)
        }
        fn transmission(&self, _: f64) -> Result<f64> {
            Ok(1.0)
        }
    }

    #[test]
    fn unit_transmission_current_matches_dense_oracle() {
        let th = resistor_thermal().with_bias(0.01);
        let oracle = composite_simpson(
            |e| fermi_weight(e, th.fermi_level, &th) - fermi_weight(e, th.right_fermi_level(), &th),
            0.0,
            th.energy_cutoff,
            1_000_000,
        );
        let i = current_density(&Transparent, &th, &QuadratureConfig::default()).unwrap();
        assert!((i.integral / oracle - 1.0).abs() < 1e-8, "{} vs {oracle}", i.integral);
    }

    #[test]
    fn transmission_table_is_zero_below_the_leads() {
        let mut s = free_solver(TbcKind::Adtbc);
        s.context = SchrodingerContext::new(*s.context.grid(), vec![0.1; 31], s.context.kinetic(), 0.0).unwrap();
        let t = transmission_table(&s, 0.0, 0.4, 5).unwrap();
        assert_eq!(t[0].1, 0.0);
        assert!((t[4].1 - 1.0).abs() < 1e-10);
    }
}
