//! Physical constants and the nm/eV unit system.

use serde::{Deserialize, Serialize};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Free electron mass (kg), as used for the device parameter sets.
pub const ELECTRON_MASS: f64 = 9.1e-31;
/// Vacuum permittivity (F/m), as used for the device parameter sets.
pub const VACUUM_PERMITTIVITY: f64 = 8.85e-12;

/// nm⁻³ → cm⁻³.
pub const PER_NM3_TO_PER_CM3: f64 = 1e21;

/// Thermal energy k_B·T in eV.
pub fn thermal_energy(temperature_kelvin: f64) -> f64 {
    BOLTZMANN * temperature_kelvin / ELEMENTARY_CHARGE
}

/// Material-dependent scale factors in the nm/eV system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// ħ²/(2m*) in eV·nm².
    pub kinetic: f64,
    /// q²/ε in eV·nm; multiplies a density in nm⁻³ to give eV·nm⁻².
    pub coulomb: f64,
    /// Converts ∫T(E)ΔF dE (eV·nm⁻²) into a current density (A·cm⁻²).
    pub current_scale: f64,
}

impl Material {
    /// GaAs-like parabolic band with effective mass `mass_ratio·m₀` and
    /// relative permittivity `permittivity_ratio`.
    pub fn new(mass_ratio: f64, permittivity_ratio: f64) -> Self {
        let mass = mass_ratio * ELECTRON_MASS;
        // J·m² → eV·nm²
        let kinetic = HBAR * HBAR / (2.0 * mass) / ELEMENTARY_CHARGE * 1e18;
        // q²/ε in J·m → eV·nm
        let coulomb = ELEMENTARY_CHARGE / (permittivity_ratio * VACUUM_PERMITTIVITY) * 1e9;
        let current_scale = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE
            / (2.0 * std::f64::consts::PI * HBAR)
            * 1e14;
        Material {
            kinetic,
            coulomb,
            current_scale,
        }
    }

    /// Dimensionless units with a given kinetic prefactor (ħ = m* = 1 gives 1/2).
    pub fn nondimensional(kinetic: f64) -> Self {
        Material {
            kinetic,
            coulomb: 1.0,
            current_scale: 1.0 / (2.0 * std::f64::consts::PI),
        }
    }

    /// Wavenumber for kinetic energy `e` (principal branch, so negative
    /// energies give a positive imaginary part).
    pub fn wavenumber(&self, e: f64) -> num_complex::Complex64 {
        num_complex::Complex64::new(e / self.kinetic, 0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_electron_kinetic_prefactor() {
        // ħ²/2m₀ ≈ 0.0381 eV·nm² (slightly off CODATA because m₀ = 9.1e-31)
        let m = Material::new(1.0, 1.0);
        assert!((m.kinetic - 0.038_16).abs() < 1e-4, "{}", m.kinetic);
    }

    #[test]
    fn room_temperature_kt() {
        assert!((thermal_energy(300.0) - 0.025_852).abs() < 1e-6);
    }

    #[test]
    fn wavenumber_branches() {
        let m = Material::nondimensional(0.5);
        let k = m.wavenumber(0.5);
        assert!((k.re - 1.0).abs() < 1e-15 && k.im == 0.0);
        let k = m.wavenumber(-0.5);
        assert!(k.re.abs() < 1e-15 && (k.im - 1.0).abs() < 1e-15);
    }
}
