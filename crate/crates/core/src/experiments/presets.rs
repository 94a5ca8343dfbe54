use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::device::{DeviceSpec, Prescribed, Region, Smoothing, Units};
use crate::error::{Error, Result};
use crate::selfconsistent::BiasSweep;
use crate::schrodinger::TbcKind;

/// Built-in devices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// 30 nm n⁺⁺–n⁺–n⁺⁺ resistor, self-consistent.
    Resistor,
    /// 135 nm double-barrier diode with a prescribed linear potential drop.
    RtdA,
    /// The same diode with the potential solved self-consistently.
    RtdB,
    /// Nondimensional free particle (`ħ = m* = 1`, `E = 0.5`, `L = 10`).
    FreeParticle,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Resistor, Preset::RtdA, Preset::RtdB, Preset::FreeParticle];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Resistor => "resistor",
            Preset::RtdA => "rtd_a",
            Preset::RtdB => "rtd_b",
            Preset::FreeParticle => "free_particle",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Preset::Resistor => "n++/n+/n++ resistor, 30 nm, self-consistent",
            Preset::RtdA => "double-barrier RTD, 135 nm, prescribed linear drop",
            Preset::RtdB => "double-barrier RTD, 135 nm, self-consistent",
            Preset::FreeParticle => "free particle, hbar = m* = 1, E = 0.5, L = 10",
        }
    }

    pub fn build(&self) -> DeviceSpec {
        match self {
            Preset::Resistor => DeviceSpec {
                name: self.name().into(),
                length: 30.0,
                nx: 100,
                mass_ratio: 0.25,
                permittivity_ratio: 10.0,
                temperature: 300.0,
                fermi_level: 0.318,
                doping: vec![
                    Region::new(0.0, 4.5, 1e20),
                    Region::new(4.5, 25.5, 5e19),
                    Region::new(25.5, 30.0, 1e20),
                ],
                band: Vec::new(),
                prescribed: None,
                smoothing: Smoothing::default(),
                units: Units::Physical,
                scheme: TbcKind::D4tbc,
                probe_energy: None,
                interface_correction: false,
            },
            Preset::RtdA | Preset::RtdB => DeviceSpec {
                name: self.name().into(),
                length: 135.0,
                nx: 270,
                mass_ratio: 0.067,
                permittivity_ratio: 11.44,
                temperature: 300.0,
                fermi_level: 0.0427,
                doping: vec![
                    Region::new(0.0, 50.0, 1e18),
                    Region::new(50.0, 85.0, 5e15),
                    Region::new(85.0, 135.0, 1e18),
                ],
                band: vec![Region::new(60.0, 65.0, 0.3), Region::new(70.0, 75.0, 0.3)],
                prescribed: match self {
                    Preset::RtdA => Some(Prescribed::Ramp { start: 50.0, end: 85.0 }),
                    _ => None,
                },
                smoothing: Smoothing {
                    doping: true,
                    potential: false,
                },
                units: Units::Physical,
                scheme: TbcKind::D4tbc,
                probe_energy: None,
                interface_correction: false,
            },
            Preset::FreeParticle => DeviceSpec {
                name: self.name().into(),
                length: 10.0,
                nx: 100,
                mass_ratio: 1.0,
                permittivity_ratio: 1.0,
                temperature: 1.0,
                fermi_level: 0.0,
                doping: vec![Region::new(0.0, 10.0, 0.0)],
                band: Vec::new(),
                prescribed: None,
                smoothing: Smoothing::default(),
                units: Units::Nondimensional { kinetic: 0.5, kt: 0.025 },
                scheme: TbcKind::D4tbc,
                probe_energy: Some(0.5),
                interface_correction: false,
            },
        }
    }

    /// Drain-bias sweep (V) used for I-V curves.
    pub fn default_sweep(&self) -> BiasSweep {
        match self {
            Preset::Resistor => BiasSweep::new(0.0, 0.25, 0.05),
            Preset::RtdA | Preset::RtdB => BiasSweep::new(0.0, 0.4, 0.02),
            Preset::FreeParticle => BiasSweep::new(0.0, 0.0, 0.02),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// The device behind a preset name.
pub fn build_preset(name: &str) -> Result<DeviceSpec> {
    Ok(name.parse::<Preset>()?.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resistor_parameters() {
        let d = build_preset("resistor").unwrap();
        assert_eq!((d.length, d.nx, d.fermi_level), (30.0, 100, 0.318));
        assert_eq!(d.doping[0], Region::new(0.0, 4.5, 1e20));
        assert_eq!(d.doping[2], Region::new(25.5, 30.0, 1e20));
        assert!(!d.smoothing.doping);
    }

    #[test]
    fn rtd_b_parameters() {
        let d = build_preset("rtd_b").unwrap();
        assert_eq!(d.length, 135.0);
        assert_eq!(d.dx(), 0.5);
        assert_eq!(d.temperature, 300.0);
        assert!(d.smoothing.doping && d.prescribed.is_none());
        let s = Preset::RtdB.default_sweep();
        assert!((s.step - 0.02).abs() < 1e-15);
    }

    #[test]
    fn rtd_a_ramp() {
        let d = build_preset("rtd_a").unwrap();
        let p = d.prescribed.unwrap();
        assert_eq!(p.value(40.0, 0.2), 0.0);
        assert!((p.value(67.5, 0.2) + 0.1).abs() < 1e-15);
        assert_eq!(p.value(100.0, 0.2), -0.2);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(build_preset("mosfet"), Err(Error::UnknownPreset(n)) if n == "mosfet"));
    }

    #[test]
    fn all_presets_validate() {
        for p in Preset::ALL {
            p.build().validate().unwrap();
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
    }
}
