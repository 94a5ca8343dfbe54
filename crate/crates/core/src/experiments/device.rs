use serde::{Deserialize, Serialize};

use super::mollify::{mollify, Profile};
use crate::error::{Error, Result};
use crate::numerics::Grid;
use crate::schrodinger::{Interface, TbcKind};
use crate::statistics::ThermalContext;
use crate::units::{Material, PER_NM3_TO_PER_CM3};

/// `value` on the closed interval `[start, end]` (nm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

impl Region {
    pub fn new(start: f64, end: f64, value: f64) -> Self {
        Region { start, end, value }
    }
}

/// Piecewise-constant profile over closed intervals. Where two intervals
/// touch the larger value wins; uncovered points read zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant<'a> {
    regions: &'a [Region],
    length: f64,
}

impl<'a> PiecewiseConstant<'a> {
    pub fn new(regions: &'a [Region], length: f64) -> Self {
        PiecewiseConstant { regions, length }
    }
}

// breakpoints closer than this (relative to the device length) coincide
const SNAP: f64 = 1e-9;

impl Profile for PiecewiseConstant<'_> {
    fn value(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.length);
        let eps = SNAP * self.length;
        self.regions
            .iter()
            .filter(|r| x >= r.start - eps && x <= r.end + eps)
            .map(|r| r.value)
            .reduce(f64::max)
            .unwrap_or(0.0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.regions.iter().flat_map(|r| [r.start, r.end]).collect()
    }
}

/// `V_s` fixed in advance instead of solved for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Prescribed {
    /// Zero up to `start`, falling linearly to `−q·V_ds` at `end`, flat after.
    Ramp { start: f64, end: f64 },
}

impl Prescribed {
    /// `V_s(x)` in eV at drain bias `bias` (V).
    pub fn value(&self, x: f64, bias: f64) -> f64 {
        match *self {
            Prescribed::Ramp { start, end } => -bias * ((x - start) / (end - start)).clamp(0.0, 1.0),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Prescribed::Ramp { start, end } => vec![start, end],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Smoothing {
    /// Convolve the doping with the mollifier.
    pub doping: bool,
    /// Convolve the band profile (plus any prescribed `V_s`).
    pub potential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "lowercase", deny_unknown_fields)]
pub enum Units {
    /// nm, eV, effective mass and permittivity from the ratios.
    #[default]
    Physical,
    /// Fixed `ħ²/2m*` and `k_B·T`; the ratios are ignored.
    Nondimensional { kinetic: f64, kt: f64 },
}

/// A one-dimensional device in laboratory units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub name: String,
    /// nm
    pub length: f64,
    pub nx: usize,
    /// m*/m₀
    pub mass_ratio: f64,
    /// ε/ε₀
    pub permittivity_ratio: f64,
    /// K
    pub temperature: f64,
    /// eV
    pub fermi_level: f64,
    /// cm⁻³; must tile `[0, L]`
    pub doping: Vec<Region>,
    /// Band profile `V_b` (eV)
    #[serde(default)]
    pub band: Vec<Region>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prescribed: Option<Prescribed>,
    #[serde(default)]
    pub smoothing: Smoothing,
    #[serde(default)]
    pub units: Units,
    #[serde(default = "default_scheme")]
    pub scheme: TbcKind,
    /// Energy for single-energy studies (eV).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_energy: Option<f64>,
    /// One-sided rows at band jumps that land on nodes.
    #[serde(default)]
    pub interface_correction: bool,
}

fn default_scheme() -> TbcKind {
    TbcKind::D4tbc
}

impl DeviceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::validation("device.length", "must be positive"));
        }
        if self.nx < 4 {
            return Err(Error::validation("grid.nx", "must be at least 4"));
        }
        if !(self.mass_ratio > 0.0) {
            return Err(Error::validation("device.mass_ratio", "must be positive"));
        }
        if !(self.permittivity_ratio > 0.0) {
            return Err(Error::validation("device.permittivity_ratio", "must be positive"));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::validation("device.temperature", "must be positive"));
        }
        if !self.fermi_level.is_finite() {
            return Err(Error::validation("device.fermi_level", "must be finite"));
        }
        if let Units::Nondimensional { kinetic, kt } = self.units {
            if !(kinetic > 0.0 && kt > 0.0) {
                return Err(Error::validation("device.units", "kinetic and kt must be positive"));
            }
        }
        self.validate_doping()?;
        self.validate_band()?;
        if let Some(Prescribed::Ramp { start, end }) = self.prescribed {
            if !(0.0 <= start && start < end && end <= self.length) {
                return Err(Error::validation("device.prescribed", "ramp needs 0 ≤ start < end ≤ length"));
            }
        }
        Ok(())
    }

    fn validate_doping(&self) -> Result<()> {
        let eps = SNAP * self.length;
        let field = "doping.regions";
        if self.doping.is_empty() {
            return Err(Error::validation(field, "at least one region is required"));
        }
        let mut sorted = self.doping.clone();
        sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
        let mut cursor = 0.0;
        for r in &sorted {
            if !(r.value.is_finite() && r.value >= 0.0) {
                return Err(Error::validation(field, format!("density {} must be finite and nonnegative", r.value)));
            }
            if !(r.end > r.start) {
                return Err(Error::validation(field, format!("empty region [{}, {}]", r.start, r.end)));
            }
            if r.start < cursor - eps {
                return Err(Error::validation(field, format!("region starting at {} overlaps its neighbour", r.start)));
            }
            if r.start > cursor + eps {
                return Err(Error::validation(field, format!("gap between {} and {}", cursor, r.start)));
            }
            cursor = r.end;
        }
        if (cursor - self.length).abs() > eps {
            return Err(Error::validation(field, format!("regions end at {cursor}, device at {}", self.length)));
        }
        Ok(())
    }

    fn validate_band(&self) -> Result<()> {
        let eps = SNAP * self.length;
        let mut sorted = self.band.clone();
        sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
        for (i, r) in sorted.iter().enumerate() {
            if !r.value.is_finite() || !(r.end > r.start) || r.start < -eps || r.end > self.length + eps {
                return Err(Error::validation("band.regions", format!("bad region [{}, {}]", r.start, r.end)));
            }
            if i > 0 && r.start < sorted[i - 1].end - eps {
                return Err(Error::validation("band.regions", format!("region starting at {} overlaps its neighbour", r.start)));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.length, self.nx, 1)
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn material(&self) -> Material {
        match self.units {
            Units::Physical => Material::new(self.mass_ratio, self.permittivity_ratio),
            Units::Nondimensional { kinetic, .. } => Material::nondimensional(kinetic),
        }
    }

    pub fn thermal(&self) -> Result<ThermalContext> {
        let kinetic = self.material().kinetic;
        match self.units {
            Units::Physical => ThermalContext::new(self.fermi_level, self.temperature, kinetic),
            Units::Nondimensional { kt, .. } => ThermalContext::with_kt(self.fermi_level, self.temperature, kt, kinetic),
        }
    }

    fn sample(&self, profile: &dyn Profile, smooth: bool) -> Result<Vec<f64>> {
        let grid = self.grid()?;
        if smooth {
            mollify(profile, &grid)
        } else {
            Ok(grid.nodes().iter().map(|&x| profile.value(x)).collect())
        }
    }

    /// Nodal doping `0..=N_x` in nm⁻³.
    pub fn doping_nodes(&self) -> Result<Vec<f64>> {
        let profile = PiecewiseConstant::new(&self.doping, self.length);
        let cm3 = self.sample(&profile, self.smoothing.doping)?;
        Ok(cm3.iter().map(|d| d / PER_NM3_TO_PER_CM3).collect())
    }

    /// `V_b` plus, when prescribed, `V_s` at drain bias `bias` (V).
    pub fn fixed_potential(&self, bias: f64) -> Result<Vec<f64>> {
        let band = PiecewiseConstant::new(&self.band, self.length);
        let profile = FixedPotential {
            band,
            prescribed: self.prescribed,
            bias,
        };
        self.sample(&profile, self.smoothing.potential)
    }

    /// Jumps of the band profile sitting on nodes, with `V_s` added, for
    /// [`crate::SchrodingerContext::with_interfaces`]. Empty unless
    /// `interface_correction` is set and the potential is unsmoothed.
    pub fn interfaces(&self, potential_s: &[f64]) -> Vec<Interface> {
        if !self.interface_correction || self.smoothing.potential {
            return Vec::new();
        }
        let dx = self.dx();
        let band = PiecewiseConstant::new(&self.band, self.length);
        let mut out: Vec<Interface> = Vec::new();
        let mut points = band.breakpoints();
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() < SNAP * self.length);
        for x in points {
            let node = (x / dx).round();
            if (node * dx - x).abs() > SNAP * self.length || node < 2.0 || node as usize + 2 > self.nx {
                continue;
            }
            let j = node as usize;
            let below = band.value(x - 0.5 * dx);
            let above = band.value(x + 0.5 * dx);
            if below != above {
                let vs = potential_s.get(j).copied().unwrap_or(0.0);
                out.push(Interface {
                    node: j,
                    below: below + vs,
                    above: above + vs,
                });
            }
        }
        out
    }

    /// TOML text of this device.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidSystem(format!("cannot serialize device: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: DeviceSpec = toml::from_str(text).map_err(|e| super::parse_error(text, &e))?;
        spec.validate()?;
        Ok(spec)
    }
}

struct FixedPotential<'a> {
    band: PiecewiseConstant<'a>,
    prescribed: Option<Prescribed>,
    bias: f64,
}

impl Profile for FixedPotential<'_> {
    fn value(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.band.length);
        self.band.value(x) + self.prescribed.map_or(0.0, |p| p.value(x, self.bias))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.band.breakpoints();
        if let Some(p) = self.prescribed {
            b.extend(p.breakpoints());
        }
        b
    }
}
