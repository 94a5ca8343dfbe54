//! Config files, run orchestration and output files for the `qdev` binary.
//!
//! A config names a preset or carries an inline `[device]` table; every
//! other section is optional and falls back to the preset's defaults.
//!
//! ```toml
//! preset = "rtd_b"
//! scheme = "adtbc"
//!
//! [grid]
//! nx = 270
//!
//! [sweep]
//! start = 0.0
//! stop = 0.4
//! step = 0.02
//!
//! [output]
//! dir = "rtd_b_dsp2"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{convergence_study, parse_error, ConvergenceReport, DeviceSpec, Preset};
use crate::schrodinger::{Incidence, SchrodingerContext, TbcKind};
use crate::selfconsistent::{bias_sweep, BiasSweep, SelfConsistentConfig, SelfConsistentResult};
use crate::statistics::{transmission_table, TransmissionProvider};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Signed so that a negative count is reported as a validation error.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub iv: bool,
    pub profiles: bool,
    pub transmission: bool,
    pub convergence: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("qdev-out"),
            iv: true,
            profiles: true,
            transmission: true,
            convergence: false,
        }
    }
}

/// Energy window of the `T(E)` tables; open ends default to the higher
/// lead band edge and the energy cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransmissionSection {
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

impl Default for TransmissionSection {
    fn default() -> Self {
        TransmissionSection {
            points: 801,
            lower: None,
            upper: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    /// Empty picks `{100, 200, 400, 800}` for scattering studies and
    /// `{50, 100, 200, 400}` for self-consistent ones.
    pub grids: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_nx: Option<usize>,
    /// Doping smoothing is forced on unless this is set.
    pub raw_doping: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<DeviceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<TbcKind>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<BiasSweep>,
    #[serde(default)]
    pub selfconsistent: SelfConsistentConfig,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub transmission: TransmissionSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
}

/// Command-line overrides applied on top of a parsed config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scheme: Option<TbcKind>,
    pub nx: Option<i64>,
    pub out: Option<PathBuf>,
}

/// Parses and validates a config file body.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&fs::read_to_string(path)?)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.resolve().map(|_| ())
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(s) = overrides.scheme {
            self.scheme = Some(s);
        }
        if let Some(n) = overrides.nx {
            self.grid.nx = Some(n);
        }
        if let Some(out) = &overrides.out {
            self.output.dir = out.clone();
        }
    }

    /// The effective config: inline device, grid, scheme, sweep and
    /// convergence grids all filled in.
    pub fn resolve(&self) -> Result<RunConfig> {
        let (mut device, preset) = match (&self.preset, &self.device) {
            (Some(_), Some(_)) => return Err(Error::validation("device", "give either `preset` or a `[device]` table, not both")),
            (None, None) => return Err(Error::validation("device", "a `preset` or a `[device]` table is required")),
            (Some(name), None) => {
                let p: Preset = name.parse()?;
                (p.build(), Some(p))
            }
            (None, Some(d)) => (d.clone(), None),
        };
        if let Some(nx) = self.grid.nx {
            if nx < 4 {
                return Err(Error::validation("grid.nx", format!("need at least 4 cells, got {nx}")));
            }
            device.nx = nx as usize;
        }
        if let Some(s) = self.scheme {
            device.scheme = s;
        }
        device.validate()?;

        let sweep = self
            .sweep
            .or(preset.map(|p| p.default_sweep()))
            .unwrap_or(BiasSweep::new(0.0, 0.0, 0.02));
        sweep.validate()?;
        self.selfconsistent.validate()?;
        if self.transmission.points < 2 {
            return Err(Error::validation("transmission.points", "need at least 2"));
        }

        let mut convergence = self.convergence.clone();
        if convergence.grids.is_empty() {
            convergence.grids = if device.probe_energy.is_some() {
                vec![100, 200, 400, 800]
            } else {
                vec![50, 100, 200, 400]
            };
        }
        if convergence.reference_nx.is_none() && device.probe_energy.is_none() {
            convergence.reference_nx = convergence.grids.last().map(|n| 2 * n);
        }
        if convergence.grids.windows(2).any(|w| w[1] <= w[0]) || convergence.grids.iter().any(|&n| n < 4) {
            return Err(Error::validation("convergence.grids", "must increase and have at least 4 cells each"));
        }
        if let Some(r) = convergence.reference_nx {
            if convergence.grids.iter().any(|&n| r % n != 0 || r == n) {
                return Err(Error::validation("convergence.reference_nx", "must be a strict multiple of every grid"));
            }
        }

        Ok(RunConfig {
            preset: None,
            scheme: Some(device.scheme),
            grid: GridSection {
                nx: Some(device.nx as i64),
            },
            device: Some(device),
            sweep: Some(sweep),
            selfconsistent: self.selfconsistent.clone(),
            output: self.output.clone(),
            transmission: self.transmission.clone(),
            convergence,
        })
    }

    fn parts(&self) -> (&DeviceSpec, TbcKind, BiasSweep) {
        let device = self.device.as_ref().expect("resolved config has a device");
        (device, device.scheme, self.sweep.expect("resolved config has a sweep"))
    }
}

/// Shortest decimal that parses back to the same `f64`, switching to
/// exponent form for very large or small magnitudes.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn bias_tag(bias: f64) -> String {
    format!("{bias:.4}")
}

/// Machine-readable form of an error.
pub fn error_json(err: &Error) -> String {
    let mut value = json!({ "error": { "kind": err.kind(), "message": err.to_string() } });
    if let Error::Validation { field, .. } = err {
        value["error"]["field"] = json!(field);
    }
    if let Error::Parse { line, column, .. } = err {
        value["error"]["line"] = json!(line);
        value["error"]["column"] = json!(column);
    }
    serde_json::to_string_pretty(&value).expect("json value serializes")
}

/// What a run produced.
#[derive(Debug)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub results: Vec<SelfConsistentResult>,
    pub failures: Vec<(f64, Error)>,
    pub convergence: Option<ConvergenceReport>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.files.push(path);
        Ok(())
    }
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(format_float).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn transmission_csv<P: TransmissionProvider>(provider: &P, section: &TransmissionSection, cutoff: f64) -> Result<String> {
    let (v0, vn) = provider.band_edges();
    let lower = section.lower.unwrap_or(v0.max(vn));
    let upper = section.upper.unwrap_or(cutoff);
    let table = transmission_table(provider, lower, upper, section.points)?;
    Ok(csv("E_eV,T", table.into_iter().map(|(e, t)| vec![e, t])))
}

/// Runs the study described by `config` and writes its files.
///
/// Devices with a probe energy get a single scattering state
/// (`state.csv`) instead of a bias sweep.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let resolved = config.resolve()?;
    let (device, scheme, sweep) = resolved.parts();
    let mut writer = Writer::new(&resolved.output.dir)?;
    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut points = Vec::new();

    if let Some(energy) = device.probe_energy {
        let grid = device.grid()?;
        let kinetic = device.material().kinetic;
        let ctx = SchrodingerContext::new(grid, device.fixed_potential(0.0)?, kinetic, energy)?;
        let state = ctx.solve(scheme, Incidence::Left)?;
        let rows = grid.nodes().into_iter().zip(state.psi.interior()).map(|(x, z)| vec![x, z.re, z.im, z.norm()]);
        writer.write("state.csv", &csv("x,re_psi,im_psi,abs_psi", rows))?;
        points.push(json!({
            "energy": energy,
            "transmission": state.transmission,
            "reflection_re": state.reflection.re,
            "reflection_im": state.reflection.im,
            "residual": state.residual,
            "oscillation": crate::experiments::oscillation_metric(&state),
        }));
    } else {
        for point in bias_sweep(device, scheme, &sweep.points(), &resolved.selfconsistent)? {
            match point.result {
                Ok(r) => {
                    let tag = bias_tag(r.bias);
                    if resolved.output.profiles {
                        let n = r.density.per_cm3();
                        let rows = r.grid.nodes().into_iter().enumerate().map(|(i, x)| vec![x, r.potential[i], n[i]]);
                        writer.write(&format!("profile_{tag}.csv"), &csv("x_nm,V_eV,n_cm3", rows))?;
                    }
                    if resolved.output.transmission {
                        let body = transmission_csv(&r.solver, &resolved.transmission, resolved.selfconsistent.energy_cutoff)?;
                        writer.write(&format!("transmission_{tag}.csv"), &body)?;
                    }
                    points.push(json!({
                        "v_ds_V": r.bias,
                        "current": r.current,
                        "outer_iterations": r.outer_iterations,
                        "newton_iterations": r.newton_iterations,
                        "final_update": r.history.last(),
                        "quadrature_warning": r.quadrature_warning,
                    }));
                    results.push(r);
                }
                Err(e) => failures.push((point.bias, e)),
            }
        }
        if resolved.output.iv {
            writer.write("iv.csv", &csv("v_ds_V,current", results.iter().map(|r| vec![r.bias, r.current])))?;
        }
    }

    let convergence = if resolved.output.convergence {
        let report = study(&resolved)?;
        writer.write("convergence.csv", &report.to_csv())?;
        Some(report)
    } else {
        None
    };

    let summary = json!({
        "device": device.name,
        "scheme": scheme.as_str(),
        "coupled_system": scheme.coupled_name(),
        "grid": { "nx": device.nx, "dx_nm": device.dx(), "length_nm": device.length },
        "tolerances": {
            "outer": resolved.selfconsistent.tolerance,
            "newton": resolved.selfconsistent.newton.tolerance,
            "quadrature": resolved.selfconsistent.quadrature.tolerance,
        },
        "points": points,
        "failures": failures.iter().map(|(b, e)| json!({
            "v_ds_V": b,
            "kind": e.kind(),
            "message": e.to_string(),
        })).collect::<Vec<_>>(),
        "convergence": convergence,
        "config": resolved,
    });
    writer.write("summary.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;

    Ok(RunReport {
        out_dir: resolved.output.dir.clone(),
        files: writer.files,
        results,
        failures,
        convergence,
    })
}

fn study(resolved: &RunConfig) -> Result<ConvergenceReport> {
    let (device, scheme, _) = resolved.parts();
    let mut device = device.clone();
    if !resolved.convergence.raw_doping {
        device.smoothing.doping = true;
    }
    let c = &resolved.convergence;
    convergence_study(&device, scheme, &c.grids, c.reference_nx.unwrap_or(0), &resolved.selfconsistent)
}

/// Grid-refinement study for the config's device and scheme; writes
/// `convergence.csv` into the output directory.
pub fn study_convergence(config: &RunConfig) -> Result<(ConvergenceReport, PathBuf)> {
    let resolved = config.resolve()?;
    let report = study(&resolved)?;
    let mut writer = Writer::new(&resolved.output.dir)?;
    writer.write("convergence.csv", &report.to_csv())?;
    Ok((report, writer.files.remove(0)))
}

/// A complete config file with `device` inline, every default spelled out.
pub fn device_config(device: &DeviceSpec) -> Result<String> {
    let config = RunConfig {
        device: Some(device.clone()),
        ..RunConfig::default()
    };
    toml::to_string(&config).map_err(|e| Error::InvalidSystem(format!("cannot serialize config: {e}")))
}

/// One line per preset: name and description.
pub fn presets_listing() -> String {
    Preset::ALL.iter().map(|p| format!("{:<14} {}\n", p.name(), p.description())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_preset_config_gets_defaults() {
        let c = parse_config("preset = \"rtd_b\"\n").unwrap();
        let r = c.resolve().unwrap();
        let d = r.device.as_ref().unwrap();
        assert_eq!(d.nx, 270);
        assert_eq!(r.sweep.unwrap(), BiasSweep::new(0.0, 0.4, 0.02));
        assert_eq!(r.selfconsistent.tolerance, 1e-10);
        assert_eq!(r.selfconsistent.energy_cutoff, 0.8);
        assert_eq!(r.scheme, Some(TbcKind::D4tbc));
    }

    #[test]
    fn negative_nx_names_the_field() {
        let e = parse_config("preset = \"resistor\"\n[grid]\nnx = -10\n").unwrap_err();
        assert!(matches!(&e, Error::Validation { field, .. } if field == "grid.nx"), "{e}");
    }

    #[test]
    fn overlapping_doping_names_the_field() {
        let mut d = Preset::Resistor.build();
        d.doping[1].start = 4.0;
        let e = parse_config(&device_config(&d).unwrap()).unwrap_err();
        assert!(matches!(&e, Error::Validation { field, .. } if field == "doping.regions"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let e = parse_config("preset = \"resistor\"\n\n[grid]\nnx = 100\ncells = 3\n").unwrap_err();
        match e {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (5, 1)),
            other => panic!("{other}"),
        }
        assert!(matches!(parse_config("preset = \"mosfet\"\n"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 0.06, 1e20, 5e19, -0.2, 1.25e-7, 3.0, 123456.789, f64::MIN_POSITIVE] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_float(1e20), "1e20");
        assert_eq!(format_float(0.06), "0.06");
    }

    #[test]
    fn error_json_carries_the_field() {
        let v: serde_json::Value = serde_json::from_str(&error_json(&Error::validation("grid.nx", "bad"))).unwrap();
        assert_eq!(v["error"]["kind"], "validation_error");
        assert_eq!(v["error"]["field"], "grid.nx");
    }

    #[test]
    fn preset_configs_parse_back() {
        for p in Preset::ALL {
            let c = parse_config(&device_config(&p.build()).unwrap()).unwrap();
            assert_eq!(c.device.unwrap(), p.build());
        }
    }

    #[test]
    fn resolved_config_round_trips() {
        let r = parse_config("preset = \"rtd_a\"\n").unwrap().resolve().unwrap();
        let text = toml::to_string(&r).unwrap();
        assert_eq!(parse_config(&text).unwrap().resolve().unwrap(), r);
    }

    #[test]
    fn free_particle_run_writes_state_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = parse_config("preset = \"free_particle\"\n").unwrap();
        c.apply(&Overrides {
            out: Some(dir.path().to_path_buf()),
            ..Default::default()
        });
        let report = run(&c).unwrap();
        let names: Vec<String> = report.files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["state.csv", "summary.json"]);
        let state = fs::read_to_string(dir.path().join("state.csv")).unwrap();
        let mut lines = state.lines();
        assert_eq!(lines.next(), Some("x,re_psi,im_psi,abs_psi"));
        for line in lines {
            let abs: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!((abs - 1.0).abs() < 1e-11, "{line}");
        }
    }
}
