use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::device::DeviceSpec;
use crate::error::{Error, Result};
use crate::schrodinger::{Incidence, ScatteringState, SchrodingerContext, TbcKind};
use crate::selfconsistent::{run_self_consistent, SelfConsistentConfig};

/// `max_j ||ψ_j| − 1|` over the physical nodes.
pub fn oscillation_metric(state: &ScatteringState) -> f64 {
    state.psi.interior().iter().fold(0.0, |m, z| m.max((z.norm() - 1.0).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceEntry {
    pub nx: usize,
    pub dx: f64,
    pub error: f64,
    /// `log₂(E_{2Δx}/E_{Δx})`, absent on the coarsest grid.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub scheme: TbcKind,
    /// What the errors are measured against.
    pub reference: String,
    pub entries: Vec<ConvergenceEntry>,
}

impl ConvergenceReport {
    fn from_errors(scheme: TbcKind, reference: String, errors: Vec<(usize, f64, f64)>) -> Self {
        let mut entries: Vec<ConvergenceEntry> = Vec::with_capacity(errors.len());
        for (nx, dx, error) in errors {
            let order = entries.last().map(|p| (p.error / error).ln() / (p.dx / dx).ln());
            entries.push(ConvergenceEntry { nx, dx, error, order });
        }
        ConvergenceReport {
            scheme,
            reference,
            entries,
        }
    }

    pub fn order_at(&self, nx: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.nx == nx).and_then(|e| e.order)
    }

    /// `nx,dx_nm,error,order` with an empty order on the first row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("nx,dx_nm,error,order\n");
        for e in &self.entries {
            let order = e.order.map(|o| o.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", e.nx, e.dx, e.error, order));
        }
        out
    }
}

fn check_grids(grids: &[usize], reference: Option<usize>) -> Result<()> {
    if grids.is_empty() || grids.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("convergence.grids", "must be a non-empty increasing list"));
    }
    if let Some(r) = reference {
        if grids.iter().any(|&n| n == 0 || r % n != 0 || r == n) {
            return Err(Error::validation("convergence.reference_nx", "must be a strict common refinement of every grid"));
        }
    }
    Ok(())
}

/// Scattering-state study on a flat potential at `device.probe_energy`,
/// with errors against the exact plane wave `e^{ikx}`.
pub fn plane_wave_study(device: &DeviceSpec, scheme: TbcKind, grids: &[usize]) -> Result<ConvergenceReport> {
    device.validate()?;
    check_grids(grids, None)?;
    let energy = device
        .probe_energy
        .ok_or_else(|| Error::validation("probe_energy", "required for a scattering-state study"))?;
    if !device.band.is_empty() || device.prescribed.is_some() {
        return Err(Error::validation("band.regions", "plane-wave study needs a flat potential"));
    }
    let kinetic = device.material().kinetic;
    let k = (energy / kinetic).sqrt();
    let errors = grids
        .par_iter()
        .map(|&nx| {
            let mut d = device.clone();
            d.nx = nx;
            let grid = d.grid()?;
            let ctx = SchrodingerContext::new(grid, vec![0.0; nx + 1], kinetic, energy)?;
            let state = ctx.solve(scheme, Incidence::Left)?;
            let error = grid
                .nodes()
                .iter()
                .zip(state.psi.interior())
                .fold(0.0f64, |m, (&x, z)| m.max((z - Complex64::from_polar(1.0, k * x)).norm()));
            Ok((nx, grid.dx(), error))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::from_errors(scheme, "exact plane wave".into(), errors))
}

/// Self-consistent study at zero bias: `E = max_i |V^{Δx}_i − V^{ref}_i|`
/// with the reference restricted to each coarse grid's nodes.
pub fn potential_study(
    device: &DeviceSpec,
    scheme: TbcKind,
    grids: &[usize],
    reference_nx: usize,
    config: &SelfConsistentConfig,
) -> Result<ConvergenceReport> {
    device.validate()?;
    check_grids(grids, Some(reference_nx))?;
    let mut all: Vec<usize> = grids.to_vec();
    all.push(reference_nx);
    let mut solutions = all
        .par_iter()
        .map(|&nx| {
            let mut d = device.clone();
            d.nx = nx;
            Ok(run_self_consistent(&d, scheme, 0.0, config)?.potential)
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = solutions.pop().expect("reference run");
    let errors = grids
        .iter()
        .zip(&solutions)
        .map(|(&nx, v)| {
            let stride = reference_nx / nx;
            let error = v.iter().enumerate().fold(0.0f64, |m, (i, a)| m.max((a - reference[i * stride]).abs()));
            (nx, device.length / nx as f64, error)
        })
        .collect();
    Ok(ConvergenceReport::from_errors(scheme, format!("nodal restriction of nx = {reference_nx}"), errors))
}

/// Picks the study from the device: a probe energy selects the
/// scattering-state study, anything else the self-consistent one.
pub fn convergence_study(
    device: &DeviceSpec,
    scheme: TbcKind,
    grids: &[usize],
    reference_nx: usize,
    config: &SelfConsistentConfig,
) -> Result<ConvergenceReport> {
    if device.probe_energy.is_some() {
        plane_wave_study(device, scheme, grids)
    } else {
        potential_study(device, scheme, grids, reference_nx, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Preset;

    #[test]
    fn orders_follow_the_error_ratios() {
        let r = ConvergenceReport::from_errors(TbcKind::D4tbc, String::new(), vec![(10, 1.0, 16.0), (20, 0.5, 1.0), (40, 0.25, 0.25)]);
        assert_eq!(r.entries[0].order, None);
        assert!((r.order_at(20).unwrap() - 4.0).abs() < 1e-14);
        assert!((r.order_at(40).unwrap() - 2.0).abs() < 1e-14);
        assert!(r.to_csv().starts_with("nx,dx_nm,error,order\n10,1,16,\n"));
    }

    #[test]
    fn free_particle_orders_are_four() {
        let d = Preset::FreeParticle.build();
        for scheme in [TbcKind::D4tbc, TbcKind::Adtbc] {
            let r = plane_wave_study(&d, scheme, &[100, 200, 400]).unwrap();
            for nx in [200, 400] {
                let p = r.order_at(nx).unwrap();
                assert!((p - 4.0).abs() < 0.05, "{scheme:?} {nx}: {p}");
            }
        }
    }

    #[test]
    fn grids_must_nest() {
        let d = Preset::Resistor.build();
        let cfg = SelfConsistentConfig::default();
        assert!(potential_study(&d, TbcKind::D4tbc, &[30, 60], 100, &cfg).is_err());
        assert!(potential_study(&d, TbcKind::D4tbc, &[60, 30], 120, &cfg).is_err());
    }

    #[test]
    fn d4tbc_has_no_oscillation() {
        let d = Preset::FreeParticle.build();
        let ctx = SchrodingerContext::new(d.grid().unwrap(), vec![0.0; 101], 0.5, 0.5).unwrap();
        let m = oscillation_metric(&ctx.solve(TbcKind::D4tbc, Incidence::Left).unwrap());
        assert!(m < 1e-11, "{m:e}");
    }
}
