//! Device descriptions, presets, doping smoothing and convergence studies.

mod convergence;
mod device;
mod mollify;
mod presets;

pub use convergence::{convergence_study, oscillation_metric, plane_wave_study, potential_study, ConvergenceEntry, ConvergenceReport};
pub use device::{DeviceSpec, PiecewiseConstant, Prescribed, Region, Smoothing, Units};
pub use mollify::{kernel, kernel_radius, mollify, Profile};
pub use presets::{build_preset, Preset};

use crate::error::Error;

/// Maps a TOML error to a 1-based line and column.
pub(crate) fn parse_error(text: &str, err: &toml::de::Error) -> Error {
    let (line, column) = match err.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    Error::Parse {
        line,
        column,
        message: err.message().to_string(),
    }
}
