//! Sweep driver for the quantum scissors simulator: config files, figure
//! presets and CSV output.

pub mod config;
pub mod error;
pub mod point;
pub mod presets;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::SweepConfig;
pub use error::{CliError, Result};

/// Forces a fixed Fock cutoff on every point of a sweep.
pub fn override_cutoff(config: &mut SweepConfig, levels: usize) {
    config.sweeps.retain(|a| a.key != "cutoff");
    config.settings.insert("cutoff".into(), levels.to_string());
}

/// Runs every series of a preset (or one panel of it) into `out_dir`.
pub fn run_figure(id: &str, out_dir: &Path, cutoff: Option<usize>) -> Result<Vec<PathBuf>> {
    let (preset, series) = presets::select(id)?;
    let mut written = Vec::new();
    for s in series {
        let mut cfg = s.sweep();
        if let Some(levels) = cutoff {
            override_cutoff(&mut cfg, levels);
        }
        let plan = run::validate(&cfg)?;
        let output = out_dir.join(format!("{}.csv", s.id));
        let results = run::evaluate_plan(&plan)?;
        written.extend(run::write_outputs(&plan, &results, &output)?);
        let axes = cfg
            .sweeps
            .iter()
            .map(|a| a.key.as_str())
            .collect::<Vec<_>>()
            .join(", ");
        written.push(run::write_sidecar(
            &cfg,
            &output,
            &[
                ("preset", s.id.to_string()),
                ("description", preset.description.to_string()),
                ("axes", s.axes.to_string()),
                ("swept", axes),
            ],
        )?);
    }
    Ok(written)
}
