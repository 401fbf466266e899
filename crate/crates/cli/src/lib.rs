//! Config-driven experiments on top of `markerflow-core`: strict config
//! parsing, β-sweep orchestration and artifact writing.

pub mod config;
pub mod experiment;
pub mod manifest;
pub mod output;

use std::fmt::Write as _;

use markerflow_core::preset::{measure_nondegeneracy, Preset};
use markerflow_core::{Grid, Spectral};

pub use config::{load_config, parse_config, ConfigError, ExperimentConfig, ExperimentKind};
pub use experiment::{run_experiment, ExperimentError, Summary};

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "MARKERFLOW_THREADS";

/// Thread count from the environment if set, else from the flag.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>, String> {
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got `{v}`")),
        },
        None => Ok(flag),
    }
}

/// [`run_experiment`] on a dedicated pool of `threads` workers (rayon's
/// default when `None`).
pub fn run_with_threads(
    cfg: &ExperimentConfig,
    out_dir: Option<&std::path::Path>,
    threads: Option<usize>,
) -> Result<Summary, ExperimentError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| ExperimentError::Io(std::io::Error::other(e.to_string())))?;
    pool.install(|| run_experiment(cfg, out_dir))
}

/// One block per preset with its nondegeneracy constants measured on an
/// `n × n` grid.
pub fn presets_report(n: usize, strip_delta: f64) -> markerflow_core::Result<String> {
    let grid = Grid::new(n)?;
    let spectral = Spectral::new(grid);
    let mut out = String::new();
    for p in Preset::ALL {
        let m = p.build(grid, 1.0)?;
        let nd = measure_nondegeneracy(&spectral, &m, strip_delta)?;
        let _ = writeln!(out, "{}: {}", p.name(), p.description());
        let _ = writeln!(out, "  strip delta {strip_delta}, n {n}: m = {}", nd.m);
        for pair in &nd.pairs {
            let _ = writeln!(
                out,
                "    pair {}: min |grad(phi_i - phi_j)| = {}",
                output::pair_id(pair.i, pair.j),
                pair.min_gradient
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_overrides_flag() {
        assert_eq!(resolve_threads(Some(2), Some("6")), Ok(Some(6)));
        assert_eq!(resolve_threads(Some(2), None), Ok(Some(2)));
        assert_eq!(resolve_threads(None, Some("")), Ok(None));
        assert!(resolve_threads(Some(2), Some("zero")).is_err());
        assert!(resolve_threads(None, Some("0")).is_err());
    }

    #[test]
    fn report_lists_all_presets() {
        let text = presets_report(64, 0.5).unwrap();
        for p in Preset::ALL {
            assert!(text.contains(p.name()));
        }
        assert!(text.contains("pair 12"));
    }
}
