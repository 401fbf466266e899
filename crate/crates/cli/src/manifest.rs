//! `manifest.json`: config echo, versions, the exact marker inputs and the
//! measured preset constants.

use markerflow_core::preset::{FourierMarker, Nondegeneracy};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiment::{FitSummary, Outcome, Setup};
use crate::output::pair_id;

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub program: &'static str,
    pub version: &'static str,
    pub core_version: &'static str,
    pub status: &'static str,
    pub error: Option<String>,
    pub config: ConfigEcho,
    pub markers: MarkerEcho,
    pub nondegeneracy: NondegeneracyEcho,
    pub fits: Vec<FitSummary>,
    pub record_count: usize,
    pub files: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub kind: &'static str,
    pub source: String,
    pub n: usize,
    pub length: f64,
    pub spacing: f64,
    pub levels: Vec<f64>,
    pub betas: Vec<f64>,
    pub delta: f64,
    pub strip_delta: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub save_every: usize,
    pub times: Vec<f64>,
    pub seed: u64,
    pub perturbation: f64,
    pub reference: &'static str,
    pub tie_sets: &'static str,
    pub pgm: bool,
}

#[derive(Debug, Serialize)]
pub struct TermEcho {
    pub amplitude: f64,
    pub kx: i32,
    pub ky: i32,
    pub phase: f64,
}

#[derive(Debug, Serialize)]
pub struct MarkerEcho {
    /// Terms of custom markers; absent for presets.
    pub custom: Option<Vec<Vec<TermEcho>>>,
    /// Seeded perturbation added to each marker.
    pub perturbation: Vec<Vec<TermEcho>>,
}

#[derive(Debug, Serialize)]
pub struct PairEcho {
    pub pair: String,
    pub min_gradient: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct NondegeneracyEcho {
    pub strip_delta: f64,
    pub m: Option<f64>,
    pub pairs: Vec<PairEcho>,
}

fn terms(markers: &[FourierMarker]) -> Vec<Vec<TermEcho>> {
    markers
        .iter()
        .map(|m| {
            m.terms
                .iter()
                .map(|t| TermEcho {
                    amplitude: t.amplitude,
                    kx: t.kx,
                    ky: t.ky,
                    phase: t.phase,
                })
                .collect()
        })
        .collect()
}

impl Manifest {
    pub fn new(
        cfg: &ExperimentConfig,
        setup: &Setup,
        nondegeneracy: &Nondegeneracy,
        outcome: &Outcome,
        files: &[String],
    ) -> Self {
        let grid = setup.grid;
        Self {
            program: "markerflow",
            version: env!("CARGO_PKG_VERSION"),
            core_version: markerflow_core::VERSION,
            status: if outcome.failure.is_some() { "integration_failure" } else { "ok" },
            error: outcome.failure.clone(),
            config: ConfigEcho {
                kind: cfg.kind.name(),
                source: cfg.source_name().to_string(),
                n: grid.n(),
                length: grid.length(),
                spacing: grid.spacing(),
                levels: cfg.levels.clone(),
                betas: cfg.betas.clone(),
                delta: cfg.delta,
                strip_delta: cfg.strip_delta,
                cfl: cfg.control.cfl,
                dt_max: cfg.control.dt_max,
                t_end: cfg.control.t_end,
                save_every: cfg.control.save_every,
                times: cfg.times.clone(),
                seed: cfg.seed,
                perturbation: cfg.perturbation,
                reference: cfg.reference.name(),
                tie_sets: if cfg.restricted { "restricted" } else { "full" },
                pgm: cfg.pgm,
            },
            markers: MarkerEcho {
                custom: setup.base_terms.as_deref().map(terms),
                perturbation: terms(&setup.perturbation_terms),
            },
            nondegeneracy: NondegeneracyEcho {
                strip_delta: nondegeneracy.delta,
                m: nondegeneracy.m.value(),
                pairs: nondegeneracy
                    .pairs
                    .iter()
                    .map(|p| PairEcho {
                        pair: pair_id(p.i, p.j),
                        min_gradient: p.min_gradient.value(),
                    })
                    .collect(),
            },
            fits: outcome.fits.clone(),
            record_count: outcome.records.len(),
            files: files.to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest is plain data");
        s.push('\n');
        s
    }
}
