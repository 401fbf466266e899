//! Experiment orchestration. Runs for different β execute in parallel on the
//! current rayon pool; records are sorted by `(β, t)` and every file is
//! written from this module after all runs have finished.

use std::f64::consts::TAU;
use std::io;
use std::path::{Path, PathBuf};

use markerflow_core::diagnostics::{
    self, check_pointwise_bound, conservation_of, fit_rate, keys, BoundStatus, DiagnosticRecord, RateFit, RateModel,
};
use markerflow_core::gating::{assemble_sharp_vorticity, assemble_soft_vorticity, gap_infimum};
use markerflow_core::geometry::{distance_to_polylines, extract_network, hausdorff, min_gradient_on_strip, resample};
use markerflow_core::preset::{measure_nondegeneracy, FourierMarker, FourierTerm, Nondegeneracy};
use markerflow_core::transport::VorticityState;
use markerflow_core::{
    Grid, MarkerSet, Measured, Mode, PhaseConfig, ScalarField, SimState, TieSetNetwork, Transport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, ExperimentKind, MarkerSource, Reference};
use crate::manifest::Manifest;
use crate::output::{self, label, pair_id};

/// Named artifacts: file name and contents.
type Files = Vec<(String, Vec<u8>)>;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("validation failed: {0}")]
    Validation(#[from] markerflow_core::Error),
    #[error("cannot write artifacts: {0}")]
    Io(#[from] io::Error),
    #[error("integration failed: {0}")]
    Integration(String),
}

impl ExperimentError {
    /// 2 for integration failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Integration(_) => 2,
            _ => 1,
        }
    }
}

/// Least-squares rate fit reported in the manifest.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FitSummary {
    pub quantity: String,
    pub t: f64,
    pub model: &'static str,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub samples: usize,
    pub dropped: usize,
}

impl FitSummary {
    fn new(quantity: &str, t: f64, fit: &RateFit) -> Self {
        Self {
            quantity: quantity.to_string(),
            t,
            model: match fit.model {
                RateModel::Reciprocal => "power",
                RateModel::Exponential => "exponential",
            },
            slope: fit.slope,
            intercept: fit.intercept,
            r2: fit.r2,
            samples: fit.xs.len(),
            dropped: fit.dropped,
        }
    }
}

/// Everything a run produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub records: Vec<DiagnosticRecord>,
    pub fits: Vec<FitSummary>,
    /// Named side files (tie sets, heatmaps).
    pub files: Vec<(String, Vec<u8>)>,
    pub failure: Option<String>,
}

/// Result of a successful [`run_experiment`].
#[derive(Debug, Clone)]
pub struct Summary {
    pub out_dir: PathBuf,
    pub records: Vec<DiagnosticRecord>,
    pub fits: Vec<FitSummary>,
    pub nondegeneracy: Nondegeneracy,
    pub files: Vec<String>,
}

/// Initial markers and the exact inputs that produced them.
pub struct Setup {
    pub grid: Grid,
    pub transport: Transport,
    pub markers: Vec<ScalarField>,
    pub base_terms: Option<Vec<FourierMarker>>,
    pub perturbation_terms: Vec<FourierMarker>,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        let grid = cfg.grid();
        let mut markers = match &cfg.source {
            MarkerSource::Preset(p) => p.markers(grid),
            MarkerSource::Custom(m) => m.iter().map(|f| f.field(grid)).collect(),
        };
        let perturbation_terms = perturbation_terms(cfg.k(), cfg.perturbation, cfg.seed);
        for (f, p) in markers.iter_mut().zip(&perturbation_terms) {
            if !p.terms.is_empty() {
                let extra = p.field(grid);
                for (v, e) in f.values_mut().iter_mut().zip(extra.values()) {
                    *v += e;
                }
            }
        }
        Self {
            grid,
            transport: Transport::new(grid),
            markers,
            base_terms: match &cfg.source {
                MarkerSource::Custom(m) => Some(m.clone()),
                MarkerSource::Preset(_) => None,
            },
            perturbation_terms,
        }
    }

    pub fn marker_set(&self, levels: &[f64], beta: f64) -> markerflow_core::Result<MarkerSet> {
        MarkerSet::new(self.markers.clone(), PhaseConfig::new(levels.to_vec(), beta)?)
    }
}

/// Four random low modes per marker, amplitudes scaled by `amplitude / 4`.
pub fn perturbation_terms(k: usize, amplitude: f64, seed: u64) -> Vec<FourierMarker> {
    if amplitude == 0.0 {
        return vec![FourierMarker { terms: Vec::new() }; k];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| FourierMarker {
            terms: (0..4)
                .map(|_| FourierTerm {
                    amplitude: 0.25 * amplitude * rng.random_range(-1.0..=1.0),
                    kx: rng.random_range(-3..=3),
                    ky: rng.random_range(-3..=3),
                    phase: rng.random_range(0.0..TAU),
                })
                .collect(),
        })
        .collect()
}

fn pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k).flat_map(|i| ((i + 1)..k).map(move |j| (i, j))).collect()
}

/// Run `cfg`, writing artifacts to `out_dir` (or `cfg.output`).
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<Summary, ExperimentError> {
    let out_dir = out_dir.map_or_else(|| cfg.output.clone(), Path::to_path_buf);
    let setup = Setup::new(cfg);
    let first = setup.marker_set(&cfg.levels, cfg.betas[0])?;
    let nondegeneracy = measure_nondegeneracy(setup.transport.spectral(), &first, cfg.strip_delta)?;

    let mut outcome = match cfg.kind {
        ExperimentKind::InitApprox => init_approx(cfg, &setup)?,
        ExperimentKind::Evolve => evolve(cfg, &setup)?,
        ExperimentKind::Closure => closure(cfg, &setup)?,
        ExperimentKind::HausdorffSweep | ExperimentKind::PointwiseSweep => sweep(cfg, &setup)?,
        ExperimentKind::Nondegeneracy => nondegeneracy_run(cfg, &setup)?,
    };
    outcome
        .records
        .sort_by(|a, b| a.beta.total_cmp(&b.beta).then(a.t.total_cmp(&b.t)));

    std::fs::create_dir_all(&out_dir)?;
    let mut files = Vec::new();
    for (name, bytes) in &outcome.files {
        output::write(&out_dir, name, bytes)?;
        files.push(name.clone());
    }
    output::write(&out_dir, "records.csv", output::records_csv(&outcome.records))?;
    files.push("records.csv".to_string());
    let manifest = Manifest::new(cfg, &setup, &nondegeneracy, &outcome, &files);
    output::write(&out_dir, "manifest.json", manifest.to_json())?;
    files.push("manifest.json".to_string());

    if let Some(reason) = outcome.failure {
        return Err(ExperimentError::Integration(reason));
    }
    Ok(Summary {
        out_dir,
        records: outcome.records,
        fits: outcome.fits,
        nondegeneracy,
        files,
    })
}

/// States of one run at each requested time, stopping at the first failure.
struct Sampled {
    beta: f64,
    states: Vec<SimState>,
    failure: Option<String>,
}

fn sample_run(
    transport: &Transport,
    markers: MarkerSet,
    mode: Mode,
    cfg: &ExperimentConfig,
    times: &[f64],
) -> markerflow_core::Result<Sampled> {
    let beta = markers.beta();
    let mut state = transport.initial_state(markers, mode)?;
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        match transport.advance_to(state, t, &cfg.control, |_| {}) {
            Ok(s) => {
                states.push(s.clone());
                state = s;
            }
            Err(f) => {
                return Ok(Sampled {
                    beta,
                    states,
                    failure: Some(format!("{mode} run at beta {beta}: {}", f.error)),
                })
            }
        }
    }
    Ok(Sampled {
        beta,
        states,
        failure: None,
    })
}

fn first_failure<'a>(it: impl IntoIterator<Item = &'a Option<String>>) -> Option<String> {
    it.into_iter().flatten().next().cloned()
}

fn tieset_files(network: &TieSetNetwork, beta_label: &str, t: f64) -> Vec<(String, Vec<u8>)> {
    network
        .pairs
        .iter()
        .map(|ts| {
            let id = pair_id(ts.i, ts.j);
            (
                format!("tieset_{id}_{beta_label}_{}.csv", label(t)),
                output::tieset_csv(&id, &ts.polylines).into_bytes(),
            )
        })
        .collect()
}

fn heatmap(cfg: &ExperimentConfig, omega: &ScalarField, beta_label: &str, t: f64) -> (String, Vec<u8>) {
    let lo = cfg.levels.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cfg.levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (
        format!("omega_{beta_label}_{}.pgm", label(t)),
        output::pgm_bytes(omega, lo, hi),
    )
}

fn fit_over_beta(records: &[DiagnosticRecord], key: &str, t: f64, model: RateModel) -> Option<FitSummary> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.t == t)
        .filter_map(|r| r.value(key).map(|v| (r.beta, v)))
        .unzip();
    fit_rate(&xs, &ys, model).ok().map(|f| FitSummary::new(key, t, &f))
}

fn note_bound(record: &mut DiagnosticRecord, status: BoundStatus, bound: f64, margin: f64) {
    if status != BoundStatus::Skipped {
        record.set(keys::BOUND, bound).set(keys::BOUND_MARGIN, margin);
    }
    record.note(status.to_string());
}

fn init_approx(cfg: &ExperimentConfig, setup: &Setup) -> Result<Outcome, ExperimentError> {
    let grid = setup.grid;
    let h = grid.spacing();
    let first = setup.marker_set(&cfg.levels, cfg.betas[0])?;
    let network = extract_network(&first, cfg.restricted)?;
    let dist = distance_to_polylines(&grid, network.all_polylines());
    let c_delta = gap_infimum(&first, &dist, cfg.delta)?;
    let sharp = assemble_sharp_vorticity(&first);

    let per_beta: Vec<_> = cfg
        .betas
        .par_iter()
        .map(|&beta| -> markerflow_core::Result<(DiagnosticRecord, ScalarField)> {
            let m = first.with_beta(beta)?;
            let soft = assemble_soft_vorticity(&m);
            let mut r = DiagnosticRecord::new(0.0, beta);
            let sup = diagnostics::sup_error_away(&soft, &sharp, &dist, cfg.delta)?;
            r.set(keys::L1_ERROR, diagnostics::l1_error(&soft, &sharp)?)
                .set_measured(keys::SUP_ERROR_DELTA, sup)
                .set_measured(keys::C_DELTA, c_delta)
                .set(keys::MARKER_SUP_ERROR, 0.0);
            let check = check_pointwise_bound(sup, c_delta, 0.0, beta, m.config(), h);
            note_bound(&mut r, check.status, check.bound, check.margin);
            Ok((r, soft))
        })
        .collect::<markerflow_core::Result<_>>()?;

    let mut out = Outcome::default();
    for (r, soft) in per_beta {
        let b = label(r.beta);
        out.files.extend(tieset_files(&network, &b, 0.0));
        if cfg.pgm {
            out.files.push(heatmap(cfg, &soft, &b, 0.0));
        }
        out.records.push(r);
    }
    out.fits.extend(fit_over_beta(&out.records, keys::L1_ERROR, 0.0, RateModel::Reciprocal));
    out.fits
        .extend(fit_over_beta(&out.records, keys::SUP_ERROR_DELTA, 0.0, RateModel::Exponential));
    note_dropped_zeros(&mut out.records, &[keys::L1_ERROR, keys::SUP_ERROR_DELTA]);
    Ok(out)
}

fn note_dropped_zeros(records: &mut [DiagnosticRecord], fitted: &[&str]) {
    for r in records {
        for key in fitted {
            if r.value(key) == Some(0.0) {
                r.note(format!("{key} is exactly zero and left out of the rate fit"));
            }
        }
    }
}

/// Per-pair strip minima of `state`'s markers.
fn strip_minima(setup: &Setup, m: &MarkerSet, delta: f64) -> markerflow_core::Result<Vec<Measured>> {
    pairs(m.k())
        .into_iter()
        .map(|(i, j)| min_gradient_on_strip(setup.transport.spectral(), m, i, j, delta))
        .collect()
}

fn evolve(cfg: &ExperimentConfig, setup: &Setup) -> Result<Outcome, ExperimentError> {
    let runs: Vec<_> = cfg
        .betas
        .par_iter()
        .map(|&beta| -> markerflow_core::Result<(Vec<DiagnosticRecord>, Files, Option<String>)> {
            let m = setup.marker_set(&cfg.levels, beta)?;
            let (saved, failure) = match setup.transport.run(m, Mode::Soft, &cfg.control, |_| {}) {
                Ok(tr) => (tr.states, None),
                Err(f) => (f.partial.states, Some(format!("soft run at beta {beta}: {}", f.error))),
            };
            let mut records = Vec::new();
            for s in &saved {
                let omega = assemble_soft_vorticity(&s.markers);
                let c = conservation_of(setup.transport.spectral(), &omega)?;
                let mut r = DiagnosticRecord::new(s.time, beta);
                r.set(keys::MEAN_OMEGA, c.mean_omega)
                    .set(keys::ENSTROPHY, c.enstrophy)
                    .set(keys::ENERGY, c.energy)
                    .set(keys::ACCUMULATED_GRADU, s.accumulated_gradu)
                    .set(keys::GRADU, s.gradu_now);
                for (k, f) in s.markers.markers().iter().enumerate() {
                    r.set(keys::marker_mean(k), f.mean());
                }
                for ((i, j), v) in pairs(s.markers.k()).into_iter().zip(strip_minima(setup, &s.markers, cfg.strip_delta)?) {
                    r.set_measured(keys::min_grad_strip(i, j), v);
                }
                records.push(r);
            }
            let mut files = Vec::new();
            if let Some(last) = saved.last() {
                let b = label(beta);
                files.extend(tieset_files(&extract_network(&last.markers, cfg.restricted)?, &b, last.time));
                if cfg.pgm {
                    files.push(heatmap(cfg, &assemble_soft_vorticity(&last.markers), &b, last.time));
                }
            }
            Ok((records, files, failure))
        })
        .collect::<markerflow_core::Result<_>>()?;
    let mut out = Outcome::default();
    for (records, files, failure) in runs {
        out.records.extend(records);
        out.files.extend(files);
        out.failure = out.failure.or(failure);
    }
    Ok(out)
}

fn closure(cfg: &ExperimentConfig, setup: &Setup) -> Result<Outcome, ExperimentError> {
    let runs: Vec<_> = cfg
        .betas
        .par_iter()
        .map(|&beta| -> markerflow_core::Result<(Vec<DiagnosticRecord>, Option<String>)> {
            let m = setup.marker_set(&cfg.levels, beta)?;
            let omega0 = assemble_soft_vorticity(&m);
            let soft = sample_run(&setup.transport, m, Mode::Soft, cfg, &cfg.times)?;
            let mut direct = VorticityState {
                time: 0.0,
                omega: omega0,
                step_count: 0,
            };
            let mut records = Vec::new();
            let mut failure = soft.failure.clone();
            for s in &soft.states {
                direct = match setup.transport.advance_vorticity_to(direct, s.time, &cfg.control) {
                    Ok(d) => d,
                    Err(e) => {
                        failure = Some(format!("direct vorticity run at beta {beta}: {e}"));
                        break;
                    }
                };
                let c = conservation_of(setup.transport.spectral(), &direct.omega)?;
                let mut r = DiagnosticRecord::new(s.time, beta);
                r.set(keys::CLOSURE_RESIDUAL, diagnostics::closure_residual(&direct.omega, &s.markers)?)
                    .set(keys::MEAN_OMEGA, c.mean_omega)
                    .set(keys::ENSTROPHY, c.enstrophy)
                    .set(keys::ENERGY, c.energy);
                records.push(r);
            }
            Ok((records, failure))
        })
        .collect::<markerflow_core::Result<_>>()?;
    let mut out = Outcome::default();
    for (records, failure) in runs {
        out.records.extend(records);
        out.failure = out.failure.or(failure);
    }
    Ok(out)
}

/// Soft runs for every β plus the reference run, all sampled at `cfg.times`.
fn paired_runs(cfg: &ExperimentConfig, setup: &Setup) -> markerflow_core::Result<(Sampled, Vec<Sampled>)> {
    let beta_max = *cfg.betas.last().expect("nonempty betas");
    let reference = match cfg.reference {
        Reference::Sharp => (beta_max, Mode::Sharp),
        Reference::BetaRef => (4.0 * beta_max, Mode::Soft),
    };
    let jobs: Vec<(f64, Mode)> = std::iter::once(reference)
        .chain(cfg.betas.iter().map(|&b| (b, Mode::Soft)))
        .collect();
    let mut runs: Vec<Sampled> = jobs
        .par_iter()
        .map(|&(beta, mode)| sample_run(&setup.transport, setup.marker_set(&cfg.levels, beta)?, mode, cfg, &cfg.times))
        .collect::<markerflow_core::Result<_>>()?;
    let reference = runs.remove(0);
    Ok((reference, runs))
}

fn sweep(cfg: &ExperimentConfig, setup: &Setup) -> Result<Outcome, ExperimentError> {
    let grid = setup.grid;
    let h = grid.spacing();
    let (reference, soft_runs) = paired_runs(cfg, setup)?;
    let ref_label = match cfg.reference {
        Reference::Sharp => "sharp".to_string(),
        Reference::BetaRef => label(reference.beta),
    };

    // Reference geometry per sample time, shared by all β.
    struct RefGeometry {
        network: TieSetNetwork,
        omega: ScalarField,
        dist: markerflow_core::DistanceField,
        c_delta: Measured,
    }
    let ref_geometry: Vec<RefGeometry> = reference
        .states
        .par_iter()
        .map(|s| -> markerflow_core::Result<RefGeometry> {
            let network = extract_network(&s.markers, cfg.restricted)?;
            let dist = distance_to_polylines(&grid, network.all_polylines());
            Ok(RefGeometry {
                c_delta: gap_infimum(&s.markers, &dist, cfg.delta)?,
                omega: match s.mode {
                    Mode::Sharp => assemble_sharp_vorticity(&s.markers),
                    Mode::Soft => assemble_soft_vorticity(&s.markers),
                },
                network,
                dist,
            })
        })
        .collect::<markerflow_core::Result<_>>()?;

    let mut out = Outcome::default();
    for (g, s) in ref_geometry.iter().zip(&reference.states) {
        out.files.extend(tieset_files(&g.network, &ref_label, s.time));
    }

    let per_run: Vec<_> = soft_runs
        .par_iter()
        .map(|run| -> markerflow_core::Result<(Vec<DiagnosticRecord>, Files)> {
            let b = label(run.beta);
            let mut records = Vec::new();
            let mut files = Vec::new();
            for (s, (g, rs)) in run.states.iter().zip(ref_geometry.iter().zip(&reference.states)) {
                let marker_error = diagnostics::marker_sup_error(&s.markers, &rs.markers)?;
                let mut r = DiagnosticRecord::new(s.time, run.beta);
                r.set(keys::MARKER_SUP_ERROR, marker_error);
                let network = extract_network(&s.markers, cfg.restricted)?;
                match cfg.kind {
                    ExperimentKind::HausdorffSweep => {
                        for ts in &network.pairs {
                            let other = g.network.pair(ts.i, ts.j).map_or(&[][..], |p| &p.polylines[..]);
                            r.set_measured(keys::hausdorff(ts.i, ts.j), polyline_hausdorff(&grid, &ts.polylines, other));
                        }
                    }
                    _ => {
                        let soft = assemble_soft_vorticity(&s.markers);
                        let sup = diagnostics::sup_error_away(&soft, &g.omega, &g.dist, cfg.delta)?;
                        r.set(keys::L1_ERROR, diagnostics::l1_error(&soft, &g.omega)?)
                            .set_measured(keys::SUP_ERROR_DELTA, sup)
                            .set_measured(keys::C_DELTA, g.c_delta)
                            .set(keys::ACCUMULATED_GRADU, s.accumulated_gradu);
                        let check = check_pointwise_bound(sup, g.c_delta, marker_error, run.beta, s.markers.config(), h);
                        note_bound(&mut r, check.status, check.bound, check.margin);
                        if cfg.pgm {
                            files.push(heatmap(cfg, &soft, &b, s.time));
                        }
                    }
                }
                files.extend(tieset_files(&network, &b, s.time));
                records.push(r);
            }
            Ok((records, files))
        })
        .collect::<markerflow_core::Result<_>>()?;
    for (records, files) in per_run {
        out.records.extend(records);
        out.files.extend(files);
    }
    out.failure = first_failure(std::iter::once(&reference.failure).chain(soft_runs.iter().map(|r| &r.failure)));
    Ok(out)
}

/// Hausdorff distance between two polyline sets, each resampled at `h/2`.
pub fn polyline_hausdorff(grid: &Grid, a: &[markerflow_core::Polyline], b: &[markerflow_core::Polyline]) -> Measured {
    let spacing = 0.5 * grid.spacing();
    hausdorff(grid, &resample(grid, a, spacing), &resample(grid, b, spacing))
}

fn nondegeneracy_run(cfg: &ExperimentConfig, setup: &Setup) -> Result<Outcome, ExperimentError> {
    let mut times = cfg.times.clone();
    if times.first() != Some(&0.0) {
        times.insert(0, 0.0);
    }
    let runs: Vec<_> = cfg
        .betas
        .par_iter()
        .map(|&beta| -> markerflow_core::Result<(Vec<DiagnosticRecord>, Option<String>)> {
            let m = setup.marker_set(&cfg.levels, beta)?;
            let run = sample_run(&setup.transport, m, Mode::Soft, cfg, &times)?;
            let mut records = Vec::new();
            let mut m0: Vec<Measured> = Vec::new();
            for s in &run.states {
                let minima = strip_minima(setup, &s.markers, cfg.strip_delta)?;
                if s.time == 0.0 {
                    m0 = minima.clone();
                }
                let mut r = DiagnosticRecord::new(s.time, beta);
                r.set(keys::ACCUMULATED_GRADU, s.accumulated_gradu).set(keys::GRADU, s.gradu_now);
                let decay = (-s.accumulated_gradu).exp();
                let mut below = Vec::new();
                for (((i, j), now), start) in pairs(s.markers.k()).into_iter().zip(&minima).zip(&m0) {
                    r.set_measured(keys::min_grad_strip(i, j), *now);
                    if let (Some(start), Some(now)) = (start.value(), now.value()) {
                        let bound = 0.9 * start * decay;
                        r.set(keys::persistence_bound(i, j), bound);
                        if now < bound {
                            below.push(pair_id(i, j));
                        }
                    }
                }
                if !below.is_empty() {
                    r.note(format!("strip gradient below persistence bound for pair {}", below.join(" ")));
                }
                records.push(r);
            }
            Ok((records, run.failure))
        })
        .collect::<markerflow_core::Result<_>>()?;
    let mut out = Outcome::default();
    for (records, failure) in runs {
        out.records.extend(records);
        out.failure = out.failure.or(failure);
    }
    Ok(out)
}
