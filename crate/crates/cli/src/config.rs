//! Strict `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, lists are comma-separated.
//! Every key except `marker` may appear at most once; `marker` is repeated
//! once per phase and holds comma-separated terms `amplitude kx ky phase`,
//! each term contributing `amplitude · cos(kx·x + ky·y + phase)`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use markerflow_core::preset::{FourierMarker, FourierTerm, Preset, DEFAULT_STRIP_DELTA};
use markerflow_core::{Grid, StepControl};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    InitApprox,
    Evolve,
    Closure,
    HausdorffSweep,
    PointwiseSweep,
    Nondegeneracy,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::InitApprox,
        ExperimentKind::Evolve,
        ExperimentKind::Closure,
        ExperimentKind::HausdorffSweep,
        ExperimentKind::PointwiseSweep,
        ExperimentKind::Nondegeneracy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::InitApprox => "init-approx",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Closure => "closure",
            ExperimentKind::HausdorffSweep => "hausdorff-sweep",
            ExperimentKind::PointwiseSweep => "pointwise-sweep",
            ExperimentKind::Nondegeneracy => "nondegeneracy",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown kind `{s}` (known: {})", known.join(", "))
            })
    }
}

/// What the soft runs are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// Argmax-assembled vorticity drives the reference flow.
    Sharp,
    /// A soft run at `4 · max β`.
    BetaRef,
}

impl Reference {
    pub fn name(self) -> &'static str {
        match self {
            Reference::Sharp => "sharp",
            Reference::BetaRef => "beta-ref",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarkerSource {
    Preset(Preset),
    Custom(Vec<FourierMarker>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: MarkerSource,
    pub n: usize,
    pub levels: Vec<f64>,
    pub betas: Vec<f64>,
    /// Exclusion radius around the tie network.
    pub delta: f64,
    /// Strip half-width for the nondegeneracy measurements.
    pub strip_delta: f64,
    pub control: StepControl,
    pub output: PathBuf,
    pub kind: ExperimentKind,
    pub seed: u64,
    /// Amplitude of the seeded random perturbation added to every marker.
    pub perturbation: f64,
    /// Sample times for closure, sweep and nondegeneracy runs.
    pub times: Vec<f64>,
    pub reference: Reference,
    /// Tie sets restricted to the top-two region.
    pub restricted: bool,
    pub pgm: bool,
}

impl ExperimentConfig {
    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.n).expect("validated grid size")
    }

    pub fn source_name(&self) -> &str {
        match &self.source {
            MarkerSource::Preset(p) => p.name(),
            MarkerSource::Custom(_) => "custom",
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

const KEYS: [&str; 19] = [
    "preset",
    "marker",
    "n",
    "levels",
    "betas",
    "delta",
    "strip_delta",
    "cfl",
    "dt_max",
    "t_end",
    "save_every",
    "output",
    "kind",
    "seed",
    "perturbation",
    "times",
    "reference",
    "tie_sets",
    "pgm",
];

#[derive(Default)]
struct Raw {
    entries: Vec<(usize, &'static str, String)>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries
            .iter()
            .find(|(_, k, _)| *k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
    }

    fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = (usize, &'a str)> + 'a {
        self.entries
            .iter()
            .filter(move |(_, k, _)| *k == key)
            .map(|(l, _, v)| (*l, v.as_str()))
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        message: message.into(),
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

fn number<T: FromStr>(line: usize, key: &str, s: &str) -> Result<T, ConfigError> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("`{key}`: cannot parse `{}`", s.trim())))
}

fn list(line: usize, key: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    s.split(',').map(|item| number(line, key, item)).collect()
}

fn marker_terms(line: usize, s: &str) -> Result<FourierMarker, ConfigError> {
    let mut terms = Vec::new();
    for item in s.split(',') {
        let parts: Vec<&str> = item.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(parse_err(
                line,
                format!("`marker`: term `{}` needs `amplitude kx ky phase`", item.trim()),
            ));
        }
        terms.push(FourierTerm {
            amplitude: number(line, "marker", parts[0])?,
            kx: number(line, "marker", parts[1])?,
            ky: number(line, "marker", parts[2])?,
            phase: number(line, "marker", parts[3])?,
        });
    }
    Ok(FourierMarker { terms })
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = Raw::default();
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(parse_err(line, format!("expected `key = value`, got `{content}`")));
        };
        let key = key.trim();
        let value = value.trim();
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(parse_err(line, format!("unknown key `{key}`")));
        };
        if value.is_empty() {
            return Err(parse_err(line, format!("`{key}` has no value")));
        }
        if known != "marker" {
            if let Some((first, _)) = raw.get(known) {
                return Err(parse_err(line, format!("`{key}` already set on line {first}")));
            }
        }
        raw.entries.push((line, known, value.to_string()));
    }
    build(&raw)
}

fn build(raw: &Raw) -> Result<ExperimentConfig, ConfigError> {
    let mut markers = Vec::new();
    for (line, v) in raw.all("marker") {
        markers.push(marker_terms(line, v)?);
    }
    let preset = match raw.get("preset") {
        Some((line, v)) => Some(v.parse::<Preset>().map_err(|e| parse_err(line, e.to_string()))?),
        None => None,
    };
    let source = match (preset, markers.is_empty()) {
        (Some(p), true) => MarkerSource::Preset(p),
        (None, false) => MarkerSource::Custom(markers),
        (Some(_), false) => return Err(invalid("marker", "give either `preset` or `marker` lines, not both")),
        (None, true) => return Err(invalid("preset", "missing; set `preset` or one `marker` line per phase")),
    };

    let levels = match raw.get("levels") {
        Some((line, v)) => list(line, "levels", v)?,
        None => match &source {
            MarkerSource::Preset(p) => p.levels(),
            MarkerSource::Custom(_) => return Err(invalid("levels", "required with custom markers")),
        },
    };
    let k = match &source {
        MarkerSource::Preset(p) => p.k(),
        MarkerSource::Custom(m) => m.len(),
    };
    if levels.len() != k {
        return Err(invalid("levels", format!("{} levels for {k} markers", levels.len())));
    }
    if !(2..=9).contains(&k) {
        return Err(invalid("marker", format!("need between 2 and 9 phases, got {k}")));
    }
    if levels.iter().any(|c| !c.is_finite()) {
        return Err(invalid("levels", "must be finite"));
    }

    let n = match raw.get("n") {
        Some((line, v)) => number(line, "n", v)?,
        None => 128,
    };
    Grid::new(n).map_err(|e| invalid("n", e.to_string()))?;

    let betas = match raw.get("betas") {
        Some((line, v)) => list(line, "betas", v)?,
        None => return Err(invalid("betas", "missing")),
    };
    if betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(invalid("betas", "every value must be positive and finite"));
    }
    if betas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("betas", "must be strictly increasing"));
    }

    let kind = match raw.get("kind") {
        Some((line, v)) => v.parse::<ExperimentKind>().map_err(|e| parse_err(line, e))?,
        None => return Err(invalid("kind", "missing")),
    };

    let positive = |key: &'static str, default: f64| -> Result<f64, ConfigError> {
        let v = match raw.get(key) {
            Some((line, v)) => number(line, key, v)?,
            None => default,
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(invalid(key, format!("must be positive, got {v}")))
        }
    };
    let delta = positive("delta", 0.3)?;
    let strip_delta = positive("strip_delta", DEFAULT_STRIP_DELTA)?;
    let defaults = StepControl::default();
    let cfl = positive("cfl", defaults.cfl)?;
    let dt_max = positive("dt_max", defaults.dt_max)?;
    let t_end = match raw.get("t_end") {
        Some((line, v)) => number(line, "t_end", v)?,
        None => defaults.t_end,
    };
    let save_every = match raw.get("save_every") {
        Some((line, v)) => number(line, "save_every", v)?,
        None => defaults.save_every,
    };
    let control = StepControl {
        cfl,
        dt_max,
        t_end,
        save_every,
    };
    control.validate().map_err(|e| match e {
        markerflow_core::Error::InvalidParameter { name, reason } => invalid(name, reason),
        other => invalid("t_end", other.to_string()),
    })?;

    let times = match raw.get("times") {
        Some((line, v)) => list(line, "times", v)?,
        None => vec![t_end],
    };
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0 && *t <= t_end)) {
        return Err(invalid("times", format!("every time must lie in [0, t_end = {t_end}]")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("times", "must be strictly increasing"));
    }

    let perturbation: f64 = match raw.get("perturbation") {
        Some((line, v)) => number(line, "perturbation", v)?,
        None => 0.0,
    };
    if !(perturbation.is_finite() && perturbation >= 0.0) {
        return Err(invalid("perturbation", "must be finite and nonnegative"));
    }
    let seed = match raw.get("seed") {
        Some((line, v)) => number(line, "seed", v)?,
        None => 0,
    };
    let reference = match raw.get("reference") {
        None | Some((_, "sharp")) => Reference::Sharp,
        Some((_, "beta-ref")) => Reference::BetaRef,
        Some((line, v)) => return Err(parse_err(line, format!("`reference`: expected sharp or beta-ref, got `{v}`"))),
    };
    let restricted = match raw.get("tie_sets") {
        None | Some((_, "restricted")) => true,
        Some((_, "full")) => false,
        Some((line, v)) => return Err(parse_err(line, format!("`tie_sets`: expected restricted or full, got `{v}`"))),
    };
    let pgm = match raw.get("pgm") {
        Some((line, v)) => number(line, "pgm", v)?,
        None => false,
    };
    let output = raw.get("output").map_or_else(|| PathBuf::from("out"), |(_, v)| PathBuf::from(v));

    Ok(ExperimentConfig {
        source,
        n,
        levels,
        betas,
        delta,
        strip_delta,
        control,
        output,
        kind,
        seed,
        perturbation,
        times,
        reference,
        restricted,
        pgm,
    })
}
