//! Competitive weighting of phases: softmax weights over marker scores, the
//! soft and sharp vorticity assemblies, and winner gaps.

use crate::error::{Error, Result};
use crate::geometry::DistanceField;
use crate::grid::{Grid, ScalarField};
use crate::measure::{at_least, Measured};

/// Weights below this are flushed to zero.
pub const UNDERFLOW: f64 = 1e-300;

/// Vorticity levels `c_k` and sharpness `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    levels: Vec<f64>,
    beta: f64,
}

impl PhaseConfig {
    pub fn new(levels: Vec<f64>, beta: f64) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "levels",
                reason: format!("need at least two phases, got {}", levels.len()),
            });
        }
        if let Some(index) = levels.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "phase levels",
                index,
            });
        }
        check_beta(beta)?;
        Ok(Self { levels, beta })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of phases `K`.
    pub fn k(&self) -> usize {
        self.levels.len()
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self {
            levels: self.levels.clone(),
            beta,
        })
    }

    /// `max_{i,j} |c_i − c_j|`.
    pub fn level_spread(&self) -> f64 {
        let hi = self.levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = self.levels.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    }

    /// Prefactor `(K − 1) max |c_i − c_j|` of the pointwise error bounds.
    pub fn bound_prefactor(&self) -> f64 {
        (self.k() - 1) as f64 * self.level_spread()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("sharpness must be positive and finite, got {beta}"),
        });
    }
    Ok(())
}

/// `K` marker fields on a common grid together with their phase levels.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerSet {
    markers: Vec<ScalarField>,
    config: PhaseConfig,
}

impl MarkerSet {
    pub fn new(markers: Vec<ScalarField>, config: PhaseConfig) -> Result<Self> {
        if markers.len() != config.k() {
            return Err(Error::InvalidParameter {
                name: "markers",
                reason: format!("{} markers for {} phase levels", markers.len(), config.k()),
            });
        }
        for m in &markers[1..] {
            markers[0].check_same_grid(m)?;
        }
        for m in &markers {
            m.check_finite("marker")?;
        }
        Ok(Self { markers, config })
    }

    pub fn grid(&self) -> &Grid {
        self.markers[0].grid()
    }

    pub fn markers(&self) -> &[ScalarField] {
        &self.markers
    }

    pub fn marker(&self, k: usize) -> &ScalarField {
        &self.markers[k]
    }

    pub fn config(&self) -> &PhaseConfig {
        &self.config
    }

    pub fn k(&self) -> usize {
        self.markers.len()
    }

    pub fn beta(&self) -> f64 {
        self.config.beta
    }

    /// Same markers at a different sharpness.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Ok(Self {
            markers: self.markers.clone(),
            config: self.config.with_beta(beta)?,
        })
    }

    /// Replace the marker fields, keeping the phase configuration.
    pub fn with_markers(&self, markers: Vec<ScalarField>) -> Result<Self> {
        Self::new(markers, self.config.clone())
    }

    /// Marker difference `f_ij = φ_i − φ_j`.
    pub fn difference(&self, i: usize, j: usize) -> Result<ScalarField> {
        self.check_pair(i, j)?;
        self.markers[i].sub(&self.markers[j])
    }

    pub(crate) fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let k = self.k();
        if i == j || i >= k || j >= k {
            return Err(Error::InvalidPair { i, j, k });
        }
        Ok(())
    }

    /// Marker scores at flat grid index `idx`, written into `out`.
    #[inline]
    pub(crate) fn scores_at(&self, idx: usize, out: &mut [f64]) {
        for (o, m) in out.iter_mut().zip(&self.markers) {
            *o = m.values()[idx];
        }
    }
}

/// Per-phase weights `π_k`, pointwise a probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    pub weights: Vec<ScalarField>,
}

/// Stable softmax without validation. `out` must have the length of `scores`.
#[inline]
pub(crate) fn softmax_into(scores: &[f64], beta: f64, out: &mut [f64]) {
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (o, &s) in out.iter_mut().zip(scores) {
        *o = (beta * (s - top)).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
        if *o < UNDERFLOW {
            *o = 0.0;
        }
    }
}

/// Softmax weights `π_k = e^{βφ_k} / Σ_j e^{βφ_j}`, evaluated after
/// subtracting the largest score.
pub fn softmax_weights(scores: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    if scores.is_empty() {
        return Err(Error::InvalidParameter {
            name: "scores",
            reason: "empty score vector".into(),
        });
    }
    if let Some(index) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite {
            what: "scores",
            index,
        });
    }
    let mut out = vec![0.0; scores.len()];
    softmax_into(scores, beta, &mut out);
    Ok(out)
}

/// Index of the largest score; the lowest index wins ties.
#[inline]
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

/// Largest minus second-largest score. Zero at ties.
#[inline]
pub fn top_gap(scores: &[f64]) -> f64 {
    let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &s in scores {
        if s > first {
            second = first;
            first = s;
        } else if s > second {
            second = s;
        }
    }
    first - second
}

fn pointwise(m: &MarkerSet, mut f: impl FnMut(&[f64]) -> f64) -> ScalarField {
    let grid = *m.grid();
    let mut scores = vec![0.0; m.k()];
    let values = (0..grid.len())
        .map(|idx| {
            m.scores_at(idx, &mut scores);
            f(&scores)
        })
        .collect();
    ScalarField::from_values(grid, values).expect("grid-sized output")
}

/// Weight fields `π_1 … π_K` at the marker set's sharpness.
pub fn weights(m: &MarkerSet) -> WeightField {
    let grid = *m.grid();
    let k = m.k();
    let beta = m.beta();
    let mut out = vec![vec![0.0; grid.len()]; k];
    let mut scores = vec![0.0; k];
    let mut w = vec![0.0; k];
    for idx in 0..grid.len() {
        m.scores_at(idx, &mut scores);
        softmax_into(&scores, beta, &mut w);
        for (o, &wk) in out.iter_mut().zip(&w) {
            o[idx] = wk;
        }
    }
    WeightField {
        weights: out
            .into_iter()
            .map(|v| ScalarField::from_values(grid, v).expect("grid-sized output"))
            .collect(),
    }
}

/// Regularized vorticity `ω^β = Σ_k c_k π_k^β`.
pub fn assemble_soft_vorticity(m: &MarkerSet) -> ScalarField {
    let beta = m.beta();
    let levels = m.config().levels();
    let mut w = vec![0.0; m.k()];
    pointwise(m, |scores| {
        softmax_into(scores, beta, &mut w);
        levels.iter().zip(&w).map(|(c, p)| c * p).sum()
    })
}

/// Sharp multi-phase vorticity `c_{k*(x)}`, `k*` the (lowest-index) argmax.
pub fn assemble_sharp_vorticity(m: &MarkerSet) -> ScalarField {
    let levels = m.config().levels();
    pointwise(m, |scores| levels[argmax(scores)])
}

/// Index field of the winning phase.
pub fn winner_index(m: &MarkerSet) -> Vec<usize> {
    let mut scores = vec![0.0; m.k()];
    (0..m.grid().len())
        .map(|idx| {
            m.scores_at(idx, &mut scores);
            argmax(&scores)
        })
        .collect()
}

/// Winner gap `Δ(x)`: largest marker minus the runner-up.
pub fn winner_gap(m: &MarkerSet) -> ScalarField {
    pointwise(m, top_gap)
}

/// δ-gap `c_δ`: infimum of the winner gap over points at distance at least
/// `delta` from the tie network. Empty when no grid point qualifies, or when
/// `delta` exceeds the injectivity radius `L/2` of a nonempty network.
pub fn gap_infimum(m: &MarkerSet, dist_to_tie: &DistanceField, delta: f64) -> Result<Measured> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("exclusion radius must be positive, got {delta}"),
        });
    }
    m.marker(0).check_same_grid(dist_to_tie.field())?;
    if !dist_to_tie.is_empty_set() && delta > 0.5 * m.grid().length() {
        return Ok(Measured::Empty);
    }
    let gap = winner_gap(m);
    let mut best = f64::INFINITY;
    let mut any = false;
    for (&g, &d) in gap.values().iter().zip(dist_to_tie.field().values()) {
        if at_least(d, delta) {
            any = true;
            best = best.min(g);
        }
    }
    Ok(Measured::from_fold(best, any))
}
