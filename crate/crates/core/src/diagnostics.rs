//! Quantitative comparisons between soft and sharp solutions: error norms,
//! marker errors, closure residuals, rate fits, conservation monitors and
//! the pointwise-bound check.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::gating::{assemble_soft_vorticity, MarkerSet, PhaseConfig};
use crate::geometry::DistanceField;
use crate::grid::ScalarField;
use crate::measure::{at_least, Measured};
use crate::spectral::Spectral;

/// Entry names used in [`DiagnosticRecord`]s.
pub mod keys {
    pub const L1_ERROR: &str = "l1_error";
    pub const SUP_ERROR_DELTA: &str = "sup_error_delta";
    pub const MARKER_SUP_ERROR: &str = "marker_sup_error";
    pub const CLOSURE_RESIDUAL: &str = "closure_residual";
    pub const C_DELTA: &str = "c_delta";
    pub const ENERGY: &str = "energy";
    pub const ENSTROPHY: &str = "enstrophy";
    pub const MEAN_OMEGA: &str = "mean_omega";
    pub const ACCUMULATED_GRADU: &str = "accumulated_gradu";
    pub const GRADU: &str = "gradu";
    pub const BOUND: &str = "bound";
    pub const BOUND_MARGIN: &str = "bound_margin";

    pub fn hausdorff(i: usize, j: usize) -> String {
        format!("hausdorff_{}{}", i + 1, j + 1)
    }

    pub fn min_grad_strip(i: usize, j: usize) -> String {
        format!("min_grad_strip_{}{}", i + 1, j + 1)
    }

    pub fn marker_mean(k: usize) -> String {
        format!("marker_mean_{}", k + 1)
    }

    /// `0.9 · m₀ · exp(−∫‖∇u‖∞)` for one pair.
    pub fn persistence_bound(i: usize, j: usize) -> String {
        format!("persistence_bound_{}{}", i + 1, j + 1)
    }
}

/// Time-stamped named scalars. Keys are kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub beta: f64,
    pub entries: BTreeMap<String, Measured>,
    /// Free-text flags such as "degenerate regime".
    pub notes: Vec<String>,
}

impl DiagnosticRecord {
    pub fn new(t: f64, beta: f64) -> Self {
        Self {
            t,
            beta,
            entries: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn set(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.entries.insert(key.into(), Measured::Value(value));
        self
    }

    pub fn set_measured(&mut self, key: impl Into<String>, value: Measured) -> &mut Self {
        self.entries.insert(key.into(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<Measured> {
        self.entries.get(key).copied()
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(Measured::value)
    }
}

/// `h² Σ |a − b|`.
pub fn l1_error(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.check_same_grid(b)?;
    let sum: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum();
    Ok(a.grid().cell_area() * sum)
}

/// `max |a − b|` over grid points at distance at least `delta` from the
/// tie network; `delta = 0` keeps every point.
pub fn sup_error_away(a: &ScalarField, b: &ScalarField, dist: &DistanceField, delta: f64) -> Result<Measured> {
    a.check_same_grid(b)?;
    a.check_same_grid(dist.field())?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("exclusion radius must be nonnegative, got {delta}"),
        });
    }
    let mut worst: f64 = 0.0;
    let mut any = false;
    for ((x, y), &d) in a.values().iter().zip(b.values()).zip(dist.field().values()) {
        if delta == 0.0 || at_least(d, delta) {
            any = true;
            worst = worst.max((x - y).abs());
        }
    }
    Ok(Measured::from_fold(worst, any))
}

/// `E = max_k ‖φ_k^soft − φ_k^sharp‖_∞`.
pub fn marker_sup_error(soft: &MarkerSet, sharp: &MarkerSet) -> Result<f64> {
    if soft.k() != sharp.k() {
        return Err(Error::InvalidParameter {
            name: "markers",
            reason: format!("phase counts differ: {} vs {}", soft.k(), sharp.k()),
        });
    }
    let mut worst: f64 = 0.0;
    for (a, b) in soft.markers().iter().zip(sharp.markers()) {
        worst = worst.max(a.sup_distance(b)?);
    }
    Ok(worst)
}

/// `sup |ω_direct − Σ_k c_k π_k^β|`.
pub fn closure_residual(direct_omega: &ScalarField, m: &MarkerSet) -> Result<f64> {
    direct_omega.sup_distance(&assemble_soft_vorticity(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    Pass,
    Fail,
    /// `c_δ − 2E ≤ 0`: the bound is vacuous.
    Degenerate,
    /// An input was a sentinel.
    Skipped,
}

impl fmt::Display for BoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundStatus::Pass => "pass",
            BoundStatus::Fail => "fail",
            BoundStatus::Degenerate => "degenerate regime",
            BoundStatus::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub status: BoundStatus,
    /// `(K−1) max|c_i − c_j| e^{−β(c_δ − 2E)}`.
    pub bound: f64,
    /// `bound / measured`; infinite when the measured error is zero.
    pub margin: f64,
}

/// Check `sup_{dist ≥ δ} |ω^β − ω| ≤ (K−1) max|c_i−c_j| e^{−β(c_δ − 2E_β)}`
/// with measured quantities. Failure requires exceeding the bound by more
/// than the grid slack factor `1 + 10h`.
pub fn check_pointwise_bound(
    measured: Measured,
    c_delta: Measured,
    marker_error: f64,
    beta: f64,
    config: &PhaseConfig,
    h: f64,
) -> BoundCheck {
    let (Some(measured), Some(c_delta)) = (measured.value(), c_delta.value()) else {
        return BoundCheck {
            status: BoundStatus::Skipped,
            bound: f64::NAN,
            margin: f64::NAN,
        };
    };
    let exponent = c_delta - 2.0 * marker_error;
    let bound = config.bound_prefactor() * (-beta * exponent).exp();
    let margin = if measured == 0.0 { f64::INFINITY } else { bound / measured };
    let status = if exponent <= 0.0 {
        BoundStatus::Degenerate
    } else if measured <= bound * (1.0 + 10.0 * h) {
        BoundStatus::Pass
    } else {
        BoundStatus::Fail
    };
    BoundCheck { status, bound, margin }
}

/// [`check_pointwise_bound`] fed from a record holding `sup_error_delta`,
/// `c_delta` and `marker_sup_error`.
pub fn verify_pointwise_bound(record: &DiagnosticRecord, config: &PhaseConfig, h: f64) -> BoundCheck {
    let marker_error = record.value(keys::MARKER_SUP_ERROR);
    match (
        record.get(keys::SUP_ERROR_DELTA),
        record.get(keys::C_DELTA),
        marker_error,
    ) {
        (Some(sup), Some(c), Some(e)) => check_pointwise_bound(sup, c, e, record.beta, config, h),
        _ => BoundCheck {
            status: BoundStatus::Skipped,
            bound: f64::NAN,
            margin: f64::NAN,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// `y ≈ C β^slope`, fitted on `(ln β, ln y)`.
    Reciprocal,
    /// `y ≈ C e^{slope·β}`, fitted on `(β, ln y)`.
    Exponential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub model: RateModel,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Samples dropped because `y` was zero.
    pub dropped: usize,
}

/// Least-squares rate fit in log coordinates. Zero samples are dropped and
/// counted; at least three usable samples are required.
pub fn fit_rate(xs: &[f64], ys: &[f64], model: RateModel) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: format!("{} abscissae for {} values", xs.len(), ys.len()),
        });
    }
    let mut dropped = 0;
    let mut pts = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x.is_finite() && y.is_finite()) || y < 0.0 || x <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: format!("need positive finite samples, got ({x}, {y})"),
            });
        }
        if y == 0.0 {
            dropped += 1;
            continue;
        }
        let u = match model {
            RateModel::Reciprocal => x.ln(),
            RateModel::Exponential => x,
        };
        pts.push((u, y.ln()));
    }
    if pts.len() < 3 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: format!("need at least 3 nonzero samples, got {}", pts.len()),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "abscissae are all equal".into(),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateFit {
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        model,
        slope,
        intercept,
        r2,
        dropped,
    })
}

/// Mean, enstrophy and kinetic energy of a vorticity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conservation {
    pub mean_omega: f64,
    /// `‖ω‖²_{L²}`.
    pub enstrophy: f64,
    /// `½‖u‖²_{L²}`.
    pub energy: f64,
}

pub fn conservation_of(spectral: &Spectral, omega: &ScalarField) -> Result<Conservation> {
    let u = spectral.velocity_from_vorticity(omega)?;
    let area = omega.grid().cell_area();
    let speed2: f64 = u.x.values().iter().zip(u.y.values()).map(|(a, b)| a * a + b * b).sum();
    Ok(Conservation {
        mean_omega: omega.mean(),
        enstrophy: area * omega.values().iter().map(|w| w * w).sum::<f64>(),
        energy: 0.5 * area * speed2,
    })
}

/// Conservation monitors for a simulation state's assembled vorticity.
pub fn conservation_report(spectral: &Spectral, state: &crate::transport::SimState) -> Result<Conservation> {
    let omega = match state.mode {
        crate::transport::Mode::Soft => assemble_soft_vorticity(&state.markers),
        crate::transport::Mode::Sharp => crate::gating::assemble_sharp_vorticity(&state.markers),
    };
    conservation_of(spectral, &omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn l1_examples() {
        let g = Grid::new(32).unwrap();
        let a = ScalarField::from_fn(g, |x, y| x.sin() * y);
        assert_eq!(l1_error(&a, &a).unwrap(), 0.0);
        let b = a.map(|v| v - 1.0);
        assert!((l1_error(&a, &b).unwrap() - TAU * TAU).abs() < 1e-10);
        assert!(l1_error(&a, &ScalarField::zeros(Grid::new(16).unwrap())).is_err());
    }

    #[test]
    fn sup_away_examples() {
        let g = Grid::new(32).unwrap();
        let a = ScalarField::from_fn(g, |x, _| 0.5 * (1.0 + x.cos()));
        let b = ScalarField::zeros(g);
        let dist = DistanceField::from_field(ScalarField::from_fn(g, |x, _| x));
        assert_eq!(sup_error_away(&a, &a, &dist, 0.5).unwrap(), Measured::Value(0.0));
        assert_eq!(sup_error_away(&a, &b, &dist, 0.0).unwrap(), Measured::Value(1.0));
        assert_eq!(sup_error_away(&a, &b, &dist, 7.0).unwrap(), Measured::Empty);
        // x = 0 is excluded once δ > 0
        let v = sup_error_away(&a, &b, &dist, 0.1).unwrap().value().unwrap();
        assert!(v < 1.0);
    }

    #[test]
    fn bound_check_cases() {
        let cfg = PhaseConfig::new(vec![1.0, -1.0], 20.0).unwrap();
        let c = check_pointwise_bound(Measured::Value(0.0), Measured::Value(0.5), 0.0, 20.0, &cfg, 0.05);
        assert_eq!(c.status, BoundStatus::Pass);
        assert!(c.margin.is_infinite());

        let c = check_pointwise_bound(Measured::Value(1.5), Measured::Value(0.1), 0.06, 20.0, &cfg, 0.05);
        assert_eq!(c.status, BoundStatus::Degenerate);
        assert!(c.bound >= cfg.bound_prefactor());

        let c = check_pointwise_bound(Measured::Empty, Measured::Value(0.1), 0.0, 20.0, &cfg, 0.05);
        assert_eq!(c.status, BoundStatus::Skipped);

        // saturated exactly: margin 1, passes
        let bound = 2.0 * (-20.0f64 * 0.3).exp();
        let c = check_pointwise_bound(Measured::Value(bound), Measured::Value(0.3), 0.0, 20.0, &cfg, 0.05);
        assert_eq!(c.status, BoundStatus::Pass);
        assert!((c.margin - 1.0).abs() < 1e-15);

        let c = check_pointwise_bound(Measured::Value(2.0 * bound), Measured::Value(0.3), 0.0, 20.0, &cfg, 0.05);
        assert_eq!(c.status, BoundStatus::Fail);
    }

    #[test]
    fn record_bound_check() {
        let cfg = PhaseConfig::new(vec![1.0, -1.0], 20.0).unwrap();
        let mut r = DiagnosticRecord::new(0.0, 20.0);
        assert_eq!(verify_pointwise_bound(&r, &cfg, 0.05).status, BoundStatus::Skipped);
        r.set(keys::SUP_ERROR_DELTA, 1e-7)
            .set(keys::C_DELTA, (PI / 4.0).sin())
            .set(keys::MARKER_SUP_ERROR, 0.0);
        let c = verify_pointwise_bound(&r, &cfg, 0.05);
        assert_eq!(c.status, BoundStatus::Pass);
        assert!(c.margin > 1.0);
    }

    #[test]
    fn fit_synthetic_laws() {
        let xs = [10.0, 20.0, 40.0, 80.0, 160.0];
        let ys: Vec<f64> = xs.iter().map(|b| 1.0 / b).collect();
        let f = fit_rate(&xs, &ys, RateModel::Reciprocal).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);

        let ys: Vec<f64> = xs.iter().map(|b| 7.0 * (-0.3 * b).exp()).collect();
        let f = fit_rate(&xs, &ys, RateModel::Exponential).unwrap();
        assert!((f.slope + 0.3).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_drops_zeros_and_needs_three_points() {
        let f = fit_rate(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.5, 0.0, 0.25], RateModel::Reciprocal).unwrap();
        assert_eq!(f.dropped, 1);
        assert!(fit_rate(&[1.0, 2.0, 3.0], &[1.0, 0.0, 0.3], RateModel::Reciprocal).is_err());
    }

    #[test]
    fn conservation_examples() {
        let g = Grid::new(64).unwrap();
        let sp = Spectral::new(g);
        let c = conservation_of(&sp, &ScalarField::constant(g, 0.5)).unwrap();
        assert!((c.mean_omega - 0.5).abs() < 1e-15);
        assert!((c.enstrophy - 0.25 * TAU * TAU).abs() < 1e-10);
        assert!(c.energy.abs() < 1e-20);

        let c = conservation_of(&sp, &ScalarField::from_fn(g, |x, _| x.cos())).unwrap();
        assert!(c.mean_omega.abs() < 1e-15);
        assert!((c.enstrophy - 2.0 * PI * PI).abs() < 1e-10);
        assert!((c.energy - PI * PI).abs() < 1e-10);
    }
}
