//! Shipped initial partitions. Each preset is a closed-form marker family;
//! its nondegeneracy constants are measured on the grid, not assumed.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gating::{MarkerSet, PhaseConfig};
use crate::geometry::min_gradient_on_strip;
use crate::grid::{Grid, ScalarField};
use crate::measure::Measured;
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// `φ₁ = sin y, φ₂ = 0`, levels `(1, −1)`: steady shear with tie lines
    /// `y ∈ {0, π}`.
    Shear2,
    /// `φ_k = cos(x − a_k) + cos(y − b_k)` with centers on the diagonal at
    /// `0, 2π/3, 4π/3`, levels `(1, 0, −1)`.
    Cells3,
    /// `φ_k = cos(y − 2πk/3)` for `k = 1, 2, 3`, levels `(1, 0, −1)`: steady three-band stack.
    Bands3,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Shear2, Preset::Cells3, Preset::Bands3];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Shear2 => "shear2",
            Preset::Cells3 => "cells3",
            Preset::Bands3 => "bands3",
        }
    }

    pub fn levels(self) -> Vec<f64> {
        match self {
            Preset::Shear2 => vec![1.0, -1.0],
            Preset::Cells3 | Preset::Bands3 => vec![1.0, 0.0, -1.0],
        }
    }

    pub fn k(self) -> usize {
        self.levels().len()
    }

    /// Marker fields on `grid`.
    pub fn markers(self, grid: Grid) -> Vec<ScalarField> {
        match self {
            Preset::Shear2 => vec![ScalarField::from_fn(grid, |_, y| y.sin()), ScalarField::zeros(grid)],
            Preset::Cells3 => (0..3)
                .map(|k| {
                    let c = TAU * k as f64 / 3.0;
                    ScalarField::from_fn(grid, move |x, y| (x - c).cos() + (y - c).cos())
                })
                .collect(),
            Preset::Bands3 => (1..=3)
                .map(|k| {
                    let c = TAU * k as f64 / 3.0;
                    ScalarField::from_fn(grid, move |_, y| (y - c).cos())
                })
                .collect(),
        }
    }

    pub fn build(self, grid: Grid, beta: f64) -> Result<MarkerSet> {
        MarkerSet::new(self.markers(grid), PhaseConfig::new(self.levels(), beta)?)
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Shear2 => "K=2, phi1 = sin y, phi2 = 0, levels (1, -1); steady shear",
            Preset::Cells3 => "K=3, phi_k = cos(x - a_k) + cos(y - a_k), a_k = 2 pi k / 3, levels (1, 0, -1)",
            Preset::Bands3 => "K=3, phi_k = cos(y - 2 pi k / 3), k = 1..3, levels (1, 0, -1); steady bands",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter {
                name: "preset",
                reason: format!("unknown preset `{s}` (known: shear2, cells3, bands3)"),
            })
    }
}

/// Look up a preset by name and build it.
pub fn build_preset(name: &str, grid: Grid, beta: f64) -> Result<MarkerSet> {
    name.parse::<Preset>()?.build(grid, beta)
}

/// Strip minimum of `|∇(φ_i − φ_j)|` for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairNondegeneracy {
    pub i: usize,
    pub j: usize,
    pub min_gradient: Measured,
}

/// Measured nondegeneracy constants `(δ, m)`; `m` is the minimum over pairs
/// with a nonempty strip.
#[derive(Debug, Clone, PartialEq)]
pub struct Nondegeneracy {
    pub delta: f64,
    pub m: Measured,
    pub pairs: Vec<PairNondegeneracy>,
}

pub fn measure_nondegeneracy(spectral: &Spectral, markers: &MarkerSet, delta: f64) -> Result<Nondegeneracy> {
    let mut pairs = Vec::new();
    for i in 0..markers.k() {
        for j in (i + 1)..markers.k() {
            pairs.push(PairNondegeneracy {
                i,
                j,
                min_gradient: min_gradient_on_strip(spectral, markers, i, j, delta)?,
            });
        }
    }
    let m = pairs
        .iter()
        .filter_map(|p| p.min_gradient.value())
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    Ok(Nondegeneracy {
        delta,
        m: m.map_or(Measured::Empty, Measured::Value),
        pairs,
    })
}

/// A custom marker: sum of `amp · cos(kx·x + ky·y + phase)` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMarker {
    pub terms: Vec<FourierTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierTerm {
    pub amplitude: f64,
    pub kx: i32,
    pub ky: i32,
    pub phase: f64,
}

impl FourierMarker {
    pub fn field(&self, grid: Grid) -> ScalarField {
        let scale = TAU / grid.length();
        ScalarField::from_fn(grid, |x, y| {
            self.terms
                .iter()
                .map(|t| t.amplitude * (scale * (t.kx as f64 * x + t.ky as f64 * y) + t.phase).cos())
                .sum()
        })
    }
}

/// Default strip half-width used when reporting preset constants.
pub const DEFAULT_STRIP_DELTA: f64 = 0.5;


#[cfg(test)]
mod tests {
    use super::*;
    use crate::gating::winner_index;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("cells4".parse::<Preset>().is_err());
    }

    #[test]
    fn shear_strip_constant() {
        let g = Grid::new(128).unwrap();
        let sp = Spectral::new(g);
        let m = build_preset("shear2", g, 40.0).unwrap();
        let nd = measure_nondegeneracy(&sp, &m, 0.5).unwrap();
        assert!((nd.m.value().unwrap() - 3f64.sqrt() / 2.0).abs() <= 1e-6);
    }

    #[test]
    fn cells_partition_covers_torus() {
        let g = Grid::new(128).unwrap();
        let m = build_preset("cells3", g, 10.0).unwrap();
        let mut counts = [0usize; 3];
        for k in winner_index(&m) {
            counts[k] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0));
        let area: f64 = counts.iter().map(|&c| c as f64 * g.cell_area()).sum();
        assert!((area - TAU * TAU).abs() < 1e-9);
    }

    #[test]
    fn fourier_marker_matches_closed_form() {
        let g = Grid::new(32).unwrap();
        let m = FourierMarker {
            terms: vec![FourierTerm {
                amplitude: 1.0,
                kx: 0,
                ky: 1,
                phase: 0.0,
            }],
        };
        let expect = ScalarField::from_fn(g, |_, y| y.cos());
        assert!(m.field(g).sup_distance(&expect).unwrap() < 1e-15);
    }
}
