//! Uniform periodic grids and the real-valued fields that live on them.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Uniform `n × n` discretization of the torus `[0, L)²`.
///
/// Point `(i, j)` sits at `(x_i, y_j) = (i·h, j·h)`. Fields are stored
/// row-major with `i` (the x index) as the row, so `y` is the fast axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    /// Grid on the standard `2π` torus.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_length(n, TAU)
    }

    pub fn with_length(n: usize, length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGridSize(n));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter {
                name: "length",
                reason: format!("torus period must be positive and finite, got {length}"),
            });
        }
        Ok(Self { n, length })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid spacing `h = L / n`. Exact for power-of-two `n`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Area of one grid cell, the rectangle-rule quadrature weight.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Inverse of [`Grid::index`].
    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n, idx % self.n)
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.spacing();
        (i as f64 * h, j as f64 * h)
    }

    /// Signed integer frequency for FFT bin `b` (`0, 1, …, n/2, −n/2+1, …, −1`).
    #[inline]
    pub fn frequency(&self, b: usize) -> i64 {
        let n = self.n as i64;
        let b = b as i64;
        if b <= n / 2 {
            b
        } else {
            b - n
        }
    }

    /// Physical wavenumber for FFT bin `b`, scaled by `2π / L`.
    #[inline]
    pub fn wavenumber(&self, b: usize) -> f64 {
        self.frequency(b) as f64 * TAU / self.length
    }

    /// Wavenumber used for first derivatives: the Nyquist bin is zeroed so
    /// that derivatives of real fields stay real.
    #[inline]
    pub fn derivative_wavenumber(&self, b: usize) -> f64 {
        if b == self.n / 2 {
            0.0
        } else {
            self.wavenumber(b)
        }
    }

    /// Wrap a coordinate into `[0, L)`.
    #[inline]
    pub fn wrap(&self, x: f64) -> f64 {
        let w = x.rem_euclid(self.length);
        // rem_euclid can round up to exactly L for tiny negative inputs
        if w >= self.length {
            0.0
        } else {
            w
        }
    }

    /// Shortest signed displacement from `a` to `b` on the circle of length `L`.
    #[inline]
    pub fn periodic_delta(&self, a: f64, b: f64) -> f64 {
        let l = self.length;
        let mut d = (b - a).rem_euclid(l);
        if d > 0.5 * l {
            d -= l;
        }
        d
    }

    /// Distance between two points under the periodic metric.
    #[inline]
    pub fn distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        self.periodic_delta(a.0, b.0).hypot(self.periodic_delta(a.1, b.1))
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }
}

/// A real-valued field sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Wrap raw row-major values. The length must match the grid.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Evaluate `f(x, y)` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                let (x, y) = grid.point(i, j);
                values.push(f(x, y));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Reject fields carrying NaN or infinities.
    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { what, index }),
            None => Ok(()),
        }
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        self.grid.check_same(&other.grid)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Spatial average over the torus.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Rectangle-rule integral `h² Σ f`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_area() * self.values.iter().sum::<f64>()
    }

    /// `sup |self − other|`.
    pub fn sup_distance(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Two-component field, e.g. a velocity or a gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        x.check_same_grid(&y)?;
        Ok(Self { x, y })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            x: ScalarField::zeros(grid),
            y: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.x.grid()
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn sup_magnitude(&self) -> f64 {
        self.x
            .values()
            .iter()
            .zip(self.y.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// Pointwise Euclidean magnitude as a scalar field.
    pub fn magnitude(&self) -> ScalarField {
        let values = self
            .x
            .values()
            .iter()
            .zip(self.y.values())
            .map(|(a, b)| a.hypot(*b))
            .collect();
        ScalarField {
            grid: *self.x.grid(),
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(8).is_err());
        assert!(Grid::new(48).is_err());
        assert!(Grid::new(16).is_ok());
    }

    #[test]
    fn spacing_times_n_is_length() {
        for n in [16, 64, 256, 1024] {
            let g = Grid::new(n).unwrap();
            assert_eq!(g.spacing() * n as f64, TAU);
        }
    }

    #[test]
    fn frequencies_follow_fft_order() {
        let g = Grid::new(16).unwrap();
        let f: Vec<i64> = (0..16).map(|b| g.frequency(b)).collect();
        assert_eq!(f, vec![0, 1, 2, 3, 4, 5, 6, 7, 8, -7, -6, -5, -4, -3, -2, -1]);
        assert_eq!(g.derivative_wavenumber(8), 0.0);
    }

    #[test]
    fn periodic_metric_wraps() {
        let g = Grid::new(64).unwrap();
        let h = g.spacing();
        assert!((g.distance((0.0, 0.0), (TAU - h, 0.0)) - h).abs() < 1e-12);
        assert!((g.distance((0.0, 0.0), (std::f64::consts::PI, 0.0)) - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(g.wrap(-1e-300), 0.0);
    }

    #[test]
    fn shape_and_finiteness_checks() {
        let g = Grid::new(16).unwrap();
        assert!(ScalarField::from_values(g, vec![0.0; 10]).is_err());
        let mut f = ScalarField::zeros(g);
        f.values_mut()[7] = f64::NAN;
        assert!(matches!(
            f.check_finite("test"),
            Err(Error::NonFinite { index: 7, .. })
        ));
    }
}
