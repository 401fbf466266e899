//! Discrete Fourier machinery on the periodic grid: transforms, spectral
//! derivatives, the stream-function Poisson solve and 2/3-rule dealiasing.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};

/// Fourier coefficients of a real field, in FFT bin order along both axes.
///
/// The forward transform is unnormalized; the inverse divides by `n²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at bins `(bx, by)`.
    pub fn get(&self, bx: usize, by: usize) -> Complex64 {
        self.coeffs[self.grid.index(bx, by)]
    }

    /// Multiply every coefficient by `f(bx, by)`.
    fn scale_by(&mut self, f: impl Fn(usize, usize) -> Complex64) {
        let n = self.grid.n();
        for bx in 0..n {
            for by in 0..n {
                self.coeffs[bx * n + by] *= f(bx, by);
            }
        }
    }
}

/// Whether bin `b` survives the 2/3 rule, i.e. `|k| ≤ n/3`.
#[inline]
fn in_band(grid: &Grid, b: usize) -> bool {
    3 * grid.frequency(b).unsigned_abs() as usize <= grid.n()
}

/// FFT plans for one grid. Cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.n());
        let inverse = planner.plan_fft_inverse(grid.n());
        Self {
            grid,
            forward,
            inverse,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn check_grid(&self, f: &ScalarField) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch {
                expected: self.grid.n(),
                found: f.grid().n(),
            });
        }
        Ok(())
    }

    fn transform_2d(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // rows are contiguous; columns go through a transpose
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, n);
        plan.process_with_scratch(data, &mut scratch);
        transpose(data, n);
    }

    /// Forward transform of a real field.
    pub fn forward(&self, f: &ScalarField) -> Result<Spectrum> {
        self.check_grid(f)?;
        let mut coeffs: Vec<Complex64> = f
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.transform_2d(&mut coeffs, &self.forward);
        Ok(Spectrum {
            grid: self.grid,
            coeffs,
        })
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse(&self, s: &Spectrum) -> ScalarField {
        let mut data = s.coeffs.clone();
        self.transform_2d(&mut data, &self.inverse);
        let norm = 1.0 / self.grid.len() as f64;
        let values = data.iter().map(|c| c.re * norm).collect();
        ScalarField::from_values(self.grid, values).expect("spectrum shape matches grid")
    }

    fn derivative(&self, s: &Spectrum, along_x: bool) -> Spectrum {
        let g = self.grid;
        let mut out = s.clone();
        out.scale_by(|bx, by| {
            let k = if along_x {
                g.derivative_wavenumber(bx)
            } else {
                g.derivative_wavenumber(by)
            };
            Complex64::new(0.0, k)
        });
        out
    }

    /// `(∂_x f, ∂_y f)` by spectral differentiation.
    pub fn gradient(&self, f: &ScalarField) -> Result<VectorField> {
        f.check_finite("gradient input")?;
        let s = self.forward(f)?;
        Ok(self.gradient_of(&s))
    }

    pub(crate) fn gradient_of(&self, s: &Spectrum) -> VectorField {
        VectorField {
            x: self.inverse(&self.derivative(s, true)),
            y: self.inverse(&self.derivative(s, false)),
        }
    }

    /// Spectral Laplacian `Δf`.
    pub fn laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        let g = self.grid;
        let mut s = self.forward(f)?;
        s.scale_by(|bx, by| {
            let (kx, ky) = (g.wavenumber(bx), g.wavenumber(by));
            Complex64::new(-(kx * kx + ky * ky), 0.0)
        });
        Ok(self.inverse(&s))
    }

    /// Spectral divergence `∂_x v₁ + ∂_y v₂`.
    pub fn divergence(&self, v: &VectorField) -> Result<ScalarField> {
        let dx = self.inverse(&self.derivative(&self.forward(&v.x)?, true));
        let dy = self.inverse(&self.derivative(&self.forward(&v.y)?, false));
        dx.zip_map(&dy, |a, b| a + b)
    }

    pub(crate) fn stream_spectrum(&self, omega_hat: &Spectrum) -> Spectrum {
        let g = self.grid;
        let mut s = omega_hat.clone();
        s.scale_by(|bx, by| {
            let (kx, ky) = (g.wavenumber(bx), g.wavenumber(by));
            let k2 = kx * kx + ky * ky;
            // mode 0 carries the mean, which the Poisson problem removes
            if k2 == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / k2, 0.0)
            }
        });
        s
    }

    /// Solve `−Δψ = ω − ⟨ω⟩` for the zero-mean stream function.
    pub fn solve_stream(&self, omega: &ScalarField) -> Result<ScalarField> {
        omega.check_finite("vorticity")?;
        let s = self.forward(omega)?;
        Ok(self.inverse(&self.stream_spectrum(&s)))
    }

    pub(crate) fn velocity_of(&self, psi_hat: &Spectrum) -> VectorField {
        let grad = self.gradient_of(psi_hat);
        VectorField {
            x: grad.y.map(|v| -v),
            y: grad.x,
        }
    }

    /// Perpendicular gradient `u = ∇^⊥ψ = (−∂_y ψ, ∂_x ψ)`.
    pub fn velocity(&self, psi: &ScalarField) -> Result<VectorField> {
        psi.check_finite("stream function")?;
        let s = self.forward(psi)?;
        Ok(self.velocity_of(&s))
    }

    /// Velocity induced by a vorticity field, skipping the real-space `ψ`.
    pub fn velocity_from_vorticity(&self, omega: &ScalarField) -> Result<VectorField> {
        omega.check_finite("vorticity")?;
        let s = self.forward(omega)?;
        Ok(self.velocity_of(&self.stream_spectrum(&s)))
    }

    /// Zero every mode with `max(|k_x|, |k_y|) > n/3`.
    pub fn dealias(&self, s: &Spectrum) -> Spectrum {
        let mut out = s.clone();
        self.dealias_in_place(&mut out);
        out
    }

    pub fn dealias_in_place(&self, s: &mut Spectrum) {
        let g = self.grid;
        let n = g.n();
        for bx in 0..n {
            let keep_x = in_band(&g, bx);
            for by in 0..n {
                if !(keep_x && in_band(&g, by)) {
                    s.coeffs[bx * n + by] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Sup-norm proxy for `‖∇u‖_{L∞}`: the largest of the four entry-wise
    /// sup norms of the velocity gradient. Within a factor 2 of the pointwise
    /// matrix 2-norm.
    pub fn grad_u_sup_norm(&self, u: &VectorField) -> Result<f64> {
        u.x.check_finite("velocity")?;
        u.y.check_finite("velocity")?;
        let g1 = self.gradient_of(&self.forward(&u.x)?);
        let g2 = self.gradient_of(&self.forward(&u.y)?);
        Ok([&g1.x, &g1.y, &g2.x, &g2.y]
            .iter()
            .map(|f| f.sup_norm())
            .fold(0.0, f64::max))
    }

    /// Same proxy computed straight from the stream-function spectrum.
    /// `∂_y u₂ = −∂_x u₁`, so three transforms suffice.
    pub(crate) fn grad_u_sup_norm_from_stream(&self, psi_hat: &Spectrum) -> f64 {
        let g = self.grid;
        let mut dxy = psi_hat.clone();
        let mut dyy = psi_hat.clone();
        let mut dxx = psi_hat.clone();
        dxy.scale_by(|bx, by| {
            Complex64::new(-g.derivative_wavenumber(bx) * g.derivative_wavenumber(by), 0.0)
        });
        dyy.scale_by(|_, by| {
            let k = g.derivative_wavenumber(by);
            Complex64::new(-k * k, 0.0)
        });
        dxx.scale_by(|bx, _| {
            let k = g.derivative_wavenumber(bx);
            Complex64::new(-k * k, 0.0)
        });
        [dxy, dyy, dxx]
            .iter()
            .map(|s| self.inverse(s).sup_norm())
            .fold(0.0, f64::max)
    }
}

/// Trigonometric interpolant through the samples of one grid line.
#[derive(Debug, Clone)]
pub struct LineInterpolant {
    coeffs: Vec<Complex64>,
    frequencies: Vec<f64>,
}

impl LineInterpolant {
    /// Value at coordinate `t` along the line. Exact at the samples.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.coeffs.len() as f64;
        self.coeffs
            .iter()
            .zip(&self.frequencies)
            .map(|(c, &k)| {
                let (s, co) = (k * t).sin_cos();
                c.re * co - c.im * s
            })
            .sum::<f64>()
            / n
    }
}

impl Spectral {
    /// Interpolant of `n` equispaced samples along one grid axis.
    pub fn line_interpolant(&self, samples: &[f64]) -> LineInterpolant {
        assert_eq!(samples.len(), self.grid.n(), "one sample per grid point");
        let mut coeffs: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut coeffs);
        let n = self.grid.n();
        let scale = std::f64::consts::TAU / self.grid.length();
        let frequencies = (0..n)
            .map(|b| {
                // the Nyquist term is real for real samples; either sign of k gives cos
                self.grid.frequency(b) as f64 * scale
            })
            .collect();
        LineInterpolant { coeffs, frequencies }
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}
