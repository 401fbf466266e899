//! Time integration: markers advected by the velocity their own assembled
//! vorticity induces, the direct vorticity path used for closure checks,
//! and the running integral of `‖∇u‖_{L∞}`.
//!
//! All paths share one scheme: classical RK4 in time, pseudo-spectral
//! advection `u·∇f` with 2/3-rule dealiasing, CFL-limited steps.

use std::fmt;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gating::{assemble_sharp_vorticity, assemble_soft_vorticity, MarkerSet};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::spectral::{Spectral, Spectrum};

/// Which vorticity assembly drives the velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Softmax mixture at the marker set's `β`.
    Soft,
    /// Argmax levels: the sharp multi-phase patch.
    Sharp,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Soft => "soft",
            Mode::Sharp => "sharp",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub save_every: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            dt_max: 0.05,
            t_end: 1.0,
            save_every: 10,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl", format!("must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return bad("dt_max", format!("must be positive, got {}", self.dt_max));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad("t_end", format!("must be nonnegative, got {}", self.t_end));
        }
        if self.save_every == 0 {
            return bad("save_every", "must be at least 1".into());
        }
        Ok(())
    }
}

const VELOCITY_FLOOR: f64 = 1e-12;
const MIN_STEP_FRACTION: f64 = 1e-12;

/// CFL-limited step `min(dt_max, cfl·h / max(‖u‖_sup, ε))`, clamped so it
/// never passes `horizon` when starting from `time`.
pub fn cfl_dt(u: &VectorField, ctrl: &StepControl, grid: &Grid, time: f64, horizon: f64) -> f64 {
    let speed = u.sup_magnitude().max(VELOCITY_FLOOR);
    let dt = ctrl.dt_max.min(ctrl.cfl * grid.spacing() / speed);
    dt.min((horizon - time).max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub time: f64,
    pub markers: MarkerSet,
    pub mode: Mode,
    /// Trapezoidal `∫₀ᵗ ‖∇u(s)‖_{L∞} ds`.
    pub accumulated_gradu: f64,
    pub step_count: usize,
    /// `‖∇u‖_{L∞}` at the current time; the left endpoint of the next
    /// trapezoid.
    pub gradu_now: f64,
}

/// A step that produced non-finite values, with the state before it.
#[derive(Debug)]
pub struct StepFailure {
    pub error: Error,
    pub last_good: Box<SimState>,
}

impl fmt::Display for StepFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl std::error::Error for StepFailure {}

/// Saved states of a run, in time order.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub states: Vec<SimState>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&SimState> {
        self.states.last()
    }
}

/// A failed run together with everything saved before the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} states saved)", self.error, self.partial.states.len())
    }
}

impl std::error::Error for RunFailure {}

/// Vorticity sample from the direct evolution path.
#[derive(Debug, Clone, PartialEq)]
pub struct VorticityState {
    pub time: f64,
    pub omega: ScalarField,
    pub step_count: usize,
}

/// Integrator bound to one grid.
#[derive(Debug, Clone)]
pub struct Transport {
    spectral: Spectral,
}

impl Transport {
    pub fn new(grid: Grid) -> Self {
        Self {
            spectral: Spectral::new(grid),
        }
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn grid(&self) -> &Grid {
        self.spectral.grid()
    }

    fn assemble(markers: &MarkerSet, mode: Mode) -> ScalarField {
        match mode {
            Mode::Soft => assemble_soft_vorticity(markers),
            Mode::Sharp => assemble_sharp_vorticity(markers),
        }
    }

    fn stream_spectrum(&self, omega: &ScalarField) -> Result<Spectrum> {
        Ok(self.spectral.stream_spectrum(&self.spectral.forward(omega)?))
    }

    /// Fresh state at time zero.
    pub fn initial_state(&self, markers: MarkerSet, mode: Mode) -> Result<SimState> {
        let psi_hat = self.stream_spectrum(&Self::assemble(&markers, mode))?;
        Ok(SimState {
            time: 0.0,
            gradu_now: self.spectral.grad_u_sup_norm_from_stream(&psi_hat),
            markers,
            mode,
            accumulated_gradu: 0.0,
            step_count: 0,
        })
    }

    /// Divergence-free velocity induced by the state's assembled vorticity.
    pub fn induced_velocity(&self, state: &SimState) -> Result<VectorField> {
        self.velocity_for(&state.markers, state.mode)
    }

    fn velocity_for(&self, markers: &MarkerSet, mode: Mode) -> Result<VectorField> {
        let psi_hat = self.stream_spectrum(&Self::assemble(markers, mode))?;
        Ok(self.spectral.velocity_of(&psi_hat))
    }

    /// `−P(u·∇f)` with `P` the 2/3-rule projection; mode 0 of the product is
    /// dropped since `u·∇f = ∇·(uf)` has zero mean for divergence-free `u`.
    fn advection_rhs(&self, u: &VectorField, f: &ScalarField) -> Result<ScalarField> {
        let grad = self.spectral.gradient_of(&self.spectral.forward(f)?);
        let product: Vec<f64> = u
            .x
            .values()
            .iter()
            .zip(u.y.values())
            .zip(grad.x.values().iter().zip(grad.y.values()))
            .map(|((a, b), (fx, fy))| -(a * fx + b * fy))
            .collect();
        let product = ScalarField::from_values(*self.grid(), product)?;
        let mut hat = self.spectral.forward(&product)?;
        self.spectral.dealias_in_place(&mut hat);
        hat.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
        Ok(self.spectral.inverse(&hat))
    }

    fn marker_rhs(&self, markers: &MarkerSet, mode: Mode, sign: f64) -> Result<Vec<ScalarField>> {
        let mut u = self.velocity_for(markers, mode)?;
        if sign < 0.0 {
            u.x = u.x.map(|v| -v);
            u.y = u.y.map(|v| -v);
        }
        markers
            .markers()
            .iter()
            .map(|f| self.advection_rhs(&u, f))
            .collect()
    }

    fn vorticity_rhs(&self, omega: &ScalarField) -> Result<ScalarField> {
        let u = self.spectral.velocity_from_vorticity(omega)?;
        self.advection_rhs(&u, omega)
    }

    /// One RK4 step of the coupled marker system.
    pub fn advect_step(&self, state: &SimState, dt: f64) -> std::result::Result<SimState, StepFailure> {
        self.signed_step(state, dt, 1.0)
    }

    /// One RK4 step with the induced velocity negated, i.e. the coupled
    /// system run backwards in time. `time` still advances by `dt`.
    pub fn advect_step_reversed(&self, state: &SimState, dt: f64) -> std::result::Result<SimState, StepFailure> {
        self.signed_step(state, dt, -1.0)
    }

    fn signed_step(&self, state: &SimState, dt: f64, sign: f64) -> std::result::Result<SimState, StepFailure> {
        let fail = |error: Error| StepFailure {
            error,
            last_good: Box::new(state.clone()),
        };
        if !(dt.is_finite() && dt > 0.0) {
            return Err(fail(Error::InvalidParameter {
                name: "dt",
                reason: format!("time step must be positive, got {dt}"),
            }));
        }
        let integration = |reason: String| Error::Integration {
            time: state.time,
            steps: state.step_count,
            reason,
        };
        let mode = state.mode;
        let base = &state.markers;
        let stage = |rhs: &[ScalarField], scale: f64| -> Result<MarkerSet> {
            let fields = base
                .markers()
                .iter()
                .zip(rhs)
                .map(|(f, r)| f.zip_map(r, |a, b| a + scale * b))
                .collect::<Result<Vec<_>>>()?;
            base.with_markers(fields)
        };
        let step = || -> Result<MarkerSet> {
            let k1 = self.marker_rhs(base, mode, sign)?;
            let k2 = self.marker_rhs(&stage(&k1, 0.5 * dt)?, mode, sign)?;
            let k3 = self.marker_rhs(&stage(&k2, 0.5 * dt)?, mode, sign)?;
            let k4 = self.marker_rhs(&stage(&k3, dt)?, mode, sign)?;
            let mut fields = Vec::with_capacity(base.k());
            for (k, f) in base.markers().iter().enumerate() {
                let values = f
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(idx, &v)| {
                        v + dt / 6.0
                            * (k1[k].values()[idx]
                                + 2.0 * k2[k].values()[idx]
                                + 2.0 * k3[k].values()[idx]
                                + k4[k].values()[idx])
                    })
                    .collect();
                fields.push(ScalarField::from_values(*f.grid(), values)?);
            }
            base.with_markers(fields)
        };
        let markers = step().map_err(|e| match e {
            Error::NonFinite { what, index } => fail(integration(format!("non-finite {what} at index {index}"))),
            other => fail(other),
        })?;
        let psi_hat = self
            .stream_spectrum(&Self::assemble(&markers, mode))
            .map_err(|e| fail(integration(e.to_string())))?;
        let gradu_next = self.spectral.grad_u_sup_norm_from_stream(&psi_hat);
        if !gradu_next.is_finite() {
            return Err(fail(integration("non-finite velocity gradient".into())));
        }
        Ok(SimState {
            time: state.time + dt,
            markers,
            mode,
            accumulated_gradu: state.accumulated_gradu + 0.5 * dt * (state.gradu_now + gradu_next),
            step_count: state.step_count + 1,
            gradu_now: gradu_next,
        })
    }

    /// Step from `state` until exactly `target`, calling `on_step` after
    /// each step.
    pub fn advance_to(
        &self,
        state: SimState,
        target: f64,
        ctrl: &StepControl,
        mut on_step: impl FnMut(&SimState),
    ) -> std::result::Result<SimState, StepFailure> {
        let mut state = state;
        while state.time < target {
            let u = self.induced_velocity(&state).map_err(|error| StepFailure {
                error,
                last_good: Box::new(state.clone()),
            })?;
            let (dt, last) = self
                .next_dt(&u, ctrl, state.time, target, state.step_count)
                .map_err(|error| StepFailure {
                    error,
                    last_good: Box::new(state.clone()),
                })?;
            let mut next = self.advect_step(&state, dt)?;
            if last {
                next.time = target;
            }
            state = next;
            on_step(&state);
        }
        Ok(state)
    }

    /// Run to `ctrl.t_end`, saving the initial state, every
    /// `ctrl.save_every`-th step and the final state. `hook` sees every
    /// saved state.
    pub fn run(
        &self,
        initial: MarkerSet,
        mode: Mode,
        ctrl: &StepControl,
        mut hook: impl FnMut(&SimState),
    ) -> std::result::Result<Trajectory, RunFailure> {
        let mut saved = Trajectory::default();
        let fail = |error: Error, saved: Trajectory| RunFailure { error, partial: saved };
        if let Err(e) = ctrl.validate() {
            return Err(fail(e, saved));
        }
        let state = match self.initial_state(initial, mode) {
            Ok(s) => s,
            Err(e) => return Err(fail(e, saved)),
        };
        hook(&state);
        saved.states.push(state.clone());
        let mut pending: Vec<SimState> = Vec::new();
        let result = self.advance_to(state, ctrl.t_end, ctrl, |s| {
            if s.step_count.is_multiple_of(ctrl.save_every) {
                pending.push(s.clone());
            }
        });
        for s in pending {
            hook(&s);
            saved.states.push(s);
        }
        match result {
            Ok(last) => {
                if saved.last().map(|s| s.step_count) != Some(last.step_count) {
                    hook(&last);
                    saved.states.push(last);
                }
                Ok(saved)
            }
            Err(StepFailure { error, .. }) => Err(fail(error, saved)),
        }
    }

    /// One RK4 step of `∂_t ω + u·∇ω = 0` with `u` induced by `ω` itself.
    pub fn vorticity_step(&self, omega: &ScalarField, dt: f64) -> Result<ScalarField> {
        let axpy = |a: &ScalarField, b: &ScalarField, s: f64| a.zip_map(b, |x, y| x + s * y);
        let k1 = self.vorticity_rhs(omega)?;
        let k2 = self.vorticity_rhs(&axpy(omega, &k1, 0.5 * dt)?)?;
        let k3 = self.vorticity_rhs(&axpy(omega, &k2, 0.5 * dt)?)?;
        let k4 = self.vorticity_rhs(&axpy(omega, &k3, dt)?)?;
        let values = (0..omega.values().len())
            .map(|i| {
                omega.values()[i]
                    + dt / 6.0 * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i])
            })
            .collect();
        let next = ScalarField::from_values(*omega.grid(), values)?;
        next.check_finite("vorticity")?;
        Ok(next)
    }

    /// Advance the direct vorticity path to exactly `target`.
    pub fn advance_vorticity_to(
        &self,
        state: VorticityState,
        target: f64,
        ctrl: &StepControl,
    ) -> Result<VorticityState> {
        let mut state = state;
        while state.time < target {
            let u = self.spectral.velocity_from_vorticity(&state.omega)?;
            let (dt, last) = self.next_dt(&u, ctrl, state.time, target, state.step_count)?;
            let new_time = if last { target } else { state.time + dt };
            state = self.advance_one(state, dt, new_time)?;
        }
        Ok(state)
    }

    /// Evolve `ω₀` directly to `ctrl.t_end`, sampling the initial field,
    /// every `save_every`-th step and the final field.
    pub fn evolve_vorticity_direct(&self, omega0: &ScalarField, ctrl: &StepControl) -> Result<Vec<VorticityState>> {
        ctrl.validate()?;
        omega0.check_finite("initial vorticity")?;
        let mut state = VorticityState {
            time: 0.0,
            omega: omega0.clone(),
            step_count: 0,
        };
        let mut out = vec![state.clone()];
        while state.time < ctrl.t_end {
            let u = self.spectral.velocity_from_vorticity(&state.omega)?;
            let (dt, last) = self.next_dt(&u, ctrl, state.time, ctrl.t_end, state.step_count)?;
            let new_time = if last { ctrl.t_end } else { state.time + dt };
            state = self.advance_one(state, dt, new_time)?;
            if state.step_count.is_multiple_of(ctrl.save_every) || last {
                out.push(state.clone());
            }
        }
        Ok(out)
    }

    /// CFL step towards `target`; fails on a non-finite velocity or a step
    /// that could not reach the target in any feasible number of steps.
    fn next_dt(&self, u: &VectorField, ctrl: &StepControl, time: f64, target: f64, steps: usize) -> Result<(f64, bool)> {
        let fail = |reason: String| Error::Integration { time, steps, reason };
        if !u.sup_magnitude().is_finite() {
            return Err(fail("non-finite velocity".into()));
        }
        let (dt, last) = clamp_step(cfl_dt(u, ctrl, self.grid(), time, target), time, target);
        if !last && dt < MIN_STEP_FRACTION * target.abs().max(1.0) {
            return Err(fail(format!("time step {dt:e} collapsed at t = {time}")));
        }
        Ok((dt, last))
    }

    fn advance_one(&self, state: VorticityState, dt: f64, new_time: f64) -> Result<VorticityState> {
        let omega = self.vorticity_step(&state.omega, dt).map_err(|e| Error::Integration {
            time: state.time,
            steps: state.step_count,
            reason: e.to_string(),
        })?;
        Ok(VorticityState {
            time: new_time,
            omega,
            step_count: state.step_count + 1,
        })
    }
}

/// Turn a proposed step into one that lands on `target` when close enough.
/// Returns the step and whether it is the last one.
fn clamp_step(dt: f64, time: f64, target: f64) -> (f64, bool) {
    let remaining = target - time;
    if dt >= remaining * (1.0 - 1e-12) {
        (remaining, true)
    } else {
        (dt, false)
    }
}
