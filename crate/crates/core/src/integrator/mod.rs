//! Time integration of `i d/dt psi = H(t/T) psi`.
//!
//! Each step applies the Cayley (Crank-Nicolson) propagator
//! `(1 - i dt/2 H) / (1 + i dt/2 H)` with `H` sampled at the step midpoint.
//! Step size is controlled by step doubling: one step of `dt` against two of
//! `dt/2`, accepting when the 2-norm of the difference is at most
//! `dt_tolerance`.

mod solver;

use num_complex::Complex64;

use crate::fock::{FockError, QuantumState};
use crate::hamiltonian::{
    HamiltonianError, HermitianOperator, InitialHamiltonian, InterpolatedHamiltonian, ProblemHamiltonian,
    SchedulePoint,
};

pub use solver::{solve_linear, NoConvergence, SolveStats};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegratorError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("total time must be positive and finite, got {0}")]
    InvalidTime(f64),
    #[error(transparent)]
    Solver(#[from] NoConvergence),
    #[error("step size fell below dt_min = {dt_min:e} at t = {t} (last error estimate {error:.3e})")]
    StepUnderflow { t: f64, dt_min: f64, error: f64 },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt_initial: f64,
    /// Largest accepted step-doubling difference. Zero rejects every step.
    pub dt_tolerance: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Relative residual of each linear solve, measured against the norm of
    /// the state being propagated.
    pub solver_tolerance: f64,
    pub solver_max_iterations: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt_initial: 1e-3,
            dt_tolerance: 1e-3,
            dt_min: 1e-9,
            dt_max: 1.0,
            solver_tolerance: 1e-10,
            solver_max_iterations: 1000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegratorError> {
        let bad = |m: &str| Err(IntegratorError::InvalidConfig(m.to_string()));
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_initial && self.dt_initial <= self.dt_max) {
            return bad("need 0 < dt_min <= dt_initial <= dt_max");
        }
        if !self.dt_max.is_finite() {
            return bad("dt_max must be finite");
        }
        if !(self.dt_tolerance >= 0.0 && self.dt_tolerance.is_finite()) {
            return bad("dt_tolerance must be finite and nonnegative");
        }
        if !(self.solver_tolerance > 0.0 && self.solver_tolerance < 1.0) {
            return bad("solver_tolerance must lie in (0, 1)");
        }
        if self.solver_max_iterations == 0 {
            return bad("solver_max_iterations must be positive");
        }
        Ok(())
    }

    /// Same settings with the step tolerance divided by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        IntegratorConfig {
            dt_tolerance: self.dt_tolerance / factor,
            ..self.clone()
        }
    }
}

/// When to enlarge the truncated space between steps.
#[derive(Debug, Clone, PartialEq)]
pub enum GrowthPolicy {
    /// Never grow.
    Fixed,
    /// Grow mode `i` by `step` whenever the probability with
    /// `n_i > m_i - shell` exceeds `threshold`.
    Threshold { threshold: f64, shell: u32, step: u32 },
    /// Grow every mode by `step` after every accepted step.
    Always { step: u32 },
}

impl Default for GrowthPolicy {
    fn default() -> Self {
        GrowthPolicy::Threshold {
            threshold: 1e-8,
            shell: 2,
            step: 2,
        }
    }
}

impl GrowthPolicy {
    /// Per-mode growth for `psi`, or `None` if nothing should grow.
    pub fn delta(&self, psi: &QuantumState) -> Option<Vec<u32>> {
        match *self {
            GrowthPolicy::Fixed => None,
            GrowthPolicy::Always { step } => Some(vec![step; psi.space().num_modes()]),
            GrowthPolicy::Threshold { threshold, shell, step } => {
                let mass = psi.mode_boundary_mass(shell);
                let delta: Vec<u32> = mass.iter().map(|&m| if m > threshold { step } else { 0 }).collect();
                delta.iter().any(|&d| d > 0).then_some(delta)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub t_before: f64,
    pub dt_used: f64,
    /// Linear-solver iterations summed over the accepted attempt.
    pub solver_iterations: usize,
    pub estimated_local_error: f64,
    /// `||psi_after|| - ||psi_before||`.
    pub norm_drift: f64,
    /// Norm that `(1 - s) H_I` would push past the cutoffs at the start of
    /// the step.
    pub leakage: f64,
    pub rejections: usize,
    /// Step size proposed for the next step.
    pub dt_suggested: f64,
    /// Cutoffs after any growth that followed this step.
    pub cutoffs: Vec<u32>,
}

impl StepReport {
    /// `t dt norm leakage solver_iters`, the step-log line format.
    pub fn log_line(&self, norm: f64) -> String {
        format!(
            "{} {} {} {} {}",
            self.t_before + self.dt_used,
            self.dt_used,
            norm,
            self.leakage,
            self.solver_iterations
        )
    }
}

/// One Cayley step for any Hermitian operator: solves
/// `(1 + i dt/2 H) x = (1 - i dt/2 H) psi`.
///
/// The solve tolerance is scaled so the error in `x` is below
/// `tol * ||psi||` whatever the size of `H dt`.
pub fn cayley_step<H: HermitianOperator + ?Sized>(
    h: &H,
    psi: &[Complex64],
    dt: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<Complex64>, SolveStats), NoConvergence> {
    let mut rhs = vec![Complex64::new(0.0, 0.0); psi.len()];
    h.apply_into(psi, &mut rhs);
    let mik = Complex64::new(0.0, -0.5 * dt);
    for (r, p) in rhs.iter_mut().zip(psi) {
        *r = p + mik * *r;
    }
    let psi_norm = solver::norm(psi);
    let rhs_norm = solver::norm(&rhs);
    let scaled = if rhs_norm > 0.0 { tol * psi_norm / rhs_norm } else { tol };
    solve_linear(h, &rhs, dt, scaled, max_iterations)
}

/// Crank-Nicolson step of `H(s_mid)` over `dt`.
pub fn cn_step(
    hp: &ProblemHamiltonian,
    hi: &InitialHamiltonian,
    psi: &QuantumState,
    s_mid: SchedulePoint,
    dt: f64,
    config: &IntegratorConfig,
) -> Result<(QuantumState, SolveStats), IntegratorError> {
    let h = InterpolatedHamiltonian::new(s_mid, hp, hi)?;
    if psi.space() != hp.space() {
        return Err(HamiltonianError::SpaceMismatch.into());
    }
    let (x, stats) = cayley_step(
        &h,
        psi.amplitudes(),
        dt,
        config.solver_tolerance,
        config.solver_max_iterations,
    )?;
    Ok((QuantumState::from_parts_unchecked(psi.space().clone(), x), stats))
}

/// Outcome of one adaptive step.
#[derive(Debug, Clone)]
pub struct AdaptiveStep {
    pub dt_accepted: f64,
    pub state: Vec<Complex64>,
    pub report: StepReport,
}

/// `H - shift`, which evolves identically up to a global phase.
struct Shifted<H> {
    op: H,
    shift: f64,
}

impl<H: HermitianOperator> HermitianOperator for Shifted<H> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.op.apply_into(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o -= xi * self.shift;
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.op.diagonal().into_iter().map(|d| d - self.shift).collect()
    }
}

/// `<psi|H|psi> / <psi|psi>`.
fn energy<H: HermitianOperator>(h: &H, psi: &[Complex64]) -> f64 {
    let mut hpsi = vec![Complex64::new(0.0, 0.0); psi.len()];
    h.apply_into(psi, &mut hpsi);
    let num: f64 = psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum();
    let den: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Step-doubling control over a time-dependent operator.
///
/// `op_at(t_mid)` returns the operator to use for a sub-step centred on
/// `t_mid`. Tries `dt_candidate`, halving on rejection; fails with
/// [`IntegratorError::StepUnderflow`] once the step would drop below
/// `dt_min`. Solver non-convergence counts as a rejection.
///
/// All three sub-steps use `H - E` with `E` the energy of `psi` at the
/// step midpoint. The result differs from unshifted Crank-Nicolson only by
/// a global phase, but the error estimate no longer sees the phase error
/// of the mean energy, which would otherwise dominate for large `D^2`.
pub fn adaptive_dt_with<F, H>(
    op_at: F,
    psi: &[Complex64],
    t: f64,
    dt_candidate: f64,
    config: &IntegratorConfig,
) -> Result<AdaptiveStep, IntegratorError>
where
    F: Fn(f64) -> H,
    H: HermitianOperator,
{
    let tol = config.solver_tolerance;
    let iters = config.solver_max_iterations;
    let psi_norm = solver::norm(psi);
    let mut dt = dt_candidate;
    let mut rejections = 0;
    let mut last_error = f64::NAN;
    loop {
        let mid = op_at(t + 0.5 * dt);
        let shift = energy(&mid, psi);
        let shifted = |t_mid: f64| Shifted { op: op_at(t_mid), shift };
        let attempt = (|| -> Result<_, NoConvergence> {
            let (full, a) = cayley_step(&Shifted { op: mid, shift }, psi, dt, tol, iters)?;
            let (half, b) = cayley_step(&shifted(t + 0.25 * dt), psi, 0.5 * dt, tol, iters)?;
            let (halves, c) = cayley_step(&shifted(t + 0.75 * dt), &half, 0.5 * dt, tol, iters)?;
            let diff: f64 = full
                .iter()
                .zip(&halves)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            Ok((halves, diff, a.iterations + b.iterations + c.iterations))
        })();

        match attempt {
            Ok((state, error, solver_iterations)) if error <= config.dt_tolerance => {
                // Local error ~ dt^3. No growth right after a rejection.
                let max_factor = if rejections > 0 { 1.0 } else { 2.0 };
                let factor = if error > 0.0 {
                    (0.9 * (config.dt_tolerance / error).cbrt()).clamp(0.5, max_factor)
                } else {
                    max_factor
                };
                let dt_suggested = (dt * factor).clamp(config.dt_min, config.dt_max);
                let norm_after = solver::norm(&state);
                return Ok(AdaptiveStep {
                    dt_accepted: dt,
                    state,
                    report: StepReport {
                        t_before: t,
                        dt_used: dt,
                        solver_iterations,
                        estimated_local_error: error,
                        norm_drift: norm_after - psi_norm,
                        leakage: 0.0,
                        rejections,
                        dt_suggested,
                        cutoffs: Vec::new(),
                    },
                });
            }
            Ok((_, error, _)) => last_error = error,
            Err(e) => {
                log::debug!("solver failed at t = {t}, dt = {dt:e}: {e}");
            }
        }
        rejections += 1;
        dt *= 0.5;
        if dt < config.dt_min {
            return Err(IntegratorError::StepUnderflow {
                t,
                dt_min: config.dt_min,
                error: last_error,
            });
        }
    }
}

/// [`adaptive_dt_with`] for `H(t / T)` built from `hp` and `hi`.
#[allow(clippy::too_many_arguments)]
pub fn adaptive_dt(
    hp: &ProblemHamiltonian,
    hi: &InitialHamiltonian,
    psi: &QuantumState,
    t: f64,
    total_time: f64,
    dt_candidate: f64,
    config: &IntegratorConfig,
) -> Result<(f64, QuantumState, StepReport), IntegratorError> {
    if psi.space() != hp.space() {
        return Err(HamiltonianError::SpaceMismatch.into());
    }
    InterpolatedHamiltonian::new(SchedulePoint::clamped(0.0), hp, hi)?;
    let step = adaptive_dt_with(
        |tm| {
            InterpolatedHamiltonian::new(SchedulePoint::clamped(tm / total_time), hp, hi)
                .expect("checked above")
        },
        psi.amplitudes(),
        t,
        dt_candidate,
        config,
    )?;
    let mut report = step.report;
    let s0 = SchedulePoint::clamped(t / total_time).value();
    report.leakage = (1.0 - s0) * hi.leakage(psi);
    report.cutoffs = psi.space().cutoffs().to_vec();
    Ok((
        step.dt_accepted,
        QuantumState::from_parts_unchecked(psi.space().clone(), step.state),
        report,
    ))
}

/// Observation points during [`evolve`].
pub trait EvolutionHooks {
    /// Called after each accepted step (and any growth it triggered).
    fn on_step(&mut self, _report: &StepReport, _psi: &QuantumState) {}
}

impl EvolutionHooks for () {}

impl<F: FnMut(&StepReport, &QuantumState)> EvolutionHooks for F {
    fn on_step(&mut self, report: &StepReport, psi: &QuantumState) {
        self(report, psi)
    }
}

#[derive(Debug, Clone)]
pub struct Evolved {
    pub state: QuantumState,
    /// Problem Hamiltonian on the final (possibly grown) space.
    pub hp: ProblemHamiltonian,
    pub reports: Vec<StepReport>,
    /// Time reached; equals `T` unless the run was aborted.
    pub t_final: f64,
    /// Set when growth hit the dimension cap; the state is the last one
    /// that fit.
    pub aborted: Option<FockError>,
}

impl Evolved {
    pub fn total_steps(&self) -> usize {
        self.reports.len()
    }

    pub fn max_step_drift(&self) -> f64 {
        self.reports.iter().map(|r| r.norm_drift.abs()).fold(0.0, f64::max)
    }
}

/// Integrates from `t = 0` to `total_time`, applying `growth` between
/// steps.
#[allow(clippy::too_many_arguments)]
pub fn evolve(
    hp: &ProblemHamiltonian,
    hi: &InitialHamiltonian,
    psi0: QuantumState,
    total_time: f64,
    config: &IntegratorConfig,
    growth: &GrowthPolicy,
    max_dim: usize,
    hooks: &mut dyn EvolutionHooks,
) -> Result<Evolved, IntegratorError> {
    config.validate()?;
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(IntegratorError::InvalidTime(total_time));
    }
    if psi0.space() != hp.space() {
        return Err(HamiltonianError::SpaceMismatch.into());
    }

    let mut hp = hp.clone();
    let mut psi = psi0;
    let mut reports = Vec::new();
    let mut t = 0.0;
    let mut dt = config.dt_initial.min(config.dt_max);

    while t < total_time {
        let remaining = total_time - t;
        // Absorb slivers so the last step is not vanishingly small.
        let last = dt >= remaining * (1.0 - 1e-9);
        let try_dt = if last { remaining } else { dt };
        let (accepted, next, mut report) = adaptive_dt(&hp, hi, &psi, t, total_time, try_dt, config)?;
        psi = next;
        if last && accepted == try_dt {
            t = total_time;
        } else {
            t += accepted;
            dt = report.dt_suggested;
        }

        if let Some(delta) = growth.delta(&psi) {
            match psi.grow(&delta, max_dim) {
                Ok(grown) => {
                    log::trace!("t = {t}: grow {:?} -> {:?}", psi.space().cutoffs(), grown.space().cutoffs());
                    hp = hp.rebuild(grown.space().clone())?;
                    psi = grown;
                }
                Err(e @ FockError::DimensionCap { .. }) => {
                    report.cutoffs = psi.space().cutoffs().to_vec();
                    hooks.on_step(&report, &psi);
                    reports.push(report);
                    log::warn!("aborting at t = {t}: {e}");
                    return Ok(Evolved {
                        state: psi,
                        hp,
                        reports,
                        t_final: t,
                        aborted: Some(e),
                    });
                }
                Err(e) => return Err(e.into()),
            }
        }
        report.cutoffs = psi.space().cutoffs().to_vec();
        hooks.on_step(&report, &psi);
        reports.push(report);
    }

    Ok(Evolved {
        state: psi,
        hp,
        reports,
        t_final: t,
        aborted: None,
    })
}

/// Fixed-space propagation through an explicit schedule of
/// `(s, dt)` segments; `dt < 0` runs a segment backwards.
pub fn propagate_schedule(
    hp: &ProblemHamiltonian,
    hi: &InitialHamiltonian,
    psi: &QuantumState,
    schedule: &[(f64, f64)],
    config: &IntegratorConfig,
) -> Result<QuantumState, IntegratorError> {
    let mut psi = psi.clone();
    for &(s, dt) in schedule {
        let (next, _) = cn_step(hp, hi, &psi, SchedulePoint::new(s)?, dt, config)?;
        psi = next;
    }
    Ok(psi)
}

/// Midpoint schedule of `steps` equal steps over `[0, T]`.
pub fn uniform_schedule(total_time: f64, steps: usize) -> Vec<(f64, f64)> {
    let dt = total_time / steps as f64;
    (0..steps).map(|k| ((k as f64 + 0.5) / steps as f64, dt)).collect()
}

/// The schedule that undoes `schedule`: reversed order, negated steps.
pub fn reversed_schedule(schedule: &[(f64, f64)]) -> Vec<(f64, f64)> {
    schedule.iter().rev().map(|&(s, dt)| (s, -dt)).collect()
}

#[cfg(test)]
mod tests;
