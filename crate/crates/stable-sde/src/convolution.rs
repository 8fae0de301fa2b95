//! The mild-solution layer: scalar exponentially stable semigroup, the
//! weighted-energy functionals of the time factor, an exponential Euler
//! discretization of the stochastic convolution equation, and the discrete
//! fixed-point map it derives from.
//!
//! The scheme is
//!
//! ```text
//! X_{k+1} = e^(-a dt) X_k + (1 - e^(-a dt))/a * F(t_k, X_k)
//!           + e^(-a dt) * g(t_k) * phi(X_k) * dZ_k
//! ```
//!
//! with left-endpoint (predictable) coefficient evaluation; the semigroup
//! factor is exact, so the scalar commutation identities hold exactly at
//! the discrete level.

use crate::coeffs::{CoefficientSpec, TimeFactor};
use crate::error::{Error, Result};
use crate::noise::{NoisePath, PathGrid};
use crate::quad;

/// Exponentially stable scalar semigroup `S(t) = e^(-a t)` (growth constant
/// fixed to one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupParams {
    decay: f64,
}

impl SemigroupParams {
    pub fn new(decay: f64) -> Result<Self> {
        if !(decay > 0.0) || !decay.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "semigroup decay rate must be positive and finite, got {decay}"
            )));
        }
        Ok(Self { decay })
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    /// `S(t) = e^(-a t)`.
    pub fn apply(&self, t: f64) -> f64 {
        (-self.decay * t).exp()
    }
}

/// A discrete solution trajectory on a grid; `values[0]` is the initial value.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub grid: PathGrid,
    pub values: Vec<f64>,
}

impl SolutionPath {
    /// Constant path, the starting iterate of the fixed-point iteration.
    pub fn constant(grid: PathGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.n_steps() + 1],
        }
    }

    pub fn end_value(&self) -> f64 {
        *self.values.last().expect("non-empty path")
    }
}

// cutoff beyond which exp(-u) is numerically negligible
const EXP_CUTOFF: f64 = 45.0;

/// `int_0^t e^(-decay (t-s)) g^2(s) ds`, evaluated through the substitution
/// `u = decay (t-s)` so that arbitrarily stiff decay stays well conditioned.
fn weighted_energy(decay: f64, t: f64, g: &dyn TimeFactor) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let u_max = (decay * t).min(EXP_CUTOFF);
    if u_max <= 0.0 {
        return 0.0;
    }
    let probe = g.eval(t).abs().max(g.eval(0.5 * t).abs());
    let tol = 1e-13 * (1.0 + probe * probe * u_max / decay);
    quad::integrate(
        |u| {
            let gs = g.eval(t - u / decay);
            (-u).exp() * gs * gs
        },
        0.0,
        u_max,
        tol,
    ) / decay
}

/// Golden-section refinement of a maximum inside `[lo, hi]`.
fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..90 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        if (hi - lo).abs() < 1e-13 * (1.0 + hi.abs()) {
            break;
        }
    }
    f1.max(f2)
}

fn sup_over_horizon<F: Fn(f64) -> f64>(value_at: F, t_end: f64) -> Result<f64> {
    const N_PROBE: usize = 512;
    let mut best = 0.0f64;
    let mut best_idx = 0usize;
    for i in 0..=N_PROBE {
        let t = i as f64 * t_end / N_PROBE as f64;
        let v = value_at(t);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!(
                "weighted energy is not finite at t = {t}; check the time factor"
            )));
        }
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    let lo = (best_idx.saturating_sub(1)) as f64 * t_end / N_PROBE as f64;
    let hi = (best_idx + 1).min(N_PROBE) as f64 * t_end / N_PROBE as f64;
    let refined = golden_max(&value_at, lo, hi);
    Ok(best.max(refined))
}

/// `eta(a, T, g) = (sup_{0<=t<=T} int_0^t e^(-a(t-s)) g^2(s) ds)^(1/2)`:
/// the scale and threshold of the tail bound. The supremum is taken over a
/// refined probe grid plus a golden-section pass around the best node, so
/// the result dominates every probed point value.
pub fn eta(decay: f64, t_end: f64, g: &dyn TimeFactor) -> Result<f64> {
    if !(decay > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidParameter(
            "eta needs a positive decay rate and horizon".into(),
        ));
    }
    let sup = sup_over_horizon(|t| weighted_energy(decay, t, g), t_end)?;
    Ok(sup.sqrt())
}

/// Windowed variant over `[t, t+h]`, with the kernel `e^(-a(t+h-s))` that
/// the continuity estimate uses:
/// `(sup_{0<=t<=T} int_t^{t+h} e^(-a(t+h-s)) g^2(s) ds)^(1/2)`.
/// The time factor is evaluated (and, for tables, clamped) beyond `T`.
pub fn eta_window(decay: f64, t_end: f64, g: &dyn TimeFactor, window: f64) -> Result<f64> {
    if !(decay > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidParameter(
            "eta_window needs a positive decay rate and horizon".into(),
        ));
    }
    if !(window > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "window must be positive, got {window}"
        )));
    }
    let u_max = (decay * window).min(EXP_CUTOFF);
    let value_at = |t: f64| {
        let probe = g.eval(t + window).abs();
        let tol = 1e-13 * (1.0 + probe * probe * u_max / decay);
        quad::integrate(
            |u| {
                let gs = g.eval(t + window - u / decay);
                (-u).exp() * gs * gs
            },
            0.0,
            u_max,
            tol,
        ) / decay
    };
    let sup = sup_over_horizon(value_at, t_end)?;
    Ok(sup.sqrt())
}

/// Where a big jump recorded inside a step contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JumpPlacement {
    /// Aggregate into the step increment (the recorded jump is already part
    /// of `dZ_k`); placement error is one step.
    #[default]
    EndOfStep,
    /// Weight each recorded jump with the semigroup factor from its actual
    /// arrival time; quantifies the placement error of the default mode.
    SplitAtJump,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub jump_placement: JumpPlacement,
    /// States beyond this magnitude abort the path as overflowed.
    pub overflow_limit: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            jump_placement: JumpPlacement::EndOfStep,
            overflow_limit: 1e300,
        }
    }
}

/// Core recursion shared by the direct solver and the fixed-point map:
/// `coeff_state(k, y_k)` supplies the state fed to the coefficients at step
/// k (the running value for the solver, the frozen input path for the map).
fn run_scheme(
    x0: f64,
    coeffs: &CoefficientSpec,
    sg: &SemigroupParams,
    noise: &NoisePath,
    opts: &SolverOptions,
    coeff_state: &dyn Fn(usize, f64) -> f64,
) -> Result<Vec<f64>> {
    let grid = noise.grid;
    let n = grid.n_steps();
    let dt = grid.dt();
    let a = sg.decay();
    let step_decay = (-a * dt).exp();
    let forcing_weight = (1.0 - step_decay) / a;

    let mut values = Vec::with_capacity(n + 1);
    values.push(x0);
    let mut y = x0;
    let mut jump_cursor = 0usize;

    for k in 0..n {
        let t_k = grid.node(k);
        let state = coeff_state(k, y);
        let amp = coeffs.time_factor.eval(t_k) * coeffs.amplitude.eval(state);

        let noise_term = match opts.jump_placement {
            JumpPlacement::EndOfStep => step_decay * amp * noise.increments[k],
            JumpPlacement::SplitAtJump => {
                let t_next = grid.node(k + 1);
                let mut big_sum = 0.0;
                let mut split = 0.0;
                while jump_cursor < noise.big_jumps.len()
                    && noise.big_jumps[jump_cursor].time <= t_next
                {
                    let bj = noise.big_jumps[jump_cursor];
                    big_sum += bj.size;
                    split += (-a * (t_next - bj.time)).exp() * bj.size;
                    jump_cursor += 1;
                }
                step_decay * amp * (noise.increments[k] - big_sum) + amp * split
            }
        };

        y = step_decay * y + forcing_weight * coeffs.drift.eval(t_k, state) + noise_term;
        if !y.is_finite() || y.abs() > opts.overflow_limit {
            return Err(Error::StateOverflow {
                step: k + 1,
                limit: opts.overflow_limit,
            });
        }
        values.push(y);
    }
    Ok(values)
}

/// Exponential Euler solution of the convolution equation along one noise
/// path. Signals overflow with the offending step index.
pub fn euler_solve(
    x0: f64,
    coeffs: &CoefficientSpec,
    sg: &SemigroupParams,
    noise: &NoisePath,
    opts: &SolverOptions,
) -> Result<SolutionPath> {
    let values = run_scheme(x0, coeffs, sg, noise, opts, &|_, y| y)?;
    Ok(SolutionPath { grid: noise.grid, values })
}

/// One application of the discrete fixed-point map: the same quadrature as
/// [`euler_solve`] with the coefficients frozen on the input path, so a
/// fixed point satisfies the solver recursion exactly.
pub fn gamma_apply(
    input: &SolutionPath,
    x0: f64,
    coeffs: &CoefficientSpec,
    sg: &SemigroupParams,
    noise: &NoisePath,
    opts: &SolverOptions,
) -> Result<SolutionPath> {
    if input.grid != noise.grid {
        return Err(Error::GridMismatch(
            "input path and noise path live on different grids".into(),
        ));
    }
    let values = run_scheme(x0, coeffs, sg, noise, opts, &|k, _| input.values[k])?;
    Ok(SolutionPath { grid: noise.grid, values })
}

/// Picard iteration of the fixed-point map from the constant initial path,
/// stopping when the successive distance drops below `tol`.
/// Returns the fixed point and the distance history for rate analysis;
/// non-convergence is an error that keeps the history.
#[allow(clippy::too_many_arguments)]
pub fn picard_solve(
    x0: f64,
    coeffs: &CoefficientSpec,
    sg: &SemigroupParams,
    noise: &NoisePath,
    p: f64,
    tol: f64,
    max_iter: usize,
    opts: &SolverOptions,
) -> Result<(SolutionPath, Vec<f64>)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter("need at least one iteration".into()));
    }
    let mut current = SolutionPath::constant(noise.grid, x0);
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let next = gamma_apply(&current, x0, coeffs, sg, noise, opts)?;
        let d = crate::bounds::metric_dp(&next, &current, p)?;
        history.push(d);
        current = next;
        if d < tol {
            return Ok((current, history));
        }
    }
    Err(Error::NonConvergence { max_iter, history })
}

/// The noise part of the mild solution at the horizon: the discrete
/// stochastic convolution `sum_j e^(-a(T - t_j)) g(t_j) phi(X_j) dZ_j`
/// (with exact jump-time weights in split mode). This is the quantity the
/// tail bound controls.
pub fn stochastic_convolution_at_end(
    coeffs: &CoefficientSpec,
    sg: &SemigroupParams,
    noise: &NoisePath,
    path: &SolutionPath,
    opts: &SolverOptions,
) -> Result<f64> {
    if path.grid != noise.grid {
        return Err(Error::GridMismatch(
            "solution path and noise path live on different grids".into(),
        ));
    }
    let grid = noise.grid;
    let n = grid.n_steps();
    let t_end = grid.t_end();
    let a = sg.decay();
    let mut acc = 0.0;
    let mut jump_cursor = 0usize;
    for k in 0..n {
        let t_k = grid.node(k);
        let amp = coeffs.time_factor.eval(t_k) * coeffs.amplitude.eval(path.values[k]);
        match opts.jump_placement {
            JumpPlacement::EndOfStep => {
                acc += (-a * (t_end - t_k)).exp() * amp * noise.increments[k];
            }
            JumpPlacement::SplitAtJump => {
                let t_next = grid.node(k + 1);
                let mut big_sum = 0.0;
                while jump_cursor < noise.big_jumps.len()
                    && noise.big_jumps[jump_cursor].time <= t_next
                {
                    let bj = noise.big_jumps[jump_cursor];
                    big_sum += bj.size;
                    acc += (-a * (t_end - bj.time)).exp() * amp * bj.size;
                    jump_cursor += 1;
                }
                acc += (-a * (t_end - t_k)).exp() * amp * (noise.increments[k] - big_sum);
            }
        }
    }
    Ok(acc)
}
