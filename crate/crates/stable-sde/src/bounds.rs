//! Closed-form constants and explicit bounds: the aggregate noise constant,
//! tail and moment bounds of the stochastic convolution, the Gronwall
//! envelope, contraction constants for both moment regimes, and the metrics
//! the fixed-point argument runs in.

use crate::coeffs::TimeFactor;
use crate::convolution::{self, SolutionPath};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Reading of the conjugate exponent `q` of `p` when `p <= 1`, where the
/// classical conjugate `p/(p-1)` is negative or undefined. The `unit`
/// reading evaluates every `(1/a)^(p/q)`-type factor with `q = 1` (exponent
/// `p`); `literal` keeps `q = p/(p-1)` and its negative exponent `p - 1`.
/// For `p > 1` both collapse to the classical conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConjugateConvention {
    #[default]
    Unit,
    Literal,
}

/// Every scalar feeding the closed-form bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// Semigroup decay rate a.
    pub decay: f64,
    /// Drift parameter b of the driving process.
    pub drift: f64,
    /// Sup norm of the noise amplitude phi.
    pub phi_sup: f64,
    /// Horizon T.
    pub horizon: f64,
    /// Window h for the continuity constants.
    pub window: f64,
    /// Tail exponent beta (= alpha for stable noise).
    pub beta: f64,
    /// Moment order p in (0, beta).
    pub p: f64,
    /// Tail constants of the measure.
    pub c1: f64,
    pub c2: f64,
    /// Certified p-power Lipschitz and growth constants of F.
    pub lipschitz_p: f64,
    pub growth_p: f64,
    /// Precomputed weighted-energy values of g.
    pub eta_val: f64,
    pub eta_window_val: f64,
    pub convention: ConjugateConvention,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0) {
            return Err(Error::InvalidParameter("decay rate must be positive".into()));
        }
        if !(self.beta > 0.0 && self.beta < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "tail exponent must lie in (0, 2), got {}",
                self.beta
            )));
        }
        if !(self.p > 0.0 && self.p < self.beta) {
            return Err(Error::InvalidParameter(format!(
                "moment order must lie in (0, beta) = (0, {}), got {}",
                self.beta, self.p
            )));
        }
        let non_negative = [
            ("phi_sup", self.phi_sup),
            ("horizon", self.horizon),
            ("window", self.window),
            ("c1", self.c1),
            ("c2", self.c2),
            ("lipschitz_p", self.lipschitz_p),
            ("growth_p", self.growth_p),
            ("eta_val", self.eta_val),
            ("eta_window_val", self.eta_window_val),
        ];
        for (name, v) in non_negative {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !self.drift.is_finite() {
            return Err(Error::InvalidParameter("drift must be finite".into()));
        }
        Ok(())
    }

    /// The exponent `p/q` under the selected convention.
    pub fn p_over_q(&self) -> f64 {
        if self.p > 1.0 {
            self.p - 1.0
        } else {
            match self.convention {
                ConjugateConvention::Unit => self.p,
                ConjugateConvention::Literal => self.p - 1.0,
            }
        }
    }
}

/// The aggregate constant
/// `K = phi_sup^2 (8 b^2/a + 8 c1 c2/a + 4 c2) + horizon * c1`,
/// with the horizon slot taking either T or the window h.
pub fn k_nu(inputs: &BoundInputs, horizon: f64) -> f64 {
    let phi2 = inputs.phi_sup * inputs.phi_sup;
    phi2 * (8.0 * inputs.drift * inputs.drift / inputs.decay
        + 8.0 * inputs.c1 * inputs.c2 / inputs.decay
        + 4.0 * inputs.c2)
        + horizon * inputs.c1
}

/// Tail bound of the stochastic convolution at level `x`:
/// `min(1, (eta/x)^beta * K(T))` for `x >= eta`; callers below the
/// threshold receive the trivial bound 1.
pub fn tail_bound(inputs: &BoundInputs, x: f64) -> f64 {
    if x < inputs.eta_val || inputs.eta_val == 0.0 {
        if inputs.eta_val == 0.0 {
            // zero energy: the convolution vanishes, any positive level wins
            return if x > 0.0 { 0.0 } else { 1.0 };
        }
        return 1.0;
    }
    let ratio = (inputs.eta_val / x).powf(inputs.beta);
    (ratio * k_nu(inputs, inputs.horizon)).min(1.0)
}

/// Uniform-in-time p-th moment bound of the solution:
/// `3^p (E|x0|^p + eta^p (1 + K(T) p/(beta-p))) * exp(3^p (1/a)^(p/q) C T)`.
/// Rejects `p >= beta`, where the bound is vacuous.
pub fn moment_bound(inputs: &BoundInputs, x0_moment_p: f64) -> Result<f64> {
    if inputs.p >= inputs.beta {
        return Err(Error::InvalidParameter(format!(
            "moment bound needs p < beta, got p = {}, beta = {}",
            inputs.p, inputs.beta
        )));
    }
    if !x0_moment_p.is_finite() || x0_moment_p < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "initial moment must be finite and non-negative, got {x0_moment_p}"
        )));
    }
    let three_p = 3f64.powf(inputs.p);
    let eta_p = inputs.eta_val.powf(inputs.p);
    let amplification = 1.0 + k_nu(inputs, inputs.horizon) * inputs.p / (inputs.beta - inputs.p);
    let exponent =
        three_p * (1.0 / inputs.decay).powf(inputs.p_over_q()) * inputs.growth_p * inputs.horizon;
    Ok(three_p * (x0_moment_p + eta_p * amplification) * exponent.exp())
}

/// The Gronwall envelope `K1 e^((a + K2) t)` for
/// `f(t) <= K1 e^(a t) + K2 int_0^t f`.
pub fn gronwall_bound(k1: f64, a_rate: f64, k2: f64, t: f64) -> f64 {
    k1 * ((a_rate + k2) * t).exp()
}

/// Contraction constant of the fixed-point map in the weighted norm
/// (p >= 1 regime):
/// `2^(p-1) (L_F (1/(a q gamma))^(p/q) + eta_gamma^p (1 + K(T) p/(beta-p)))`
/// where `eta_gamma` is the weighted energy of g at decay `a + gamma`.
pub fn contraction_constant(
    inputs: &BoundInputs,
    g: &dyn TimeFactor,
    gamma: f64,
) -> Result<f64> {
    if inputs.p < 1.0 {
        return Err(Error::InvalidParameter(
            "the weighted-norm contraction constant applies for p >= 1".into(),
        ));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "weight must be positive, got {gamma}"
        )));
    }
    let p = inputs.p;
    let eta_gamma = convolution::eta(inputs.decay + gamma, inputs.horizon, g)?;
    let drift_factor = if p == 1.0 {
        // q = infinity: the Hoelder factor degenerates to 1
        1.0
    } else {
        let q = p / (p - 1.0);
        (1.0 / (inputs.decay * q * gamma)).powf(p - 1.0)
    };
    let amplification = 1.0 + k_nu(inputs, inputs.horizon) * p / (inputs.beta - p);
    Ok(2f64.powf(p - 1.0)
        * (inputs.lipschitz_p * drift_factor + eta_gamma.powf(p) * amplification))
}

/// Smallest weight (up to search resolution) making the map a strict
/// contraction: doubling from 1 until the constant drops to 0.99, then
/// bisection. Fails when no weight below 2^64 works.
pub fn choose_gamma(inputs: &BoundInputs, g: &dyn TimeFactor) -> Result<f64> {
    const TARGET: f64 = 0.99;
    const LIMIT: f64 = 1.8446744073709552e19; // 2^64

    let mut hi = 1.0f64;
    if contraction_constant(inputs, g, hi)? <= TARGET {
        return Ok(hi);
    }
    loop {
        hi *= 2.0;
        if hi > LIMIT {
            return Err(Error::SearchFailure(format!(
                "no weight below 2^64 brings the contraction constant under {TARGET}"
            )));
        }
        if contraction_constant(inputs, g, hi)? <= TARGET {
            break;
        }
    }
    let mut lo = hi / 2.0;
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if contraction_constant(inputs, g, mid)? <= TARGET {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Left-hand side of the strong smallness condition of the p <= 1 regime:
/// `2^p L_F^p (1/a)^(p/q) + 2^p eta^p (1 + K(T) p/(beta-p))`,
/// returned with the verdict `lhs < 1`.
pub fn check_strong_condition(inputs: &BoundInputs) -> Result<(bool, f64)> {
    if !(inputs.p > 0.0 && inputs.p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "the strong condition applies for p in (0, 1], got {}",
            inputs.p
        )));
    }
    let two_p = 2f64.powf(inputs.p);
    let drift_term = two_p
        * inputs.lipschitz_p.powf(inputs.p)
        * (1.0 / inputs.decay).powf(inputs.p_over_q());
    let amplification = 1.0 + k_nu(inputs, inputs.horizon) * inputs.p / (inputs.beta - inputs.p);
    let noise_term = two_p * inputs.eta_val.powf(inputs.p) * amplification;
    let lhs = drift_term + noise_term;
    Ok((lhs < 1.0, lhs))
}

/// Integral metric `d_p(X, Y) = int_0^T |X(t) - Y(t)|^p dt` by trapezoidal
/// quadrature over the common grid. For single paths the expectation in the
/// defining metric is read as the pathwise value; [`metric_dp_ensemble`]
/// averages over paths.
pub fn metric_dp(x: &SolutionPath, y: &SolutionPath, p: f64) -> Result<f64> {
    if x.grid != y.grid {
        return Err(Error::GridMismatch(
            "metric requires both paths on the same grid".into(),
        ));
    }
    let dt = x.grid.dt();
    let n = x.grid.n_steps();
    let term = |k: usize| (x.values[k] - y.values[k]).abs().powf(p);
    let mut acc = 0.5 * (term(0) + term(n));
    for k in 1..n {
        acc += term(k);
    }
    Ok(acc * dt)
}

/// Ensemble version of [`metric_dp`]: the time integral of the empirical
/// mean p-th power difference, which equals the mean of the pathwise values.
pub fn metric_dp_ensemble(xs: &[SolutionPath], ys: &[SolutionPath], p: f64) -> Result<f64> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::EmptyEnsemble);
    }
    let mut acc = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        acc += metric_dp(x, y, p)?;
    }
    Ok(acc / xs.len() as f64)
}

/// Weighted ensemble norm
/// `sup_t e^(-gamma t) (mean |X(t)|^p)^(1/p)` over grid nodes.
pub fn norm_gamma(ensemble: &[SolutionPath], p: f64, gamma: f64) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(
            "the weighted norm applies for p >= 1".into(),
        ));
    }
    let grid = ensemble[0].grid;
    if ensemble.iter().any(|path| path.grid != grid) {
        return Err(Error::GridMismatch("ensemble paths on mixed grids".into()));
    }
    let n = grid.n_steps();
    let m = ensemble.len() as f64;
    let mut sup = 0.0f64;
    for k in 0..=n {
        let mean_p = ensemble.iter().map(|path| path.values[k].abs().powf(p)).sum::<f64>() / m;
        let weighted = (-gamma * grid.node(k)).exp() * mean_p.powf(1.0 / p);
        sup = sup.max(weighted);
    }
    Ok(sup)
}
