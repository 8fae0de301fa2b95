//! The driving alpha-stable Lévy measure and its closed-form functionals.
//!
//! The jump measure has density `c_plus / x^(alpha+1)` on `x > 0` and
//! `c_minus / |x|^(alpha+1)` on `x < 0`. Everything downstream (truncation
//! drifts, tail constants, jump rates) reduces to closed forms in
//! `(alpha, b, c_plus, c_minus)`; this module owns those formulas.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

/// Parameters of the driving stable process: stability index, drift and the
/// two tail weights of the Lévy density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableCharacteristics {
    alpha: f64,
    c_plus: f64,
    c_minus: f64,
    b: f64,
}

/// Tail-exponent and mass constants of the truncated measure: the tail mass
/// above level R is `c1 * R^(-beta)` and the second moment below R is
/// `c2 * R^(2-beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyTailBounds {
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
}

impl StableCharacteristics {
    /// Validating constructor.
    ///
    /// Rejects indices outside the open interval (0,2) outright: the mass
    /// constants diverge at both endpoints and clamping would silently
    /// corrupt every bound built on them. At `alpha = 1` only the symmetric
    /// zero-drift (Cauchy) case is admissible.
    pub fn new(alpha: f64, c_plus: f64, c_minus: f64, b: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 2.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in the open interval (0, 2), got {alpha}"
            )));
        }
        if !c_plus.is_finite() || !c_minus.is_finite() || c_plus < 0.0 || c_minus < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tail weights must be finite and non-negative, got c_plus={c_plus}, c_minus={c_minus}"
            )));
        }
        if c_plus + c_minus <= 0.0 {
            return Err(Error::InvalidParameter(
                "c_plus + c_minus must be positive".into(),
            ));
        }
        if !b.is_finite() {
            return Err(Error::InvalidParameter(format!("drift must be finite, got {b}")));
        }
        if alpha == 1.0 && (c_plus != c_minus || b != 0.0) {
            return Err(Error::InvalidParameter(
                "alpha = 1 requires c_plus = c_minus and b = 0 (symmetric Cauchy case)".into(),
            ));
        }
        Ok(Self { alpha, c_plus, c_minus, b })
    }

    /// Symmetric process with weight `c` on each side and zero drift.
    pub fn symmetric(alpha: f64, c: f64) -> Result<Self> {
        Self::new(alpha, c, c, 0.0)
    }

    /// For `alpha` in (1,2): the drift convention `b = -(c_plus - c_minus)/(alpha - 1)`
    /// that removes the location shift and makes the process strictly stable.
    pub fn strict_drift(alpha: f64, c_plus: f64, c_minus: f64) -> Result<Self> {
        if alpha <= 1.0 {
            return Err(Error::InvalidParameter(
                "the strict-drift convention applies only for alpha in (1, 2)".into(),
            ));
        }
        Self::new(alpha, c_plus, c_minus, -(c_plus - c_minus) / (alpha - 1.0))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }

    pub fn drift(&self) -> f64 {
        self.b
    }

    pub fn is_symmetric(&self) -> bool {
        self.c_plus == self.c_minus
    }

    /// Density of the Lévy measure at `x != 0`.
    pub fn levy_density(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Err(Error::InvalidParameter(
                "the Lévy measure has no atom at zero; density undefined at x = 0".into(),
            ));
        }
        let weight = if x > 0.0 { self.c_plus } else { self.c_minus };
        Ok(weight / x.abs().powf(self.alpha + 1.0))
    }

    /// Mass of jumps larger than `r` in modulus: `(c_plus + c_minus)/alpha * r^(-alpha)`.
    pub fn tail_mass(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation level must be positive, got {r}"
            )));
        }
        Ok((self.c_plus + self.c_minus) / self.alpha * r.powf(-self.alpha))
    }

    /// Second moment of jumps of modulus at most `r`:
    /// `(c_plus + c_minus) * r^(2-alpha) / (2 - alpha)`.
    pub fn small_second_moment(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cutoff must be positive, got {r}"
            )));
        }
        Ok((self.c_plus + self.c_minus) * r.powf(2.0 - self.alpha) / (2.0 - self.alpha))
    }

    /// Drift of the decomposition truncated at level `r >= 1`:
    /// `b + int_{1 < |x| <= r} x nu(dx)`.
    pub fn truncated_drift(&self, r: f64) -> Result<f64> {
        if !(r >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation level must be at least 1, got {r}"
            )));
        }
        if self.is_symmetric() || r == 1.0 {
            return Ok(self.b);
        }
        // alpha = 1 is symmetric by construction, so alpha != 1 here
        let diff = self.c_plus - self.c_minus;
        Ok(self.b + diff * (r.powf(1.0 - self.alpha) - 1.0) / (1.0 - self.alpha))
    }

    /// Mean of the restriction of the measure to `cutoff < |x| <= r`
    /// (the compensator rate of the medium-jump band).
    pub fn band_mean(&self, cutoff: f64, r: f64) -> Result<f64> {
        if !(cutoff > 0.0 && r > cutoff) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < cutoff < r, got cutoff={cutoff}, r={r}"
            )));
        }
        if self.is_symmetric() {
            return Ok(0.0);
        }
        let diff = self.c_plus - self.c_minus;
        Ok(diff * (r.powf(1.0 - self.alpha) - cutoff.powf(1.0 - self.alpha)) / (1.0 - self.alpha))
    }

    /// Whether the driving noise admits finite moments of order `p` while
    /// staying non-square-integrable. Closed form: true iff `p < alpha`
    /// (the second-moment integral diverges for every alpha < 2).
    pub fn admits_moment_order(&self, p: f64) -> Result<bool> {
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "moment order must be positive, got {p}"
            )));
        }
        Ok(p < self.alpha)
    }

    /// The exact tail constants of the stable measure: `beta = alpha`,
    /// `c1 = (c_plus + c_minus)/alpha`, `c2 = (c_plus + c_minus)/(2 - alpha)`.
    pub fn tail_bounds(&self) -> LevyTailBounds {
        let total = self.c_plus + self.c_minus;
        LevyTailBounds {
            beta: self.alpha,
            c1: total / self.alpha,
            c2: total / (2.0 - self.alpha),
        }
    }

    /// `sigma^alpha` of the marginal `Z(1)` in the standard stable
    /// parametrization, read off the real part of the characteristic
    /// exponent: `sigma^alpha = (c_plus + c_minus) * int_0^inf (1-cos v)/v^(1+alpha) dv`.
    pub fn scale_alpha(&self) -> f64 {
        (self.c_plus + self.c_minus) * one_minus_cos_integral(self.alpha)
    }

    /// Skewness `(c_plus - c_minus)/(c_plus + c_minus)` in [-1, 1].
    pub fn skewness(&self) -> f64 {
        (self.c_plus - self.c_minus) / (self.c_plus + self.c_minus)
    }

    /// Location parameter of `Z(1)` in the standard parametrization.
    /// Zero when the drift follows the strict convention (and always at
    /// alpha = 1, where only the symmetric case is admitted).
    pub fn location(&self) -> f64 {
        if self.alpha == 1.0 {
            0.0
        } else {
            self.b - (self.c_plus - self.c_minus) / (1.0 - self.alpha)
        }
    }
}

/// `int_0^inf (1 - cos v) / v^(1+alpha) dv` for `alpha` in (0,2):
/// `Gamma(2-alpha) cos(pi alpha/2) / (alpha (1-alpha))`, with value `pi/2`
/// at `alpha = 1`. Uses `cos(pi alpha/2) = -sin(pi (alpha-1)/2)` so the
/// cancellation near `alpha = 1` stays well conditioned.
pub fn one_minus_cos_integral(alpha: f64) -> f64 {
    if alpha == 1.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let shifted = alpha - 1.0;
    let cos_term = -(std::f64::consts::FRAC_PI_2 * shifted).sin();
    gamma(2.0 - alpha) * cos_term / (alpha * (1.0 - alpha))
}
