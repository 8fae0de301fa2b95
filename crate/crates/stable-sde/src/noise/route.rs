//! Path-generation strategies behind a common trait, selected by name at
//! runtime from the scenario config.

use super::{BigJump, NoisePath, PathGrid, RouteTag, SeedSpec};
use crate::error::{Error, Result};
use crate::levy::StableCharacteristics;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

/// How the compensated jumps below the small cutoff enter the increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmallJumpPolicy {
    /// Gaussian surrogate with the matched variance of the discarded band.
    Gaussian,
    /// Drop the band together with its compensator (mean-zero omission).
    Drop,
}

/// A strategy that realizes one noise path from `(characteristics, grid, seed)`.
pub trait NoiseRoute: Send + Sync {
    fn name(&self) -> &'static str;
    fn sample_path(
        &self,
        chars: &StableCharacteristics,
        grid: &PathGrid,
        seed: SeedSpec,
    ) -> Result<NoisePath>;
}

/// Exact-in-law route: independent stationary stable increments.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactRoute;

impl NoiseRoute for ExactRoute {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn sample_path(
        &self,
        chars: &StableCharacteristics,
        grid: &PathGrid,
        seed: SeedSpec,
    ) -> Result<NoisePath> {
        let mut rng = seed.rng();
        let sampler = super::StableSampler::for_increments(chars, grid.dt())?;
        let increments = (0..grid.n_steps())
            .map(|_| sampler.sample(&mut rng))
            .collect::<Vec<f64>>();
        Ok(NoisePath {
            grid: *grid,
            increments,
            big_jumps: Vec::new(),
            route: RouteTag::Exact,
            truncation_level: None,
        })
    }
}

/// Truncated decomposition: drift `b_R`, compensated compound-Poisson jumps
/// in the band `(cutoff, R]`, compound-Poisson big jumps above `R` recorded
/// explicitly, and the sub-cutoff remainder handled by the policy.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedRoute {
    truncation_level: f64,
    small_jump_cutoff: f64,
    policy: SmallJumpPolicy,
    /// Upper bound on the expected number of band jumps per path.
    jump_budget: f64,
}

impl TruncatedRoute {
    pub const DEFAULT_JUMP_BUDGET: f64 = 1e7;

    pub fn new(truncation_level: f64, small_jump_cutoff: f64, policy: SmallJumpPolicy) -> Result<Self> {
        Self::with_budget(truncation_level, small_jump_cutoff, policy, Self::DEFAULT_JUMP_BUDGET)
    }

    pub fn with_budget(
        truncation_level: f64,
        small_jump_cutoff: f64,
        policy: SmallJumpPolicy,
        jump_budget: f64,
    ) -> Result<Self> {
        if !(truncation_level >= 1.0) || !truncation_level.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "truncation level must be >= 1, got {truncation_level}"
            )));
        }
        if !(small_jump_cutoff > 0.0 && small_jump_cutoff < truncation_level) {
            return Err(Error::InvalidParameter(format!(
                "small-jump cutoff must lie in (0, {truncation_level}), got {small_jump_cutoff}"
            )));
        }
        if !(jump_budget > 0.0) {
            return Err(Error::InvalidParameter("jump budget must be positive".into()));
        }
        Ok(Self {
            truncation_level,
            small_jump_cutoff,
            policy,
            jump_budget,
        })
    }

    pub fn truncation_level(&self) -> f64 {
        self.truncation_level
    }

    pub fn small_jump_cutoff(&self) -> f64 {
        self.small_jump_cutoff
    }

    pub fn policy(&self) -> SmallJumpPolicy {
        self.policy
    }
}

/// Modulus draw from the normalized restriction of the measure to
/// `(lo, hi]`, by inverse CDF: the tail function is proportional to
/// `x^(-alpha)` on the band.
fn band_jump_modulus<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64, alpha: f64) -> f64 {
    let u: f64 = rng.random();
    let lo_pow = lo.powf(-alpha);
    let hi_pow = hi.powf(-alpha);
    (lo_pow - u * (lo_pow - hi_pow)).powf(-1.0 / alpha)
}

/// Modulus draw above `r`: Pareto-type inverse CDF `r * u^(-1/alpha)`.
fn tail_jump_modulus<R: Rng + ?Sized>(rng: &mut R, r: f64, alpha: f64) -> f64 {
    r * super::uniform_open(rng).powf(-1.0 / alpha)
}

fn signed<R: Rng + ?Sized>(rng: &mut R, modulus: f64, positive_weight: f64) -> f64 {
    let u: f64 = rng.random();
    if u < positive_weight {
        modulus
    } else {
        -modulus
    }
}

impl NoiseRoute for TruncatedRoute {
    fn name(&self) -> &'static str {
        "truncated"
    }

    fn sample_path(
        &self,
        chars: &StableCharacteristics,
        grid: &PathGrid,
        seed: SeedSpec,
    ) -> Result<NoisePath> {
        let r = self.truncation_level;
        let eps = self.small_jump_cutoff;
        let alpha = chars.alpha();
        let n = grid.n_steps();
        let dt = grid.dt();

        let big_rate = chars.tail_mass(r)?;
        let band_rate = chars.tail_mass(eps)? - big_rate;
        let expected = band_rate * grid.t_end();
        if expected > self.jump_budget {
            return Err(Error::JumpBudgetExceeded {
                expected,
                budget: self.jump_budget,
            });
        }

        let drift = chars.truncated_drift(r)?;
        let band_compensator = chars.band_mean(eps, r)?;
        let small_variance = chars.small_second_moment(eps)?;
        let positive_weight = chars.c_plus() / (chars.c_plus() + chars.c_minus());

        let mut rng = seed.rng();
        let mut increments = vec![0.0; n];

        let band_poisson = Poisson::new(band_rate * dt).map_err(|e| {
            Error::InvalidParameter(format!("band jump rate {band_rate} rejected: {e}"))
        })?;
        let surrogate = match self.policy {
            SmallJumpPolicy::Gaussian => Some(
                Normal::new(0.0, (small_variance * dt).sqrt())
                    .map_err(|e| Error::InvalidParameter(format!("surrogate width: {e}")))?,
            ),
            SmallJumpPolicy::Drop => None,
        };

        for inc in increments.iter_mut() {
            let mut z = (drift - band_compensator) * dt;
            let count = band_poisson.sample(&mut rng) as u64;
            for _ in 0..count {
                let modulus = band_jump_modulus(&mut rng, eps, r, alpha);
                z += signed(&mut rng, modulus, positive_weight);
            }
            if let Some(normal) = &surrogate {
                z += normal.sample(&mut rng);
            }
            *inc = z;
        }

        // big jumps arrive as a Poisson stream with exponential gaps
        let mut big_jumps = Vec::new();
        if big_rate > 0.0 {
            let mut t = -super::uniform_open(&mut rng).ln() / big_rate;
            while t <= grid.t_end() {
                let modulus = tail_jump_modulus(&mut rng, r, alpha);
                let size = signed(&mut rng, modulus, positive_weight);
                // a jump at tau in (t_k, t_{k+1}] lands in increment k
                let bin = ((t / dt).ceil() as usize).max(1).min(n) - 1;
                increments[bin] += size;
                big_jumps.push(BigJump { time: t, size });
                t += -super::uniform_open(&mut rng).ln() / big_rate;
            }
        }

        Ok(NoisePath {
            grid: *grid,
            increments,
            big_jumps,
            route: RouteTag::Truncated,
            truncation_level: Some(r),
        })
    }
}

/// Route names understood by [`build_route`].
pub fn route_names() -> &'static [&'static str] {
    &["exact", "truncated"]
}

/// Build a route strategy by name. `truncated` requires the truncation
/// level and the small-jump cutoff.
pub fn build_route(
    name: &str,
    truncation_level: Option<f64>,
    small_jump_cutoff: Option<f64>,
    policy: SmallJumpPolicy,
    jump_budget: Option<f64>,
) -> Result<Box<dyn NoiseRoute>> {
    match name {
        "exact" => Ok(Box::new(ExactRoute)),
        "truncated" => {
            let r = truncation_level.ok_or_else(|| Error::Config {
                field: "simulation.truncation_level".into(),
                message: "required for the truncated route".into(),
            })?;
            let eps = small_jump_cutoff.ok_or_else(|| Error::Config {
                field: "simulation.small_jump_cutoff".into(),
                message: "required for the truncated route".into(),
            })?;
            let route = TruncatedRoute::with_budget(
                r,
                eps,
                policy,
                jump_budget.unwrap_or(TruncatedRoute::DEFAULT_JUMP_BUDGET),
            )?;
            Ok(Box::new(route))
        }
        other => Err(Error::Config {
            field: "simulation.route".into(),
            message: format!("unknown route `{other}`; known: {:?}", route_names()),
        }),
    }
}
