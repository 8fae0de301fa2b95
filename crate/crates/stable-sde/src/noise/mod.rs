//! Sample paths of the driving stable process on a uniform time grid.
//!
//! Two interchangeable routes generate paths (see [`route`]): exact-in-law
//! stable increments via the Chambers-Mallows-Stuck transform, and the
//! truncated decomposition (drift + compensated medium jumps + compound
//! Poisson big jumps, with a configurable policy for the sub-cutoff part).

pub mod route;

use crate::error::{Error, Result};
use crate::levy::StableCharacteristics;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

pub use route::{ExactRoute, NoiseRoute, SmallJumpPolicy, TruncatedRoute};

/// Uniform grid `t_k = k T / n` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    t_end: f64,
    n_steps: usize,
}

impl PathGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive and finite, got {t_end}"
            )));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter("need at least one step".into()));
        }
        Ok(Self { t_end, n_steps })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    /// Node `t_k`; `node(n_steps) == t_end` up to the last bit.
    pub fn node(&self, k: usize) -> f64 {
        k as f64 * self.t_end / self.n_steps as f64
    }
}

/// One reproducible random stream per `(master_seed, path_index)`.
///
/// Streams are independent across `path_index` by construction (distinct
/// ChaCha stream counters), so ensembles can be generated concurrently in
/// any order and still reproduce bit-identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub path_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, path_index: u64) -> Self {
        Self { master_seed, path_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.path_index);
        rng
    }
}

/// Which generator produced a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteTag {
    Exact,
    Truncated,
}

/// A jump exceeding the truncation level, kept with its arrival time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigJump {
    pub time: f64,
    pub size: f64,
}

/// Grid increments of one realization of `Z`, plus the explicit big-jump
/// records when the truncated route produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath {
    pub grid: PathGrid,
    pub increments: Vec<f64>,
    pub big_jumps: Vec<BigJump>,
    pub route: RouteTag,
    pub truncation_level: Option<f64>,
}

impl NoisePath {
    /// `Z(T) - Z(0)` with `Z(0) = 0`.
    pub fn total(&self) -> f64 {
        self.increments.iter().sum()
    }

    /// Cumulative values `Z(t_k)`, length `n_steps + 1`, starting at 0.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.increments.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for dz in &self.increments {
            acc += dz;
            out.push(acc);
        }
        out
    }
}

/// Uniform draw in the open interval (0, 1).
pub(crate) fn uniform_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Chambers-Mallows-Stuck sampler with the per-distribution constants
/// precomputed, for tight increment loops.
#[derive(Debug, Clone, Copy)]
pub struct StableSampler {
    alpha: f64,
    inv_alpha: f64,
    exp_term: f64,
    shift: f64,
    skew_scale: f64,
    /// Multiplier applied to the standard variate (sigma dt^(1/alpha) for
    /// increments, 1 for the standard sampler).
    amplitude: f64,
    /// Additive location term (mu dt for increments, 0 standard).
    offset: f64,
}

impl StableSampler {
    /// Standard variate `S_alpha(1, skew, 0)`. At `alpha = 1` only the
    /// symmetric case is supported (then the draw is `tan(U)`).
    pub fn standard(alpha: f64, skew: f64) -> Self {
        debug_assert!(alpha != 1.0 || skew == 0.0, "alpha = 1 is restricted to the symmetric case");
        let (shift, skew_scale) = if alpha == 1.0 {
            (0.0, 1.0)
        } else {
            let zeta = skew * (FRAC_PI_2 * alpha).tan();
            (zeta.atan() / alpha, (1.0 + zeta * zeta).powf(0.5 / alpha))
        };
        Self {
            alpha,
            inv_alpha: 1.0 / alpha,
            exp_term: (1.0 - alpha) / alpha,
            shift,
            skew_scale,
            amplitude: 1.0,
            offset: 0.0,
        }
    }

    /// Sampler for increments `Z(dt)` of the process with the given
    /// characteristics. Self-similarity provides the scaling: the stable
    /// part is `dt^(1/alpha) sigma X` with `X` standard, plus the location
    /// drift `mu dt`.
    pub fn for_increments(chars: &StableCharacteristics, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive and finite, got {dt}"
            )));
        }
        let alpha = chars.alpha();
        let sigma = chars.scale_alpha().powf(1.0 / alpha);
        let mut sampler = Self::standard(alpha, chars.skewness());
        sampler.amplitude = dt.powf(1.0 / alpha) * sigma;
        sampler.offset = chars.location() * dt;
        Ok(sampler)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = PI * (uniform_open(rng) - 0.5);
        let w: f64 = Exp1.sample(rng);
        if self.alpha == 1.0 {
            return self.amplitude * u.tan() + self.offset;
        }
        let phi = self.alpha * (u + self.shift);
        let ratio = ((u - phi).cos() / w).max(f64::MIN_POSITIVE);
        let x = self.skew_scale * phi.sin() / u.cos().powf(self.inv_alpha)
            * ratio.powf(self.exp_term);
        self.amplitude * x + self.offset
    }
}

/// Standard stable variate `S_alpha(1, skew, 0)` by the
/// Chambers-Mallows-Stuck transform.
pub fn sample_standard_stable<R: Rng + ?Sized>(alpha: f64, skew: f64, rng: &mut R) -> f64 {
    StableSampler::standard(alpha, skew).sample(rng)
}

/// One increment `Z(t + dt) - Z(t)`, distributed as `Z(dt)`.
pub fn sample_stable_increment<R: Rng + ?Sized>(
    chars: &StableCharacteristics,
    dt: f64,
    rng: &mut R,
) -> Result<f64> {
    Ok(StableSampler::for_increments(chars, dt)?.sample(rng))
}

/// First arrival time of a jump of modulus above `r`: exponential with
/// rate `nu({|y| > r})`.
pub fn first_big_jump_time<R: Rng + ?Sized>(
    chars: &StableCharacteristics,
    r: f64,
    rng: &mut R,
) -> Result<f64> {
    let rate = chars.tail_mass(r)?;
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "big-jump rate must be positive and finite, got {rate}"
        )));
    }
    Ok(-uniform_open(rng).ln() / rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(PathGrid::new(0.0, 4).is_err());
        assert!(PathGrid::new(-1.0, 4).is_err());
        assert!(PathGrid::new(1.0, 0).is_err());
        let g = PathGrid::new(2.0, 8).unwrap();
        assert_eq!(g.dt(), 0.25);
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(8), 2.0);
    }

    #[test]
    fn seed_streams_reproduce_and_differ() {
        let a: Vec<f64> = {
            let mut rng = SeedSpec::new(42, 3).rng();
            (0..16).map(|_| rng.random::<f64>()).collect()
        };
        let b: Vec<f64> = {
            let mut rng = SeedSpec::new(42, 3).rng();
            (0..16).map(|_| rng.random::<f64>()).collect()
        };
        let c: Vec<f64> = {
            let mut rng = SeedSpec::new(42, 4).rng();
            (0..16).map(|_| rng.random::<f64>()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn increment_rejects_bad_dt() {
        let chars = StableCharacteristics::symmetric(1.5, 0.5).unwrap();
        let mut rng = SeedSpec::new(1, 0).rng();
        assert!(sample_stable_increment(&chars, 0.0, &mut rng).is_err());
        assert!(sample_stable_increment(&chars, -1.0, &mut rng).is_err());
    }

    #[test]
    fn symmetric_median_near_zero() {
        // symmetry check on a moderate sample of small-dt increments
        let chars = StableCharacteristics::symmetric(1.2, 0.5).unwrap();
        let mut rng = SeedSpec::new(9, 0).rng();
        let mut xs: Vec<f64> = (0..20_001)
            .map(|_| sample_stable_increment(&chars, 1e-3, &mut rng).unwrap())
            .collect();
        xs.sort_by(f64::total_cmp);
        let median = xs[xs.len() / 2];
        // dt^(1/alpha) * sigma sets the scale of one increment
        let scale = 1e-3f64.powf(1.0 / 1.2) * chars.scale_alpha().powf(1.0 / 1.2);
        assert!(median.abs() < 0.05 * scale.max(1e-6) + 1e-4, "median {median}");
    }

    #[test]
    fn first_jump_time_mean_and_survival() {
        let chars = StableCharacteristics::symmetric(1.0, 0.5).unwrap();
        // tail_mass(1) = 1 for this measure
        let mut rng = SeedSpec::new(5, 0).rng();
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| first_big_jump_time(&chars, 1.0, &mut rng).unwrap())
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");

        // rate 2 at t = 0.5: survival e^{-1}
        let rate2 = StableCharacteristics::symmetric(1.0, 1.0).unwrap();
        let draws2: Vec<f64> = (0..n)
            .map(|_| first_big_jump_time(&rate2, 1.0, &mut rng).unwrap())
            .collect();
        let surv = draws2.iter().filter(|&&t| t > 0.5).count() as f64 / n as f64;
        assert!((surv - (-1.0f64).exp()).abs() < 0.005, "survival {surv}");
    }

    #[test]
    fn doubling_r_scales_the_rate() {
        // alpha = 1: tail_mass(2R) = tail_mass(R)/2, so the mean time doubles
        let chars = StableCharacteristics::symmetric(1.0, 0.5).unwrap();
        assert!(
            (chars.tail_mass(2.0).unwrap() - 0.5 * chars.tail_mass(1.0).unwrap()).abs() < 1e-15
        );
    }
}
