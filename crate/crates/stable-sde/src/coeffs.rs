//! Coefficient functions of the equation, shipped as named presets.
//!
//! The bounds need certified constants (the p-power Lipschitz and growth
//! constants of F, the sup norm of phi), so coefficients are not arbitrary
//! expressions: each preset derives its constants from its parameters and
//! carries them along. Presets are selected by name from the scenario
//! config and live behind trait objects.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Drift coefficient `F(t, x)` with certified constants for moment order `p`:
/// `|F(t,y) - F(t,z)|^p <= lipschitz_p * |y-z|^p` and
/// `|F(t,y)|^p <= growth_p * (1 + |y|^p)`.
pub trait DriftCoefficient: Send + Sync {
    fn eval(&self, t: f64, x: f64) -> f64;
    fn lipschitz_p(&self) -> f64;
    fn growth_p(&self) -> f64;
    fn name(&self) -> &'static str;
}

/// Bounded state factor `phi(x)` of the noise coefficient
/// `G(t, x) = g(t) phi(x)`, with certified sup norm. Presets are
/// constrained so the Hoelder bound `|phi(y)-phi(z)| <= |y-z|^(p/2)`
/// holds with constant one.
pub trait NoiseAmplitude: Send + Sync {
    fn eval(&self, x: f64) -> f64;
    fn sup_norm(&self) -> f64;
    fn name(&self) -> &'static str;
}

/// Time factor `g(t)` of the noise coefficient.
pub trait TimeFactor: Send + Sync {
    fn eval(&self, t: f64) -> f64;
    fn name(&self) -> &'static str;
}

/// The full coefficient set of one scenario.
pub struct CoefficientSpec {
    pub drift: Box<dyn DriftCoefficient>,
    pub time_factor: Box<dyn TimeFactor>,
    pub amplitude: Box<dyn NoiseAmplitude>,
}

// ---------------------------------------------------------------------------
// F presets
// ---------------------------------------------------------------------------

pub struct ZeroDrift;

impl DriftCoefficient for ZeroDrift {
    fn eval(&self, _t: f64, _x: f64) -> f64 {
        0.0
    }
    fn lipschitz_p(&self) -> f64 {
        0.0
    }
    fn growth_p(&self) -> f64 {
        0.0
    }
    fn name(&self) -> &'static str {
        "zero"
    }
}

/// `F(t, x) = slope * x + intercept`; certifies `L_F = |slope|^p` and
/// `C = max(|slope|^p, |intercept|^p)` (times `2^(p-1)` when `p > 1`).
pub struct AffineDrift {
    slope: f64,
    intercept: f64,
    lipschitz_p: f64,
    growth_p: f64,
}

impl AffineDrift {
    pub fn new(slope: f64, intercept: f64, p: f64) -> Result<Self> {
        check_order(p)?;
        let lipschitz_p = slope.abs().powf(p);
        let split = if p > 1.0 { 2f64.powf(p - 1.0) } else { 1.0 };
        let growth_p = split * lipschitz_p.max(intercept.abs().powf(p));
        Ok(Self { slope, intercept, lipschitz_p, growth_p })
    }
}

impl DriftCoefficient for AffineDrift {
    fn eval(&self, _t: f64, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
    fn lipschitz_p(&self) -> f64 {
        self.lipschitz_p
    }
    fn growth_p(&self) -> f64 {
        self.growth_p
    }
    fn name(&self) -> &'static str {
        "affine"
    }
}

/// `F(t, x) = clamp(slope * x, -clip, clip)`; Lipschitz like the affine
/// preset, bounded so `C = clip^p`.
pub struct ClippedLinearDrift {
    slope: f64,
    clip: f64,
    lipschitz_p: f64,
    growth_p: f64,
}

impl ClippedLinearDrift {
    pub fn new(slope: f64, clip: f64, p: f64) -> Result<Self> {
        check_order(p)?;
        if !(clip > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "clip level must be positive, got {clip}"
            )));
        }
        Ok(Self {
            slope,
            clip,
            lipschitz_p: slope.abs().powf(p),
            growth_p: clip.powf(p),
        })
    }
}

impl DriftCoefficient for ClippedLinearDrift {
    fn eval(&self, _t: f64, x: f64) -> f64 {
        (self.slope * x).clamp(-self.clip, self.clip)
    }
    fn lipschitz_p(&self) -> f64 {
        self.lipschitz_p
    }
    fn growth_p(&self) -> f64 {
        self.growth_p
    }
    fn name(&self) -> &'static str {
        "clipped-linear"
    }
}

// ---------------------------------------------------------------------------
// phi presets
// ---------------------------------------------------------------------------

pub struct ConstAmplitude {
    value: f64,
}

impl ConstAmplitude {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidParameter("amplitude must be finite".into()));
        }
        Ok(Self { value })
    }
}

impl NoiseAmplitude for ConstAmplitude {
    fn eval(&self, _x: f64) -> f64 {
        self.value
    }
    fn sup_norm(&self) -> f64 {
        self.value.abs()
    }
    fn name(&self) -> &'static str {
        "const"
    }
}

/// `phi(x) = amplitude * tanh(x / width)`, bounded by `amplitude`.
///
/// Accepted only when `amplitude <= 1/2` and `amplitude <= width`: together
/// these make `|phi(y) - phi(z)| <= |y-z|^(p/2)` hold with constant one for
/// every exponent `p/2` in (0, 1): the slope bound covers separations up
/// to one, the range bound covers the rest.
pub struct TanhAmplitude {
    amplitude: f64,
    width: f64,
}

impl TanhAmplitude {
    pub fn new(amplitude: f64, width: f64) -> Result<Self> {
        if !(amplitude > 0.0 && width > 0.0) {
            return Err(Error::InvalidParameter(
                "amplitude and width must be positive".into(),
            ));
        }
        if amplitude > 0.5 {
            return Err(Error::InvalidParameter(format!(
                "tanh amplitude must be <= 0.5 to certify the unit Hoelder constant, got {amplitude}"
            )));
        }
        if amplitude > width {
            return Err(Error::InvalidParameter(format!(
                "tanh slope amplitude/width must be <= 1, got {}",
                amplitude / width
            )));
        }
        Ok(Self { amplitude, width })
    }
}

impl NoiseAmplitude for TanhAmplitude {
    fn eval(&self, x: f64) -> f64 {
        self.amplitude * (x / self.width).tanh()
    }
    fn sup_norm(&self) -> f64 {
        self.amplitude
    }
    fn name(&self) -> &'static str {
        "tanh"
    }
}

// ---------------------------------------------------------------------------
// g presets
// ---------------------------------------------------------------------------

pub struct ConstFactor {
    value: f64,
}

impl ConstFactor {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidParameter("time factor must be finite".into()));
        }
        Ok(Self { value })
    }
}

impl TimeFactor for ConstFactor {
    fn eval(&self, _t: f64) -> f64 {
        self.value
    }
    fn name(&self) -> &'static str {
        "const"
    }
}

/// `g(t) = amplitude * sin(t)`.
pub struct SineFactor {
    amplitude: f64,
}

impl SineFactor {
    pub fn new(amplitude: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::InvalidParameter("sine amplitude must be finite".into()));
        }
        Ok(Self { amplitude })
    }
}

impl TimeFactor for SineFactor {
    fn eval(&self, t: f64) -> f64 {
        self.amplitude * t.sin()
    }
    fn name(&self) -> &'static str {
        "sine"
    }
}

/// Piecewise-linear table `(t_i, g_i)`, clamped to the end values outside
/// the tabulated range.
pub struct TableFactor {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TableFactor {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidParameter(
                "table needs at least two (time, value) rows of equal length".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "table times must be strictly increasing".into(),
            ));
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("table entries must be finite".into()));
        }
        Ok(Self { times, values })
    }
}

impl TimeFactor for TableFactor {
    fn eval(&self, t: f64) -> f64 {
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= *self.times.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let idx = self.times.partition_point(|&ti| ti <= t);
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }
    fn name(&self) -> &'static str {
        "table"
    }
}

fn check_order(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "moment order must be positive and finite, got {p}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Preset registry, keyed by the names used in scenario configs
// ---------------------------------------------------------------------------

/// Serialized form of an F preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum DriftPreset {
    Zero,
    Affine { slope: f64, intercept: f64 },
    ClippedLinear { slope: f64, clip: f64 },
}

impl DriftPreset {
    pub fn build(&self, p: f64) -> Result<Box<dyn DriftCoefficient>> {
        match *self {
            DriftPreset::Zero => Ok(Box::new(ZeroDrift)),
            DriftPreset::Affine { slope, intercept } => {
                Ok(Box::new(AffineDrift::new(slope, intercept, p)?))
            }
            DriftPreset::ClippedLinear { slope, clip } => {
                Ok(Box::new(ClippedLinearDrift::new(slope, clip, p)?))
            }
        }
    }
}

/// Serialized form of a phi preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum AmplitudePreset {
    Const { value: f64 },
    Tanh { amplitude: f64, width: f64 },
}

impl AmplitudePreset {
    pub fn build(&self) -> Result<Box<dyn NoiseAmplitude>> {
        match *self {
            AmplitudePreset::Const { value } => Ok(Box::new(ConstAmplitude::new(value)?)),
            AmplitudePreset::Tanh { amplitude, width } => {
                Ok(Box::new(TanhAmplitude::new(amplitude, width)?))
            }
        }
    }
}

/// Serialized form of a g preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum TimeFactorPreset {
    Const { value: f64 },
    Sine { amplitude: f64 },
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl TimeFactorPreset {
    pub fn build(&self) -> Result<Box<dyn TimeFactor>> {
        match self {
            TimeFactorPreset::Const { value } => Ok(Box::new(ConstFactor::new(*value)?)),
            TimeFactorPreset::Sine { amplitude } => Ok(Box::new(SineFactor::new(*amplitude)?)),
            TimeFactorPreset::Table { times, values } => {
                Ok(Box::new(TableFactor::new(times.clone(), values.clone())?))
            }
        }
    }
}
