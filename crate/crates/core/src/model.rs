//! Extremal model states with closed-form anticipation probabilities.
//!
//! Constant differences give minimum anticipation, alternating differences
//! give maximum anticipation. Their closed forms serve as oracles for the
//! transform pipeline in [`crate::spectral`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{SpectralDifferenceContinuous, SpectralDifferencePeriodic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    ConstPeriodic,
    AltPeriodic,
    ConstContinuous,
    AltContinuous,
}

impl ModelKind {
    pub fn is_periodic(self) -> bool {
        matches!(self, ModelKind::ConstPeriodic | ModelKind::AltPeriodic)
    }

    pub fn is_alternating(self) -> bool {
        matches!(self, ModelKind::AltPeriodic | ModelKind::AltContinuous)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::ConstPeriodic => "const-periodic",
            ModelKind::AltPeriodic => "alt-periodic",
            ModelKind::ConstContinuous => "const-continuous",
            ModelKind::AltContinuous => "alt-continuous",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "const-periodic" => Ok(ModelKind::ConstPeriodic),
            "alt-periodic" => Ok(ModelKind::AltPeriodic),
            "const-continuous" => Ok(ModelKind::ConstContinuous),
            "alt-continuous" => Ok(ModelKind::AltContinuous),
            other => Err(Error::InvalidConfig(format!("unknown model kind '{other}'"))),
        }
    }
}

/// A model state: kind, size (`p` or `M`) and amplitude `y ∈ [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub size: usize,
    pub y: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, size: usize, y: f64) -> Result<Self> {
        let spec = Self { kind, size, y };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.y.is_finite() || self.y.abs() > 1.0 {
            return Err(Error::AmplitudeOutOfRange(self.y));
        }
        if self.size < 2 {
            return Err(if self.kind.is_periodic() {
                Error::PeriodTooSmall(self.size)
            } else {
                Error::TooFewCells(self.size)
            });
        }
        if self.kind.is_alternating() && self.size % 2 == 1 {
            return Err(Error::DegenerateModel(self.size));
        }
        Ok(())
    }

    fn values(&self) -> Vec<f64> {
        (0..self.size)
            .map(|k| {
                if self.kind.is_alternating() && k % 2 == 1 {
                    -self.y
                } else {
                    self.y
                }
            })
            .collect()
    }
}

/// Either spectral-difference representation, as produced by [`make_model`].
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDifference {
    Periodic(SpectralDifferencePeriodic),
    Continuous(SpectralDifferenceContinuous),
}

/// `ŷ_k = y` for constant kinds, `ŷ_k = (-1)^k y` for alternating kinds.
pub fn make_model(spec: &ModelSpec) -> Result<SpectralDifference> {
    spec.validate()?;
    let values = spec.values();
    Ok(if spec.kind.is_periodic() {
        SpectralDifference::Periodic(SpectralDifferencePeriodic::new(values)?)
    } else {
        SpectralDifference::Continuous(SpectralDifferenceContinuous::new(values)?)
    })
}

/// Closed-form anticipation probability `p_n` of a model state.
///
/// ```text
/// const-periodic   y² / (p² sin²(π(n-½)/p))
/// alt-periodic     y² / (p² cos²(π(n-½)/p))
/// const-continuous y² / (π² (n-½)²)
/// alt-continuous   [y tan(π(n-½)/M) / (π(n-½))]²
/// ```
pub fn closed_form_pn(spec: &ModelSpec, n: i64) -> Result<f64> {
    spec.validate()?;
    let y2 = spec.y * spec.y;
    let size = spec.size as f64;
    let omega = n as f64 - 0.5;
    let p = spec.size as i64;
    Ok(match spec.kind {
        ModelKind::ConstPeriodic => {
            if (2 * n - 1).rem_euclid(p) == 0 {
                // sin² = 1 exactly here; keep it out of the trig path
                y2 / (size * size)
            } else {
                let s = (PI * omega / size).sin();
                y2 / (size * size * s * s)
            }
        }
        ModelKind::AltPeriodic => {
            let c = (PI * omega / size).cos();
            y2 / (size * size * c * c)
        }
        ModelKind::ConstContinuous => y2 / (PI * PI * omega * omega),
        ModelKind::AltContinuous => {
            let t = (PI * omega / size).tan();
            y2 * t * t / (PI * PI * omega * omega)
        }
    })
}
