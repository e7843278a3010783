//! Anticipation statistics of sampled spectral differences.
//!
//! The crate computes the anticipation amplitudes `α_n` and probabilities
//! `p_n = |α_n|²` of a real spectral difference `ŷ`, either periodic in the
//! frequency with period `p` or piecewise constant on `M` cells of a
//! continuous spectrum, together with closed forms for extremal model states,
//! closed-form moments under i.i.d. sampling of `ŷ`, a deterministic Monte
//! Carlo engine and the frequency bounds for discrete spectral measures.

pub mod cli;
pub mod error;
pub mod measure;
pub mod model;
pub mod rng;
pub mod sampling;
pub mod spectral;
pub mod stats;
pub mod verify;
mod transform;

pub use error::{Error, Result};
pub use measure::DiscreteMeasure;
pub use model::{closed_form_pn, make_model, ModelKind, ModelSpec, SpectralDifference};
pub use spectral::{
    amplitudes_continuous, amplitudes_continuous_with, amplitudes_periodic, cumulative_probability,
    moment_observable, probabilities, tilde_index, AmplitudeSeries, Origin, Period,
    ProbabilitySeries, SpectralDifferenceContinuous, SpectralDifferencePeriodic, TransformMode,
};
pub use stats::MomentTuple;
pub use sampling::{
    near_zero_statistics, run_monte_carlo, sample_spectral_difference, EstimateReport, Geometry,
    MonteCarloConfig, SamplingDistribution,
};
