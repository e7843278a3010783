use thiserror::Error;

/// Errors raised by the spectral, model, sampling and bound routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("period must be at least 2, got {0}")]
    PeriodTooSmall(usize),

    #[error("cell count must be at least 2, got {0}")]
    TooFewCells(usize),

    #[error("normalized spectral difference out of [-1, 1] at index {index}: {value}")]
    DifferenceOutOfRange { index: usize, value: f64 },

    #[error("index {index} outside the admissible range {range}")]
    IndexOutOfRange { index: i64, range: String },

    #[error("empty index window: n_min = {n_min} > n_max = {n_max}")]
    EmptyWindow { n_min: i64, n_max: i64 },

    #[error("cut index N = {n} requires N < p/2 for period {period}")]
    CutOutOfRange { n: usize, period: usize },

    #[error(
        "alternating model of odd size {0} degenerates to an orthogonal evolution with half the step size"
    )]
    DegenerateModel(usize),

    #[error("model amplitude y = {0} outside [-1, 1]")]
    AmplitudeOutOfRange(f64),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("support point {point} does not lie on the lattice 2*pi*k/{period}")]
    OffLattice { point: f64, period: usize },

    #[error(
        "reduced spectrum is not uniform: residue k = {residue} carries mass {mass}, expected {expected}"
    )]
    NonUniformReduction {
        residue: usize,
        mass: f64,
        expected: f64,
    },

    #[error("invalid sampling distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid moments: {0}")]
    InvalidMoments(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
