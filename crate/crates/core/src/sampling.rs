//! I.i.d. sampling of normalized spectral differences and the Monte Carlo
//! engine for the anticipation statistics.
//!
//! Trial `t` draws its spectral difference from RNG stream `t`, and trials
//! are accumulated in fixed-size chunks merged in chunk order. The report is
//! therefore a pure function of the configuration, independent of the number
//! of worker threads.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

use crate::error::{Error, Result};
use crate::model::SpectralDifference;
use crate::rng::{Domain, StreamRng};
use crate::spectral::{tilde_index, Period, SpectralDifferenceContinuous, SpectralDifferencePeriodic};
use crate::stats::{self, MomentTuple};
use crate::transform::HalfIntegerTransform;

const MASS_TOLERANCE: f64 = 1e-12;

/// One piece of a tabulated law: mass spread uniformly over `[lo, hi]`, or
/// an atom when `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// Uniform on `[-1, 1]`.
    Uniform,
    /// `±y0` with mass ½ each.
    TwoPoint { y0: f64 },
    Table { segments: Vec<Segment> },
}

/// Law `F` of one normalized spectral difference component `ŷ_k ∈ [-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingDistribution {
    #[serde(flatten)]
    family: Family,
    moments: MomentTuple,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl SamplingDistribution {
    pub fn uniform() -> Self {
        Self {
            family: Family::Uniform,
            moments: MomentTuple {
                m1: 0.0,
                m2: 1.0 / 3.0,
                m3: 0.0,
                m4: 0.2,
            },
            cumulative: Vec::new(),
        }
    }

    pub fn two_point(y0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&y0) {
            return Err(Error::InvalidDistribution(format!(
                "two-point level {y0} outside [0, 1]"
            )));
        }
        let y2 = y0 * y0;
        Ok(Self {
            family: Family::TwoPoint { y0 },
            moments: MomentTuple {
                m1: 0.0,
                m2: y2,
                m3: 0.0,
                m4: y2 * y2,
            },
            cumulative: Vec::new(),
        })
    }

    pub fn point_mass(y: f64) -> Result<Self> {
        Self::table(vec![Segment {
            lo: y,
            hi: y,
            mass: 1.0,
        }])
    }

    pub fn table(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidDistribution("empty table".into()));
        }
        for s in &segments {
            if !(s.lo.is_finite() && s.hi.is_finite() && s.mass.is_finite()) {
                return Err(Error::InvalidDistribution(format!("non-finite entry {s:?}")));
            }
            if s.lo > s.hi {
                return Err(Error::InvalidDistribution(format!("lo > hi in {s:?}")));
            }
            if s.lo < -1.0 || s.hi > 1.0 {
                return Err(Error::InvalidDistribution(format!(
                    "support outside [-1, 1] in {s:?}"
                )));
            }
            if s.mass < 0.0 {
                return Err(Error::InvalidDistribution(format!("negative mass in {s:?}")));
            }
        }
        let total: f64 = segments.iter().map(|s| s.mass).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        let raw = |k: i32| -> f64 {
            segments
                .iter()
                .map(|s| {
                    let e = if s.hi == s.lo {
                        s.lo.powi(k)
                    } else {
                        (s.hi.powi(k + 1) - s.lo.powi(k + 1)) / ((k + 1) as f64 * (s.hi - s.lo))
                    };
                    s.mass * e
                })
                .sum()
        };
        let moments = MomentTuple::new(raw(1), raw(2), raw(3), raw(4))?;
        let mut acc = 0.0;
        let cumulative = segments
            .iter()
            .map(|s| {
                acc += s.mass;
                acc
            })
            .collect();
        Ok(Self {
            family: Family::Table { segments },
            moments,
            cumulative,
        })
    }

    /// Reads a CSV table with header `lo,hi,mass`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| {
            Error::InvalidDistribution(format!("cannot read {}: {e}", path.display()))
        })?;
        let headers = reader
            .headers()
            .map_err(|e| Error::InvalidDistribution(e.to_string()))?
            .clone();
        let expected = ["lo", "hi", "mass"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
            return Err(Error::InvalidDistribution(format!(
                "expected header lo,hi,mass, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut segments = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidDistribution(e.to_string()))?;
            let field = |i: usize| -> Result<f64> {
                record[i].trim().parse().map_err(|_| {
                    Error::InvalidDistribution(format!(
                        "row {}: cannot parse '{}'",
                        line + 2,
                        &record[i]
                    ))
                })
            };
            segments.push(Segment {
                lo: field(0)?,
                hi: field(1)?,
                mass: field(2)?,
            });
        }
        Self::table(segments)
    }

    /// Parses `uniform`, `two-point:<y0>` or `table:<path>`.
    pub fn parse(spec: &str) -> Result<Self> {
        if spec == "uniform" {
            return Ok(Self::uniform());
        }
        if let Some(level) = spec.strip_prefix("two-point:") {
            let y0 = level.parse().map_err(|_| {
                Error::InvalidDistribution(format!("cannot parse two-point level '{level}'"))
            })?;
            return Self::two_point(y0);
        }
        if let Some(path) = spec.strip_prefix("table:") {
            return Self::from_csv(Path::new(path));
        }
        Err(Error::InvalidDistribution(format!(
            "unknown law '{spec}' (expected uniform, two-point:<y0> or table:<path>)"
        )))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn moments(&self) -> MomentTuple {
        self.moments
    }

    /// Whether the law is invariant under `ŷ ↦ -ŷ`, judged by its odd moments.
    pub fn is_symmetric(&self) -> bool {
        self.moments.m1.abs() <= MASS_TOLERANCE && self.moments.m3.abs() <= MASS_TOLERANCE
    }

    /// `q_ε = P(|ŷ| < ε)`.
    pub fn near_zero_probability(&self, epsilon: f64) -> f64 {
        match &self.family {
            Family::Uniform => epsilon.clamp(0.0, 1.0),
            Family::TwoPoint { y0 } => {
                if *y0 < epsilon {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Table { segments } => segments
                .iter()
                .map(|s| {
                    if s.lo == s.hi {
                        if s.lo.abs() < epsilon {
                            s.mass
                        } else {
                            0.0
                        }
                    } else {
                        let overlap = (s.hi.min(epsilon) - s.lo.max(-epsilon)).max(0.0);
                        s.mass * overlap / (s.hi - s.lo)
                    }
                })
                .sum(),
        }
    }

    /// One draw of `ŷ`.
    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        match &self.family {
            Family::Uniform => 2.0 * rng.next_f64() - 1.0,
            Family::TwoPoint { y0 } => {
                if rng.next_u64() >> 63 == 0 {
                    *y0
                } else {
                    -*y0
                }
            }
            Family::Table { segments } => {
                let u = rng.next_f64() * self.cumulative[self.cumulative.len() - 1];
                let i = self
                    .cumulative
                    .partition_point(|&c| c <= u)
                    .min(segments.len() - 1);
                let s = segments[i];
                if s.lo == s.hi {
                    s.lo
                } else {
                    s.lo + (s.hi - s.lo) * rng.next_f64()
                }
            }
        }
    }

    fn fill(&self, values: &mut [f64], rng: &mut StreamRng) {
        for v in values {
            *v = self.sample(rng);
        }
    }
}

/// Periodic spectrum with period `p`, or continuous spectrum on `M` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Periodic { period: usize },
    Continuous { cells: usize },
}

impl Geometry {
    pub fn size(self) -> usize {
        match self {
            Geometry::Periodic { period } => period,
            Geometry::Continuous { cells } => cells,
        }
    }
}

/// Draws `ŷ_0..ŷ_{size-1}` i.i.d. from `dist`.
pub fn sample_spectral_difference(
    dist: &SamplingDistribution,
    geometry: Geometry,
    rng: &mut StreamRng,
) -> Result<SpectralDifference> {
    let mut values = vec![0.0; geometry.size()];
    dist.fill(&mut values, rng);
    Ok(match geometry {
        Geometry::Periodic { .. } => {
            SpectralDifference::Periodic(SpectralDifferencePeriodic::new(values)?)
        }
        Geometry::Continuous { .. } => {
            SpectralDifference::Continuous(SpectralDifferenceContinuous::new(values)?)
        }
    })
}

/// Default number of trials per accumulation chunk.
pub const DEFAULT_CHUNK: u64 = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloConfig {
    pub geometry: Geometry,
    pub distribution: SamplingDistribution,
    pub trials: u64,
    pub seed: u64,
    /// Indices `n` for `p_n`.
    pub n_list: Vec<i64>,
    /// Cuts `N` for `p_N`.
    pub cut_list: Vec<usize>,
    /// Orders `r` for `⟨ñ^r⟩` (periodic only).
    pub r_list: Vec<f64>,
    /// Threshold for the near-zero count `#{k : |ŷ_k| < ε}`.
    pub epsilon: Option<f64>,
    pub chunk_size: u64,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl MonteCarloConfig {
    pub fn new(geometry: Geometry, distribution: SamplingDistribution, trials: u64, seed: u64) -> Self {
        Self {
            geometry,
            distribution,
            trials,
            seed,
            n_list: Vec::new(),
            cut_list: Vec::new(),
            r_list: Vec::new(),
            epsilon: None,
            chunk_size: DEFAULT_CHUNK,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == 0 {
            return invalid("trials must be at least 1".into());
        }
        if self.chunk_size == 0 {
            return invalid("chunk size must be at least 1".into());
        }
        if self.threads == Some(0) {
            return invalid("thread count must be at least 1".into());
        }
        match self.geometry {
            Geometry::Periodic { period } => {
                if period < 2 {
                    return Err(Error::PeriodTooSmall(period));
                }
                if let Some(&n) = self.n_list.iter().find(|&&n| n < 1 || n > period as i64) {
                    return Err(Error::IndexOutOfRange {
                        index: n,
                        range: format!("1..={period}"),
                    });
                }
                if let Some(&cut) = self.cut_list.iter().find(|&&c| 2 * c >= period) {
                    return Err(Error::CutOutOfRange { n: cut, period });
                }
            }
            Geometry::Continuous { cells } => {
                if cells < 2 {
                    return Err(Error::TooFewCells(cells));
                }
                if !self.r_list.is_empty() {
                    return invalid(
                        "moment observables ⟨ñ^r⟩ are only sampled for periodic spectra".into(),
                    );
                }
            }
        }
        if let Some(r) = self.r_list.iter().find(|r| !r.is_finite() || **r < 0.0) {
            return invalid(format!("moment order {r} must be a nonnegative real"));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return invalid(format!("epsilon = {e} must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    /// Statistics reported for this configuration, in output order.
    pub fn statistics(&self) -> Vec<Statistic> {
        let mut out: Vec<Statistic> = self.n_list.iter().map(|&n| Statistic::Pn(n)).collect();
        out.extend(self.cut_list.iter().map(|&c| Statistic::PCut(c)));
        out.push(Statistic::PTot);
        out.extend(self.r_list.iter().map(|&r| Statistic::Moment(r)));
        if self.epsilon.is_some() {
            out.push(Statistic::NearZeroCount);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    Pn(i64),
    PCut(usize),
    PTot,
    Moment(f64),
    NearZeroCount,
}

impl Statistic {
    pub fn label(&self) -> String {
        match self {
            Statistic::Pn(n) => format!("p_n[{n}]"),
            Statistic::PCut(c) => format!("p_N[{c}]"),
            Statistic::PTot => "p_tot".into(),
            Statistic::Moment(r) => format!("moment[{r}]"),
            Statistic::NearZeroCount => "near_zero_count".into(),
        }
    }
}

/// Streaming central moments up to order four, mergeable across partitions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Accumulator {
    pub count: u64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term = delta * dn * n1;
        self.mean += dn;
        self.m4 += term * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term;
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        let d2 = d * d;
        Self {
            count: self.count + other.count,
            mean: self.mean + d * nb / n,
            m2: self.m2 + other.m2 + d2 * na * nb / n,
            m3: self.m3
                + other.m3
                + d2 * d * na * nb * (na - nb) / (n * n)
                + 3.0 * d * (na * other.m2 - nb * self.m2) / n,
            m4: self.m4
                + other.m4
                + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
                + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
                + 4.0 * d * (na * other.m3 - nb * self.m3) / n,
        }
    }

    /// Unbiased sample variance; zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    /// Large-sample standard error of the sample variance.
    pub fn variance_std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let s2 = self.variance();
        ((self.m4 / n - s2 * s2).max(0.0) / n).sqrt()
    }
}

/// Floor on standard errors when forming z-scores.
pub const SE_FLOOR: f64 = 1e-12;

pub fn z_score(estimate: f64, predicted: f64, std_error: f64) -> f64 {
    (estimate - predicted) / std_error.max(SE_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub statistic: String,
    pub trials: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub variance_std_error: f64,
    pub predicted_mean: Option<f64>,
    pub predicted_variance: Option<f64>,
    pub z_mean: Option<f64>,
    pub z_variance: Option<f64>,
    /// Leading term of an asymptotic expansion, where one is known.
    pub leading_order: Option<f64>,
    #[serde(skip)]
    pub accumulator: Accumulator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub config: MonteCarloConfig,
    pub estimates: Vec<Estimate>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Prediction {
    mean: Option<f64>,
    variance: Option<f64>,
    leading: Option<f64>,
}

/// Largest cell count for which finite-M variances are formed from the dense
/// quadratic form.
const DENSE_FORM_LIMIT: usize = 2048;

fn predict(config: &MonteCarloConfig, stat: Statistic) -> Prediction {
    let m = config.distribution.moments();
    let size = config.geometry.size();
    let mut out = Prediction::default();
    match config.geometry {
        Geometry::Periodic { period: p } => match stat {
            Statistic::Pn(n) => {
                out.mean = stats::expected_pn(p, n, &m).ok();
                out.variance = stats::var_pn(p, n, &m).ok();
            }
            Statistic::PCut(c) => {
                out.mean = stats::expected_pN(p, c, &m).ok();
                out.variance = stats::var_pN(p, c, &m).ok();
            }
            Statistic::PTot => {
                out.mean = Some(stats::expected_ptot(&m));
                out.variance = stats::var_pN(p, 0, &m).ok();
            }
            Statistic::Moment(r) => {
                out.mean = Some(stats::exact_expected_moment_observable(p, r, &m));
                out.leading = Some(stats::expected_moment_observable(p, r, &m).leading);
            }
            Statistic::NearZeroCount => {}
        },
        Geometry::Continuous { cells } => match stat {
            Statistic::Pn(n) => {
                out.mean = stats::continuous::expected_pn(n, &m, Some(cells)).finite_cells;
                out.leading = Some(stats::continuous::expected_pn(n, &m, None).continuum);
                if cells <= DENSE_FORM_LIMIT {
                    out.variance = Some(single_index_variance(cells, n, &m));
                }
            }
            Statistic::PCut(c) => {
                let e = stats::continuous::expected_pN(c, &m, Some(cells));
                out.mean = e.finite_cells;
                out.leading = Some(e.continuum);
                if cells <= DENSE_FORM_LIMIT {
                    out.variance = stats::continuous::var_pN(c, &m, Some(cells)).finite_cells;
                }
            }
            Statistic::PTot => {
                out.mean = Some(m.m2);
                out.variance = Some((m.m4 - m.m2 * m.m2) / cells as f64);
            }
            Statistic::Moment(_) | Statistic::NearZeroCount => {}
        },
    }
    if stat == Statistic::NearZeroCount {
        if let Some(eps) = config.epsilon {
            let q = config.distribution.near_zero_probability(eps);
            out.mean = Some(size as f64 * q);
            out.variance = Some(size as f64 * q * (1.0 - q));
        }
    }
    out
}

fn single_index_variance(cells: usize, n: i64, m: &MomentTuple) -> f64 {
    let mf = cells as f64;
    let w = n as f64 - 0.5;
    let amp = (PI * w / mf).sin() / (PI * w);
    let c: Vec<Complex64> = (0..cells)
        .map(|j| Complex64::from_polar(amp, -PI * w * (2 * j + 1) as f64 / mf))
        .collect();
    let mut a = vec![0.0; cells * cells];
    for i in 0..cells {
        for j in 0..cells {
            a[i * cells + j] = (c[i] * c[j].conj()).re;
        }
    }
    stats::quadratic_form_variance(&a, cells, m)
}

/// Per-trial evaluator holding the transform plan and scratch buffers.
pub struct TrialEngine<'a> {
    config: &'a MonteCarloConfig,
    statistics: Vec<Statistic>,
    plan: HalfIntegerTransform,
    values: Vec<f64>,
    probs: Vec<f64>,
    prefix: Vec<f64>,
    weights: Vec<Vec<f64>>,
    envelope: Vec<(i64, f64)>,
    out: Vec<f64>,
}

impl<'a> TrialEngine<'a> {
    pub fn new(config: &'a MonteCarloConfig) -> Result<Self> {
        config.validate()?;
        let size = config.geometry.size();
        let weights = match config.geometry {
            Geometry::Periodic { period } => config
                .r_list
                .iter()
                .map(|&r| {
                    (1..=period as i64)
                        .map(|n| (tilde_index(n, Period::Finite(period)) as f64).powf(r))
                        .collect()
                })
                .collect(),
            Geometry::Continuous { .. } => Vec::new(),
        };
        // continuous: |α_n|² = envelope(n)² |H_{n mod M}|²
        let envelope = match config.geometry {
            Geometry::Periodic { .. } => Vec::new(),
            Geometry::Continuous { cells } => {
                let reach = config.cut_list.iter().copied().max().unwrap_or(0) as i64;
                let mut idx: Vec<i64> = (1 - reach..=reach).collect();
                idx.extend(&config.n_list);
                idx.sort_unstable();
                idx.dedup();
                idx.into_iter()
                    .map(|n| {
                        let w = n as f64 - 0.5;
                        let s = (PI * w / cells as f64).sin() / (PI * w);
                        (n, s * s)
                    })
                    .collect()
            }
        };
        let statistics = config.statistics();
        Ok(Self {
            config,
            out: vec![0.0; statistics.len()],
            statistics,
            plan: HalfIntegerTransform::new(size),
            values: vec![0.0; size],
            probs: vec![0.0; size],
            prefix: vec![0.0; size + 1],
            weights,
            envelope,
        })
    }

    pub fn statistics(&self) -> &[Statistic] {
        &self.statistics
    }

    /// The spectral difference drawn by the most recent [`Self::run`].
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Evaluates trial `index`; values are ordered as [`Self::statistics`].
    pub fn run(&mut self, index: u64) -> &[f64] {
        let config = self.config;
        let mut rng = StreamRng::new(config.seed, Domain::SpectralDifference, index);
        config.distribution.fill(&mut self.values, &mut rng);
        let size = self.values.len();
        let spectrum = self.plan.apply(&self.values);
        for (p, h) in self.probs.iter_mut().zip(spectrum) {
            *p = h.norm_sqr();
        }
        let near_zero = config.epsilon.map(|eps| {
            self.values.iter().filter(|v| v.abs() < eps).count() as f64
        });
        match config.geometry {
            Geometry::Periodic { period } => {
                let scale = 1.0 / (period * period) as f64;
                // probs[r] holds p_n for n ≡ r; prefix over n = 1..=p
                for n in 1..=period {
                    self.prefix[n] = self.prefix[n - 1] + self.probs[n % period] * scale;
                }
                let total = self.prefix[period];
                for (slot, stat) in self.out.iter_mut().zip(&self.statistics) {
                    *slot = match *stat {
                        Statistic::Pn(n) => self.probs[n as usize % period] * scale,
                        Statistic::PCut(c) => self.prefix[period - c] - self.prefix[c],
                        Statistic::PTot => total,
                        Statistic::Moment(_) => 0.0,
                        Statistic::NearZeroCount => near_zero.unwrap_or(0.0),
                    };
                }
                let mut k = 0;
                for (slot, stat) in self.out.iter_mut().zip(&self.statistics) {
                    if let Statistic::Moment(_) = stat {
                        *slot = self.weights[k]
                            .iter()
                            .enumerate()
                            .map(|(i, w)| w * self.probs[(i + 1) % period] * scale)
                            .sum();
                        k += 1;
                    }
                }
            }
            Geometry::Continuous { cells } => {
                let mi = cells as i64;
                let total = self.values.iter().map(|y| y * y).sum::<f64>() / size as f64;
                let pn = |n: i64| -> f64 {
                    let env = self
                        .envelope
                        .binary_search_by_key(&n, |e| e.0)
                        .map(|i| self.envelope[i].1)
                        .unwrap_or(0.0);
                    env * self.probs[n.rem_euclid(mi) as usize]
                };
                for (slot, stat) in self.out.iter_mut().zip(&self.statistics) {
                    *slot = match *stat {
                        Statistic::Pn(n) => pn(n),
                        Statistic::PCut(c) => {
                            let c = c as i64;
                            total - (1 - c..=c).map(pn).sum::<f64>()
                        }
                        Statistic::PTot => total,
                        Statistic::Moment(_) => 0.0,
                        Statistic::NearZeroCount => near_zero.unwrap_or(0.0),
                    };
                }
            }
        }
        &self.out
    }
}

fn run_chunk(config: &MonteCarloConfig, start: u64, end: u64) -> Result<Vec<Accumulator>> {
    let mut engine = TrialEngine::new(config)?;
    let mut acc = vec![Accumulator::default(); engine.statistics().len()];
    for t in start..end {
        for (a, &x) in acc.iter_mut().zip(engine.run(t)) {
            a.push(x);
        }
    }
    Ok(acc)
}

/// Runs the configured trials and pairs each estimate with its closed form.
pub fn run_monte_carlo(config: &MonteCarloConfig) -> Result<EstimateReport> {
    config.validate()?;
    let chunks: Vec<(u64, u64)> = (0..config.trials)
        .step_by(config.chunk_size as usize)
        .map(|s| (s, (s + config.chunk_size).min(config.trials)))
        .collect();
    let work = || -> Result<Vec<Vec<Accumulator>>> {
        chunks
            .par_iter()
            .map(|&(s, e)| run_chunk(config, s, e))
            .collect()
    };
    let partials = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let statistics = config.statistics();
    let mut total = vec![Accumulator::default(); statistics.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t = t.merge(p);
        }
    }
    Ok(build_report(config, &statistics, total))
}

/// Combines reports of disjoint trial ranges of the same experiment.
pub fn merge_reports(a: &EstimateReport, b: &EstimateReport) -> Result<EstimateReport> {
    let labels = |r: &EstimateReport| r.estimates.iter().map(|e| e.statistic.clone()).collect::<Vec<_>>();
    if labels(a) != labels(b) {
        return Err(Error::InvalidConfig("reports cover different statistics".into()));
    }
    let mut config = a.config.clone();
    config.trials = a.config.trials + b.config.trials;
    let statistics = config.statistics();
    let merged = a
        .estimates
        .iter()
        .zip(&b.estimates)
        .map(|(x, y)| x.accumulator.merge(&y.accumulator))
        .collect();
    Ok(build_report(&config, &statistics, merged))
}

/// Accumulates trials `start..end` only; used to split one experiment.
pub fn run_trial_range(config: &MonteCarloConfig, start: u64, end: u64) -> Result<EstimateReport> {
    config.validate()?;
    let acc = run_chunk(config, start, end)?;
    let mut part = config.clone();
    part.trials = end - start;
    Ok(build_report(&part, &config.statistics(), acc))
}

fn build_report(
    config: &MonteCarloConfig,
    statistics: &[Statistic],
    accumulators: Vec<Accumulator>,
) -> EstimateReport {
    let estimates = statistics
        .iter()
        .zip(accumulators)
        .map(|(&stat, acc)| {
            let pred = predict(config, stat);
            let (mean, variance) = (acc.mean, acc.variance());
            let (se, vse) = (acc.std_error(), acc.variance_std_error());
            Estimate {
                statistic: stat.label(),
                trials: acc.count,
                mean,
                variance,
                std_error: se,
                variance_std_error: vse,
                predicted_mean: pred.mean,
                predicted_variance: pred.variance,
                z_mean: pred.mean.map(|p| z_score(mean, p, se)),
                z_variance: pred.variance.map(|p| z_score(variance, p, vse)),
                leading_order: pred.leading,
                accumulator: acc,
            }
        })
        .collect();
    EstimateReport {
        config: config.clone(),
        estimates,
    }
}

impl EstimateReport {
    pub fn get(&self, statistic: Statistic) -> Option<&Estimate> {
        let label = statistic.label();
        self.estimates.iter().find(|e| e.statistic == label)
    }

    /// Largest |z| over all paired estimates.
    pub fn max_abs_z(&self) -> f64 {
        self.estimates
            .iter()
            .flat_map(|e| [e.z_mean, e.z_variance])
            .flatten()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearZeroReport {
    pub period: usize,
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    /// `q_ε = P(|ŷ| < ε)`.
    pub q: f64,
    /// `histogram[c]` = number of trials with count `c`, `c = 0..=p`.
    pub histogram: Vec<u64>,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub variance_std_error: f64,
    pub predicted_mean: f64,
    pub predicted_variance: f64,
    pub z_mean: f64,
    pub z_variance: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Smallest expected count per pooled bin of the chi-square test.
pub const MIN_EXPECTED_PER_BIN: f64 = 5.0;

/// Count of near-zero components `#{k : |ŷ_k| < ε}` per trial, compared with
/// Binomial(p, q_ε).
pub fn near_zero_statistics(
    dist: &SamplingDistribution,
    p: usize,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<NearZeroReport> {
    if p < 2 {
        return Err(Error::PeriodTooSmall(p));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidConfig(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let counts: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = StreamRng::new(seed, Domain::NearZero, t);
            (0..p).filter(|_| dist.sample(&mut rng).abs() < epsilon).count()
        })
        .collect();
    let mut histogram = vec![0u64; p + 1];
    let mut acc = Accumulator::default();
    for &c in &counts {
        histogram[c] += 1;
        acc.push(c as f64);
    }
    let q = dist.near_zero_probability(epsilon);
    let predicted_mean = p as f64 * q;
    let predicted_variance = predicted_mean * (1.0 - q);
    let (chi_square, degrees_of_freedom, p_value) = binomial_chi_square(&histogram, p, q, trials);
    Ok(NearZeroReport {
        period: p,
        epsilon,
        trials,
        seed,
        q,
        mean: acc.mean,
        variance: acc.variance(),
        std_error: acc.std_error(),
        variance_std_error: acc.variance_std_error(),
        predicted_mean,
        predicted_variance,
        z_mean: z_score(acc.mean, predicted_mean, acc.std_error()),
        z_variance: z_score(acc.variance(), predicted_variance, acc.variance_std_error()),
        chi_square,
        degrees_of_freedom,
        p_value,
        histogram,
    })
}

/// Pearson statistic against Binomial(p, q) with adjacent bins pooled until
/// each expected count reaches [`MIN_EXPECTED_PER_BIN`].
fn binomial_chi_square(histogram: &[u64], p: usize, q: f64, trials: u64) -> (f64, usize, f64) {
    if q <= 0.0 || q >= 1.0 {
        // the law is a point mass at 0 or p
        let target = if q <= 0.0 { 0 } else { p };
        let stray = trials - histogram[target];
        return if stray == 0 { (0.0, 0, 1.0) } else { (f64::INFINITY, 0, 0.0) };
    }
    let law = Binomial::new(q, p as u64).expect("q in (0, 1)");
    let n = trials as f64;
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (c, &h) in histogram.iter().enumerate() {
        obs += h as f64;
        exp += n * law.pmf(c as u64);
        if exp >= MIN_EXPECTED_PER_BIN {
            groups.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    match groups.last_mut() {
        Some(last) => {
            last.0 += obs;
            last.1 += exp;
        }
        None => groups.push((obs, exp)),
    }
    let stat: f64 = groups.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = groups.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).expect("dof > 0").cdf(stat)
    };
    (stat, dof, p_value)
}
