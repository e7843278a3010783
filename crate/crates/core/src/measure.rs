//! Point spectral measures in standard scale (`T/ħ = 1`) and the frequency
//! bounds of orthogonal evolution.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::spectral::spectral_difference_from_measure;

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Finite spectral measure: sorted distinct points with weights summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Sorts the support and merges repeated points.
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidMeasure(format!("non-finite point {p}")));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMeasure(format!("invalid weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        let mut pairs: Vec<(f64, f64)> = points.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        let (points, weights) = merged.into_iter().unzip();
        Ok(Self { points, weights })
    }

    pub fn point_mass(lambda: f64) -> Result<Self> {
        Self::new(vec![lambda], vec![1.0])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The measure translated by `c` on the energy axis.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            points: self.points.iter().map(|x| x + c).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// `⟨|H - λ0|⟩ = Σ w_j |λ_j - λ0|`.
pub fn abs_moment(m: &DiscreteMeasure, lambda0: f64) -> f64 {
    m.points
        .iter()
        .zip(&m.weights)
        .map(|(x, w)| w * (x - lambda0).abs())
        .sum()
}

/// Minimizer of `λ0 ↦ ⟨|H - λ0|⟩` and the minimum value.
///
/// The minimizers form the weighted-median interval; its midpoint is returned.
pub fn median_minimizer(m: &DiscreteMeasure) -> (f64, f64) {
    let mut cumulative = 0.0;
    let mut lambda0 = *m.points.last().expect("nonempty measure");
    for (i, (&x, &w)) in m.points.iter().zip(&m.weights).enumerate() {
        cumulative += w;
        if cumulative >= 0.5 - WEIGHT_TOLERANCE {
            lambda0 = if (cumulative - 0.5).abs() <= WEIGHT_TOLERANCE && i + 1 < m.len() {
                0.5 * (x + m.points[i + 1])
            } else {
                x
            };
            break;
        }
    }
    (lambda0, abs_moment(m, lambda0))
}

/// Fourier transform `Σ w_j exp(-i λ_j t)` of the measure.
pub fn autocorrelation(m: &DiscreteMeasure, t: f64) -> Complex64 {
    m.points
        .iter()
        .zip(&m.weights)
        .map(|(x, w)| Complex64::from_polar(*w, -x * t))
        .sum()
}

/// Grid used for the short-time autocorrelation inequality.
pub const BOUND_GRID_END: f64 = 2.0;
pub const BOUND_GRID_STEP: f64 = 1e-3;

/// Slack of each frequency-bound inequality for one orthogonal measure
/// (step size 1). Nonnegative slack means the inequality holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub period: usize,
    /// Largest `|μ̂(n) - δ_{n mod p}|` over `n = 0..=2p`.
    pub orthogonality_error: f64,
    pub median: f64,
    pub min_abs_moment: f64,
    /// `⟨|H|⟩` about `λ0 = 0`.
    pub abs_moment_origin: f64,
    /// `min_t Re μ̂(t) - (1 - ⟨|H|⟩ t)` over the grid, `λ0 = 0`.
    pub short_time_slack: f64,
    /// Same inequality after shifting the energy origin to the median.
    pub short_time_slack_median: f64,
    /// `T - 1 / min ⟨|H - λ0|⟩` with `T = 1`.
    pub step_slack: f64,
    /// `min ⟨|H - λ0|⟩ - π/2`.
    pub frequency_slack: f64,
}

impl BoundReport {
    pub fn short_time_holds(&self) -> bool {
        self.short_time_slack >= -1e-12 && self.short_time_slack_median >= -1e-12
    }

    pub fn step_holds(&self) -> bool {
        self.step_slack >= -1e-12
    }

    pub fn frequency_holds(&self, tolerance: f64) -> bool {
        self.frequency_slack >= -tolerance
    }
}

/// Evaluates the short-time, step-size and frequency bounds.
///
/// The measure must describe an orthogonal evolution of period `p` with unit
/// step: its reduction mod 2π is uniform on `{2πk/p}`.
pub fn check_bounds(m: &DiscreteMeasure, p: usize) -> Result<BoundReport> {
    spectral_difference_from_measure(m, p)?;
    let orthogonality_error = (0..=2 * p)
        .map(|n| {
            let target = if n % p == 0 { 1.0 } else { 0.0 };
            (autocorrelation(m, n as f64) - target).norm()
        })
        .fold(0.0, f64::max);
    let (median, min_abs_moment) = median_minimizer(m);
    let abs_moment_origin = abs_moment(m, 0.0);
    let steps = (BOUND_GRID_END / BOUND_GRID_STEP).round() as usize;
    let mut short_time_slack = f64::INFINITY;
    let mut short_time_slack_median = f64::INFINITY;
    for i in 0..=steps {
        let t = i as f64 * BOUND_GRID_STEP;
        let a = autocorrelation(m, t);
        short_time_slack = short_time_slack.min(a.re - (1.0 - abs_moment_origin * t));
        let shifted = a * Complex64::from_polar(1.0, median * t);
        short_time_slack_median =
            short_time_slack_median.min(shifted.re - (1.0 - min_abs_moment * t));
    }
    Ok(BoundReport {
        period: p,
        orthogonality_error,
        median,
        min_abs_moment,
        abs_moment_origin,
        short_time_slack,
        short_time_slack_median,
        step_slack: 1.0 - 1.0 / min_abs_moment,
        frequency_slack: min_abs_moment - PI / 2.0,
    })
}

/// Distribution of κ-cut profiles: nonnegative weights over integer shifts,
/// summing to 1, drawn per residue class.
pub trait ShiftLaw {
    fn draw(&self, class: usize, rng: &mut StreamRng) -> Vec<(i64, f64)>;
}

/// All mass of every class at one shift.
#[derive(Debug, Clone, Copy)]
pub struct SingleShift(pub i64);

impl ShiftLaw for SingleShift {
    fn draw(&self, _class: usize, _rng: &mut StreamRng) -> Vec<(i64, f64)> {
        vec![(self.0, 1.0)]
    }
}

/// Fixed profile per class, cycled if there are fewer profiles than classes.
#[derive(Debug, Clone)]
pub struct FixedProfiles(pub Vec<Vec<(i64, f64)>>);

impl ShiftLaw for FixedProfiles {
    fn draw(&self, class: usize, _rng: &mut StreamRng) -> Vec<(i64, f64)> {
        self.0[class % self.0.len()].clone()
    }
}

/// Random support inside `[-radius, radius]` (each shift kept with
/// probability ½, at least one) carrying flat-Dirichlet weights.
#[derive(Debug, Clone, Copy)]
pub struct RandomProfile {
    pub radius: i64,
}

impl ShiftLaw for RandomProfile {
    fn draw(&self, _class: usize, rng: &mut StreamRng) -> Vec<(i64, f64)> {
        let mut support: Vec<i64> = (-self.radius..=self.radius)
            .filter(|_| rng.next_u64() & 1 == 1)
            .collect();
        if support.is_empty() {
            let width = (2 * self.radius + 1) as u64;
            support.push(rng.below(width) as i64 - self.radius);
        }
        let raw: Vec<f64> = support.iter().map(|_| -rng.next_f64_open().ln()).collect();
        let total: f64 = raw.iter().sum();
        support
            .into_iter()
            .zip(raw)
            .map(|(n, w)| (n, w / total))
            .collect()
    }
}

/// Builds a measure whose reduction mod 2π is exactly uniform on `{2πk/p}`:
/// class `k` places weight `c_k(n)/p` at `λ = 2π(n + k/p)`.
pub fn build_orthogonal_measure(
    p: usize,
    law: &dyn ShiftLaw,
    rng: &mut StreamRng,
) -> Result<DiscreteMeasure> {
    if p < 2 {
        return Err(Error::PeriodTooSmall(p));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for k in 0..p {
        let profile = law.draw(k, rng);
        let total: f64 = profile.iter().map(|(_, w)| w).sum();
        if profile.is_empty() || (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidMeasure(format!(
                "shift profile of class {k} sums to {total}"
            )));
        }
        for (n, w) in profile {
            points.push(2.0 * PI * (n as f64 + k as f64 / p as f64));
            weights.push(w / p as f64);
        }
    }
    DiscreteMeasure::new(points, weights)
}
