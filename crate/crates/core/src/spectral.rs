//! Spectral-difference representations and the anticipation observables
//! derived from them: amplitudes, probabilities, tail sums and the `ñ^r`
//! moment.
//!
//! Spectral differences are stored normalized to `[-1, 1]`: `ŷ_k = p·y_k` in
//! the periodic case and `ŷ_j = 2π·y_κ` on cell `j` in the continuous case.
//! With this scaling the amplitude of step `n` reads
//!
//! ```text
//! periodic:    α_n = p⁻¹ Σ_k ŷ_k exp(-2πi (n - ½) k / p)
//! continuous:  α_n = ∫ ŷ(κ) exp(-i (n - ½) κ) dκ / 2π
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::transform::{half_integer_direct, HalfIntegerTransform, PhaseTable};

/// Values outside `[-1, 1]` by no more than this are accepted and clamped.
/// Reductions of floating-point measures land a few ulps outside.
const RANGE_SLACK: f64 = 1e-12;

/// Target mass for the analytic tail bound used to pick a default window.
pub const DEFAULT_TAIL_TARGET: f64 = 1e-6;

/// Period of an orthogonal evolution: finite `p` or the continuous case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Period {
    Finite(usize),
    Infinite,
}

fn check_unit_range(values: &mut [f64]) -> Result<()> {
    for (index, v) in values.iter_mut().enumerate() {
        if !v.is_finite() || v.abs() > 1.0 + RANGE_SLACK {
            return Err(Error::DifferenceOutOfRange { index, value: *v });
        }
        *v = v.clamp(-1.0, 1.0);
    }
    Ok(())
}

/// Normalized spectral difference `ŷ_k = p·y_k` of a period-`p` evolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDifferencePeriodic {
    values: Vec<f64>,
}

impl SpectralDifferencePeriodic {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::PeriodTooSmall(values.len()));
        }
        check_unit_range(&mut values)?;
        Ok(Self { values })
    }

    pub fn period(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Even-shift and odd-shift masses `(x_{k,0}, x_{k,1})` of residue class `k`.
    pub fn class_masses(&self, k: usize) -> (f64, f64) {
        let p = self.period() as f64;
        let y = self.values[k];
        ((1.0 + y) / (2.0 * p), (1.0 - y) / (2.0 * p))
    }
}

/// Piecewise-constant normalized spectral difference on `M` equal cells of
/// `[0, 2π)`; cell `j` covers `[2πj/M, 2π(j+1)/M)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralDifferenceContinuous {
    values: Vec<f64>,
}

impl SpectralDifferenceContinuous {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewCells(values.len()));
        }
        check_unit_range(&mut values)?;
        Ok(Self { values })
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `sin²(π(r - ½)/M) |H_r|²` per residue `r`, so that
    /// `p_n = coefficient[n mod M] / (π² (n - ½)²)`.
    fn decay_coefficients(&self) -> Vec<f64> {
        let m = self.cells();
        let mut plan = HalfIntegerTransform::new(m);
        let spectrum = plan.apply(&self.values);
        spectrum
            .iter()
            .enumerate()
            .map(|(r, h)| {
                let s = (PI * (r as f64 - 0.5) / m as f64).sin();
                h.norm_sqr() * s * s
            })
            .collect()
    }

    /// Largest value of `p_n · π² (n - ½)²` over all `n`.
    ///
    /// Every anticipation probability obeys `p_n <= A / (π² (n - ½)²)` with
    /// this constant `A`; for a constant difference `y` it equals `y²`.
    pub fn decay_constant(&self) -> f64 {
        self.decay_coefficients().into_iter().fold(0.0, f64::max)
    }

    /// Analytic bound on the probability mass outside `[n_min, n_max]`.
    ///
    /// The smaller of two bounds on each side, with `a` the first `|n - ½|`
    /// outside the window: `A / (π² (a - 1))` from the envelope alone, and
    /// `C (1/a² + 1/(M a)) / π²` with `C` the sum of the coefficients, from
    /// summing each residue class separately. Infinite when the window does
    /// not straddle `n = ½`.
    pub fn tail_bound(&self, n_min: i64, n_max: i64) -> f64 {
        if n_max < 1 || n_min > 0 {
            return f64::INFINITY;
        }
        let coefficients = self.decay_coefficients();
        let peak = coefficients.iter().copied().fold(0.0, f64::max);
        let sum: f64 = coefficients.iter().sum();
        let m = self.cells() as f64;
        let side = |a: f64| {
            let envelope = peak / (a - 1.0);
            let classes = sum * (1.0 / (a * a) + 1.0 / (m * a));
            envelope.min(classes) / (PI * PI)
        };
        side(n_max as f64 + 0.5) + side(1.5 - n_min as f64)
    }

    /// Smallest `K` such that the symmetric window `[1 - K, K]` has an
    /// analytic tail bound below `target`.
    pub fn default_window(&self, target: f64) -> i64 {
        let fits = |k: i64| self.tail_bound(1 - k, k) <= target;
        let mut hi = 1i64;
        while !fits(hi) {
            hi *= 2;
        }
        let mut lo = hi / 2;
        // fits(lo) is false unless lo == 0
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if fits(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Total anticipation probability over all `n ∈ ℤ`.
    ///
    /// Uses the closed-form sum of `(n - ½)⁻²` over each residue class mod
    /// `M`, so no truncation is involved.
    pub fn total_probability(&self) -> f64 {
        let m = self.cells();
        let mut plan = HalfIntegerTransform::new(m);
        plan.apply(&self.values)
            .iter()
            .map(|h| h.norm_sqr())
            .sum::<f64>()
            / (m * m) as f64
    }
}

/// How the periodic amplitudes are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransformMode {
    /// Direct `O(p²)` summation.
    ExactSum,
    /// Phase premultiplication followed by an FFT.
    #[default]
    FastTransform,
}

/// Where a series came from; fixes the symmetry and tail conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Origin {
    Periodic { period: usize },
    Continuous { cells: usize },
}

impl Origin {
    pub fn period(&self) -> Period {
        match self {
            Origin::Periodic { period } => Period::Finite(*period),
            Origin::Continuous { .. } => Period::Infinite,
        }
    }
}

/// Anticipation amplitudes `α_n` over a contiguous index window.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries {
    origin: Origin,
    n_min: i64,
    amplitudes: Vec<Complex64>,
    tail_bound: Option<f64>,
}

impl AmplitudeSeries {
    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.amplitudes.len() as i64 - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn get(&self, n: i64) -> Option<Complex64> {
        let offset = n.checked_sub(self.n_min)?;
        usize::try_from(offset)
            .ok()
            .and_then(|i| self.amplitudes.get(i).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .map(move |(i, a)| (self.n_min + i as i64, *a))
    }

    /// Analytic bound on the mass outside the window (continuous only).
    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }
}

/// Anticipation probabilities `p_n = |α_n|²` and their window sum `p_tot`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilitySeries {
    origin: Origin,
    n_min: i64,
    probabilities: Vec<f64>,
    total: f64,
    tail_bound: Option<f64>,
}

impl ProbabilitySeries {
    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_min + self.probabilities.len() as i64 - 1
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `p_tot`: sum over one period, or over the truncation window.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }

    pub fn get(&self, n: i64) -> Option<f64> {
        let offset = n.checked_sub(self.n_min)?;
        usize::try_from(offset)
            .ok()
            .and_then(|i| self.probabilities.get(i).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(i, p)| (self.n_min + i as i64, *p))
    }
}

/// Amplitudes `α_1..α_p` of a periodic spectral difference.
pub fn amplitudes_periodic(sd: &SpectralDifferencePeriodic, mode: TransformMode) -> AmplitudeSeries {
    let p = sd.period();
    let scale = 1.0 / p as f64;
    let amplitudes: Vec<Complex64> = match mode {
        TransformMode::ExactSum => {
            let phases = PhaseTable::new(p);
            (1..=p as i64)
                .map(|n| half_integer_direct(sd.values(), &phases, n) * scale)
                .collect()
        }
        TransformMode::FastTransform => {
            let mut plan = HalfIntegerTransform::new(p);
            let spectrum = plan.apply(sd.values());
            (1..=p).map(|n| spectrum[n % p] * scale).collect()
        }
    };
    AmplitudeSeries {
        origin: Origin::Periodic { period: p },
        n_min: 1,
        amplitudes,
        tail_bound: None,
    }
}

/// Amplitudes `α_n`, `n_min <= n <= n_max`, of a piecewise-constant
/// continuous spectral difference, integrated exactly cell by cell.
///
/// Cell `j` contributes `ŷ_j · exp(-iω(2j+1)π/M) · sin(ωπ/M) / (πω)` with
/// `ω = n - ½`; the phase is reduced in integer arithmetic.
pub fn amplitudes_continuous(
    sd: &SpectralDifferenceContinuous,
    n_min: i64,
    n_max: i64,
) -> Result<AmplitudeSeries> {
    amplitudes_continuous_with(sd, n_min, n_max, TransformMode::ExactSum)
}

/// As [`amplitudes_continuous`], choosing between per-`n` cell summation and
/// a single length-`M` transform reused across residues.
pub fn amplitudes_continuous_with(
    sd: &SpectralDifferenceContinuous,
    n_min: i64,
    n_max: i64,
    mode: TransformMode,
) -> Result<AmplitudeSeries> {
    if n_min > n_max {
        return Err(Error::EmptyWindow { n_min, n_max });
    }
    let m = sd.cells();
    let mi = m as i64;
    let envelope = |n: i64| {
        let omega = n as f64 - 0.5;
        (PI * omega / m as f64).sin() / (PI * omega)
    };
    let amplitudes: Vec<Complex64> = match mode {
        TransformMode::ExactSum => {
            // exp(-i π m' / 2M) with m' = (2n - 1)(2j + 1) mod 4M
            let phases = PhaseTable::new(2 * m);
            (n_min..=n_max)
                .map(|n| {
                    let a = (2 * n - 1).rem_euclid(4 * mi);
                    let sum: Complex64 = sd
                        .values()
                        .iter()
                        .enumerate()
                        .map(|(j, &y)| phases.get(a * (2 * j as i64 + 1) % (4 * mi)) * y)
                        .sum();
                    sum * envelope(n)
                })
                .collect()
        }
        TransformMode::FastTransform => {
            let mut plan = HalfIntegerTransform::new(m);
            let spectrum = plan.apply(sd.values()).to_vec();
            (n_min..=n_max)
                .map(|n| {
                    let omega = n as f64 - 0.5;
                    let shift = Complex64::from_polar(1.0, -PI * omega / m as f64);
                    spectrum[n.rem_euclid(mi) as usize] * shift * envelope(n)
                })
                .collect()
        }
    };
    Ok(AmplitudeSeries {
        origin: Origin::Continuous { cells: m },
        n_min,
        amplitudes,
        tail_bound: Some(sd.tail_bound(n_min, n_max)),
    })
}

/// `p_n = |α_n|²` for every index of the series.
pub fn probabilities(amps: &AmplitudeSeries) -> ProbabilitySeries {
    let probabilities: Vec<f64> = amps.amplitudes.iter().map(|a| a.norm_sqr()).collect();
    let total = probabilities.iter().sum();
    ProbabilitySeries {
        origin: amps.origin,
        n_min: amps.n_min,
        probabilities,
        total,
        tail_bound: amps.tail_bound,
    }
}

/// Whether `n` lies in the tail beyond cut `N`.
///
/// Periodic: `N < n < p + 1 - N` within one period `1..=p`.
/// Continuous: `n > N` or `n < 1 - N`, the mirror image under `n ↦ 1 - n`.
pub fn in_tail(origin: Origin, n: i64, cut: usize) -> bool {
    let cut = cut as i64;
    match origin {
        Origin::Periodic { period } => {
            let r = (n - 1).rem_euclid(period as i64) + 1;
            r > cut && r < period as i64 + 1 - cut
        }
        Origin::Continuous { .. } => n > cut || n < 1 - cut,
    }
}

/// Cumulative tail probability `p_N`.
///
/// Periodic series sum `p_n` over `N + 1 <= n <= p - N` and require
/// `N < p/2`; continuous series sum over `n > N` and `n < 1 - N` inside the
/// truncation window. `p_0` equals `p_tot`.
pub fn cumulative_probability(probs: &ProbabilitySeries, cut: usize) -> Result<f64> {
    if let Origin::Periodic { period } = probs.origin {
        if 2 * cut >= period {
            return Err(Error::CutOutOfRange { n: cut, period });
        }
    }
    Ok(probs
        .iter()
        .filter(|&(n, _)| in_tail(probs.origin, n, cut))
        .map(|(_, p)| p)
        .sum())
}

/// Folded distance `ñ` of step `n` within a period.
pub fn tilde_index(n: i64, period: Period) -> u64 {
    let a = n.unsigned_abs();
    match period {
        Period::Finite(p) => {
            let p = p as u64;
            let r = a % p;
            if 2 * r <= p + 1 {
                r
            } else {
                p + 1 - r
            }
        }
        Period::Infinite => a,
    }
}

/// Expectation `⟨ñ^r⟩ = Σ ñ^r p_n` over the series window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentObservable {
    pub value: f64,
    /// Set when the partial sums of a continuous series show no sign of
    /// converging: the outer half of the window contributes at least as much
    /// as the quarter inside it.
    pub diverging: bool,
}

/// Outer-to-inner contribution ratio above which partial sums are flagged.
const DIVERGENCE_RATIO: f64 = 0.95;

pub fn moment_observable(probs: &ProbabilitySeries, r: f64) -> MomentObservable {
    assert!(r >= 0.0 && r.is_finite(), "moment order must be a nonnegative real");
    let period = probs.origin.period();
    let weight = |n: i64| (tilde_index(n, period) as f64).powf(r);
    let value: f64 = probs.iter().map(|(n, p)| weight(n) * p).sum();
    let diverging = match probs.origin {
        Origin::Periodic { .. } => false,
        Origin::Continuous { .. } => {
            // radius measured in |n - ½|
            let radius = (probs.n_max() as f64 - 0.5).min(0.5 - probs.n_min() as f64);
            if radius < 8.0 {
                false
            } else {
                let band = |lo: f64, hi: f64| -> f64 {
                    probs
                        .iter()
                        .filter(|&(n, _)| {
                            let w = (n as f64 - 0.5).abs();
                            w > lo && w <= hi
                        })
                        .map(|(n, p)| weight(n) * p)
                        .sum()
                };
                let inner = band(radius / 4.0, radius / 2.0);
                let outer = band(radius / 2.0, radius);
                outer > 1e-15 && outer >= DIVERGENCE_RATIO * inner
            }
        }
    };
    MomentObservable { value, diverging }
}

/// Tolerance for the uniform-reduction precondition and lattice matching.
pub const REDUCTION_TOLERANCE: f64 = 1e-9;

/// Reads the periodic spectral difference off a point measure.
///
/// Each support point `λ = 2π(s + k/p) (mod 4π)` is assigned to residue class
/// `k` and shift parity `s`; then `ŷ_k = p·(x_{k,0} - x_{k,1})`. Fails unless
/// every class carries mass `1/p`.
pub fn spectral_difference_from_measure(
    m: &DiscreteMeasure,
    p: usize,
) -> Result<SpectralDifferencePeriodic> {
    if p < 2 {
        return Err(Error::PeriodTooSmall(p));
    }
    let mut even = vec![0.0; p];
    let mut odd = vec![0.0; p];
    let step = 2.0 * PI / p as f64;
    for (&lambda, &w) in m.points().iter().zip(m.weights()) {
        let folded = lambda.rem_euclid(4.0 * PI);
        let steps = folded / step;
        let nearest = steps.round();
        if (steps - nearest).abs() * step > REDUCTION_TOLERANCE * lambda.abs().max(1.0) {
            return Err(Error::OffLattice { point: lambda, period: p });
        }
        let idx = (nearest as usize) % (2 * p);
        if idx < p {
            even[idx] += w;
        } else {
            odd[idx - p] += w;
        }
    }
    let expected = 1.0 / p as f64;
    let worst = (0..p)
        .map(|k| (k, even[k] + odd[k]))
        .max_by(|a, b| (a.1 - expected).abs().total_cmp(&(b.1 - expected).abs()))
        .expect("p >= 2");
    if (worst.1 - expected).abs() > REDUCTION_TOLERANCE {
        return Err(Error::NonUniformReduction {
            residue: worst.0,
            mass: worst.1,
            expected,
        });
    }
    let values = even
        .iter()
        .zip(&odd)
        .map(|(e, o)| p as f64 * (e - o))
        .collect();
    SpectralDifferencePeriodic::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rejects_short_or_out_of_range() {
        assert_eq!(
            SpectralDifferencePeriodic::new(vec![0.5]),
            Err(Error::PeriodTooSmall(1))
        );
        assert!(matches!(
            SpectralDifferencePeriodic::new(vec![0.5, 1.5]),
            Err(Error::DifferenceOutOfRange { index: 1, .. })
        ));
        assert!(SpectralDifferenceContinuous::new(vec![f64::NAN, 0.0]).is_err());
        assert_eq!(
            SpectralDifferenceContinuous::new(vec![1.0]),
            Err(Error::TooFewCells(1))
        );
    }

    #[test]
    fn p2_constant_amplitude_at_zero() {
        let sd = SpectralDifferencePeriodic::new(vec![1.0, 1.0]).unwrap();
        let amps = amplitudes_periodic(&sd, TransformMode::ExactSum);
        // α_0 = α_2 by periodicity
        let a0 = amps.get(2).unwrap();
        assert!((a0 - Complex64::new(0.5, 0.5)).norm() < 1e-15);
        assert!(close(probabilities(&amps).get(2).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn p4_constant_probabilities() {
        let sd = SpectralDifferencePeriodic::new(vec![1.0; 4]).unwrap();
        let probs = probabilities(&amplitudes_periodic(&sd, TransformMode::FastTransform));
        let expected = [0.4267766952966369, 0.07322330470336313, 0.07322330470336313, 0.4267766952966369];
        for (got, want) in probs.probabilities().iter().zip(expected) {
            assert!(close(*got, want, 1e-12), "{got} vs {want}");
        }
        assert!(close(probs.total(), 1.0, 1e-14));
        assert!(close(cumulative_probability(&probs, 0).unwrap(), 1.0, 1e-14));
        assert!(close(
            cumulative_probability(&probs, 1).unwrap(),
            0.14644660940672627,
            1e-12
        ));
        assert_eq!(
            cumulative_probability(&probs, 2),
            Err(Error::CutOutOfRange { n: 2, period: 4 })
        );
    }

    #[test]
    fn zero_difference_has_zero_amplitudes() {
        let sd = SpectralDifferencePeriodic::new(vec![0.0; 9]).unwrap();
        for mode in [TransformMode::ExactSum, TransformMode::FastTransform] {
            assert!(amplitudes_periodic(&sd, mode).amplitudes().iter().all(|a| a.norm() == 0.0));
        }
    }

    #[test]
    fn continuous_constant_examples() {
        let sd = SpectralDifferenceContinuous::new(vec![1.0, 1.0]).unwrap();
        let amps = amplitudes_continuous(&sd, 1, 2).unwrap();
        assert!((amps.get(1).unwrap() - Complex64::new(0.0, -2.0 / PI)).norm() < 1e-15);
        let probs = probabilities(&amps);
        assert!(close(probs.get(1).unwrap(), 4.0 / (PI * PI), 1e-15));
        assert!(close(probs.get(2).unwrap(), 1.0 / (PI * PI * 2.25), 1e-15));
    }

    #[test]
    fn continuous_alternating_example() {
        let sd = SpectralDifferenceContinuous::new(vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let probs = probabilities(&amplitudes_continuous(&sd, 2, 2).unwrap());
        let want = ((3.0 * PI / 8.0).tan() / (1.5 * PI)).powi(2);
        assert!(close(probs.get(2).unwrap(), want, 1e-14));
        assert!(close(want, 0.2624636, 1e-7));
    }

    #[test]
    fn continuous_modes_agree() {
        let values: Vec<f64> = (0..12).map(|j| ((j * 37 % 11) as f64 / 5.5) - 1.0).collect();
        let sd = SpectralDifferenceContinuous::new(values).unwrap();
        let a = amplitudes_continuous_with(&sd, -40, 40, TransformMode::ExactSum).unwrap();
        let b = amplitudes_continuous_with(&sd, -40, 40, TransformMode::FastTransform).unwrap();
        for ((_, x), (_, y)) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn tail_bound_matches_constant_model_rule() {
        let sd = SpectralDifferenceContinuous::new(vec![0.5; 8]).unwrap();
        assert!(close(sd.decay_constant(), 0.25, 1e-14));
        let k = 1000;
        let expected = 0.25 * 2.0 / (PI * PI * (k as f64 - 0.5));
        assert!(close(sd.tail_bound(1 - k, k), expected, 1e-15));
        let kd = sd.default_window(DEFAULT_TAIL_TARGET);
        assert!(sd.tail_bound(1 - kd, kd) < DEFAULT_TAIL_TARGET);
        assert!(sd.tail_bound(2 - kd, kd - 1) >= DEFAULT_TAIL_TARGET);
        assert_eq!(sd.tail_bound(1, 10), f64::INFINITY);
    }

    #[test]
    fn empty_window_is_an_error() {
        let sd = SpectralDifferenceContinuous::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(
            amplitudes_continuous(&sd, 3, 2).unwrap_err(),
            Error::EmptyWindow { n_min: 3, n_max: 2 }
        );
    }

    #[test]
    fn tilde_examples() {
        assert_eq!(tilde_index(5, Period::Finite(8)), 4);
        assert_eq!(tilde_index(3, Period::Finite(8)), 3);
        assert_eq!(tilde_index(8, Period::Finite(8)), 0);
        assert_eq!(tilde_index(-7, Period::Infinite), 7);
        assert_eq!(tilde_index(4, Period::Finite(7)), 4);
        assert_eq!(tilde_index(5, Period::Finite(7)), 3);
    }

    #[test]
    fn zeroth_moment_is_total() {
        let sd = SpectralDifferencePeriodic::new(vec![0.3, -0.7, 0.1, 0.9, -0.2]).unwrap();
        let probs = probabilities(&amplitudes_periodic(&sd, TransformMode::ExactSum));
        let m0 = moment_observable(&probs, 0.0);
        assert!(close(m0.value, probs.total(), 1e-15));
        assert!(!m0.diverging);
    }

    #[test]
    fn continuous_constant_first_moment_diverges() {
        let sd = SpectralDifferenceContinuous::new(vec![1.0; 4]).unwrap();
        let mut previous = 0.0;
        for k in [64, 256, 1024] {
            let probs = probabilities(
                &amplitudes_continuous_with(&sd, 1 - k, k, TransformMode::FastTransform).unwrap(),
            );
            let m1 = moment_observable(&probs, 1.0);
            assert!(m1.diverging, "K = {k}");
            assert!(m1.value > previous + 0.1);
            previous = m1.value;
            assert!(!moment_observable(&probs, 0.0).diverging);
        }
    }

    #[test]
    fn continuous_cut_zero_is_total() {
        let sd = SpectralDifferenceContinuous::new(vec![0.2, -0.4, 0.9, 0.1]).unwrap();
        let probs = probabilities(&amplitudes_continuous(&sd, -30, 31).unwrap());
        assert!(close(cumulative_probability(&probs, 0).unwrap(), probs.total(), 1e-15));
        let p3 = cumulative_probability(&probs, 3).unwrap();
        let excluded: f64 = (-2..=3).map(|n| probs.get(n).unwrap()).sum();
        assert!(close(p3 + excluded, probs.total(), 1e-14));
    }

    #[test]
    fn measure_reduction_examples() {
        let m = DiscreteMeasure::new(vec![0.0, PI], vec![0.5, 0.5]).unwrap();
        assert_eq!(spectral_difference_from_measure(&m, 2).unwrap().values(), &[1.0, 1.0]);

        let m = DiscreteMeasure::new(vec![0.0, 2.0 * PI, PI], vec![0.25, 0.25, 0.5]).unwrap();
        assert_eq!(spectral_difference_from_measure(&m, 2).unwrap().values(), &[0.0, 1.0]);

        let m = DiscreteMeasure::new(vec![0.0, 3.0 * PI], vec![0.5, 0.5]).unwrap();
        assert_eq!(spectral_difference_from_measure(&m, 2).unwrap().values(), &[1.0, -1.0]);

        // negative shifts keep their parity
        let m = DiscreteMeasure::new(vec![-2.0 * PI, PI], vec![0.5, 0.5]).unwrap();
        assert_eq!(spectral_difference_from_measure(&m, 2).unwrap().values(), &[-1.0, 1.0]);
    }

    #[test]
    fn measure_reduction_errors() {
        let m = DiscreteMeasure::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            spectral_difference_from_measure(&m, 2),
            Err(Error::OffLattice { .. })
        ));
        let m = DiscreteMeasure::new(vec![0.0, PI], vec![0.75, 0.25]).unwrap();
        match spectral_difference_from_measure(&m, 2) {
            Err(Error::NonUniformReduction { residue, mass, .. }) => {
                assert!(residue == 0 || residue == 1);
                assert!((mass - 0.75).abs() < 1e-15 || (mass - 0.25).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
