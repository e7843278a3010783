//! C ABI over `anticip-core`.
//!
//! Objects are exposed as opaque handles created by `*_new`/`*_run`
//! functions and released with the matching `*_free`. Every fallible call
//! returns an [`AnticipStatus`]; on failure the message is available from
//! [`anticip_last_error`] until the next failing call on the same thread.
//! Absent predictions are reported as NaN.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use anticip_core::sampling::Statistic;
use anticip_core::stats;
use anticip_core::{
    amplitudes_continuous, amplitudes_periodic, closed_form_pn, make_model, probabilities,
    run_monte_carlo, Error, EstimateReport, Geometry, ModelKind, ModelSpec, MomentTuple,
    MonteCarloConfig, ProbabilitySeries, SamplingDistribution, SpectralDifference,
    SpectralDifferenceContinuous, SpectralDifferencePeriodic, TransformMode,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnticipStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidSize = 2,
    OutOfRange = 3,
    InvalidModel = 4,
    InvalidMeasure = 5,
    InvalidDistribution = 6,
    InvalidMoments = 7,
    InvalidConfig = 8,
    InvalidUtf8 = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

impl From<&Error> for AnticipStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::PeriodTooSmall(_) | Error::TooFewCells(_) => AnticipStatus::InvalidSize,
            Error::DifferenceOutOfRange { .. }
            | Error::IndexOutOfRange { .. }
            | Error::EmptyWindow { .. }
            | Error::CutOutOfRange { .. } => AnticipStatus::OutOfRange,
            Error::DegenerateModel(_) | Error::AmplitudeOutOfRange(_) => AnticipStatus::InvalidModel,
            Error::InvalidMeasure(_) | Error::OffLattice { .. } | Error::NonUniformReduction { .. } => {
                AnticipStatus::InvalidMeasure
            }
            Error::InvalidDistribution(_) => AnticipStatus::InvalidDistribution,
            Error::InvalidMoments(_) => AnticipStatus::InvalidMoments,
            Error::InvalidConfig(_) => AnticipStatus::InvalidConfig,
        }
    }
}

/// Extremal model states.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnticipModelKind {
    ConstPeriodic = 0,
    AltPeriodic = 1,
    ConstContinuous = 2,
    AltContinuous = 3,
}

impl From<AnticipModelKind> for ModelKind {
    fn from(k: AnticipModelKind) -> Self {
        match k {
            AnticipModelKind::ConstPeriodic => ModelKind::ConstPeriodic,
            AnticipModelKind::AltPeriodic => ModelKind::AltPeriodic,
            AnticipModelKind::ConstContinuous => ModelKind::ConstContinuous,
            AnticipModelKind::AltContinuous => ModelKind::AltContinuous,
        }
    }
}

/// Raw moments `E(ŷ^r)`, `r = 1..4`, of the sampling law.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AnticipMoments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

/// One Monte Carlo estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AnticipEstimate {
    pub trials: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub variance_std_error: f64,
    pub predicted_mean: f64,
    pub predicted_variance: f64,
    pub z_mean: f64,
    pub z_variance: f64,
}

/// Opaque spectral difference, periodic or continuous.
pub struct AnticipSpectrum(SpectralDifference);

/// Opaque series of anticipation probabilities.
pub struct AnticipProbabilities(ProbabilitySeries);

/// Opaque Monte Carlo report.
pub struct AnticipReport(EstimateReport);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: AnticipStatus, message: String) -> AnticipStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
    status
}

fn guard(f: impl FnOnce() -> Result<(), AnticipStatus>) -> AnticipStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AnticipStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(AnticipStatus::Panic, "internal panic".into()),
    }
}

fn core<T>(r: anticip_core::Result<T>) -> Result<T, AnticipStatus> {
    r.map_err(|e| fail(AnticipStatus::from(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), AnticipStatus> {
    if p.is_null() {
        Err(fail(AnticipStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn slice<'a, T>(data: *const T, len: usize, name: &str) -> Result<&'a [T], AnticipStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(data, name)?;
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), AnticipStatus> {
    non_null(out, "out")?;
    out.write(value);
    Ok(())
}

fn moments(m: AnticipMoments) -> Result<MomentTuple, AnticipStatus> {
    core(MomentTuple::new(m.m1, m.m2, m.m3, m.m4))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Copies the last error message of this thread, NUL-terminated and
/// truncated to `capacity`. Returns the full message length in bytes.
///
/// # Safety
/// `buffer` must be null or point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn anticip_last_error(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buffer.is_null() && capacity > 0 {
            let n = msg.len().min(capacity - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buffer.cast(), n);
            *buffer.add(n) = 0;
        }
        msg.len()
    })
}

/// Periodic spectral difference `ŷ_0..ŷ_{p-1}`, values in `[-1, 1]`.
///
/// # Safety
/// `values` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticip_spectrum_periodic_new(
    values: *const f64,
    len: usize,
    out: *mut *mut AnticipSpectrum,
) -> AnticipStatus {
    guard(|| {
        let v = slice(values, len, "values")?.to_vec();
        let sd = core(SpectralDifferencePeriodic::new(v))?;
        write(out, boxed(AnticipSpectrum(SpectralDifference::Periodic(sd))))
    })
}

/// Piecewise-constant continuous spectral difference on `len` cells.
///
/// # Safety
/// `values` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticip_spectrum_continuous_new(
    values: *const f64,
    len: usize,
    out: *mut *mut AnticipSpectrum,
) -> AnticipStatus {
    guard(|| {
        let v = slice(values, len, "values")?.to_vec();
        let sd = core(SpectralDifferenceContinuous::new(v))?;
        write(out, boxed(AnticipSpectrum(SpectralDifference::Continuous(sd))))
    })
}

/// Spectral difference of an extremal model state of the given size.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticip_spectrum_model_new(
    kind: AnticipModelKind,
    size: usize,
    y: f64,
    out: *mut *mut AnticipSpectrum,
) -> AnticipStatus {
    guard(|| {
        let spec = core(ModelSpec::new(kind.into(), size, y))?;
        let sd = core(make_model(&spec))?;
        write(out, boxed(AnticipSpectrum(sd)))
    })
}

/// Number of periods or cells.
///
/// # Safety
/// `spectrum` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anticip_spectrum_size(spectrum: *const AnticipSpectrum) -> usize {
    match spectrum.as_ref() {
        Some(AnticipSpectrum(SpectralDifference::Periodic(sd))) => sd.values().len(),
        Some(AnticipSpectrum(SpectralDifference::Continuous(sd))) => sd.values().len(),
        None => 0,
    }
}

/// # Safety
/// `spectrum` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anticip_spectrum_free(spectrum: *mut AnticipSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Probabilities `p_n`: `n = 1..p` for a periodic spectrum (the window is
/// ignored), `n_min..=n_max` for a continuous one. `fast` selects the FFT
/// route for periodic spectra.
///
/// # Safety
/// `spectrum` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticip_probabilities_new(
    spectrum: *const AnticipSpectrum,
    n_min: i64,
    n_max: i64,
    fast: bool,
    out: *mut *mut AnticipProbabilities,
) -> AnticipStatus {
    guard(|| {
        non_null(spectrum, "spectrum")?;
        let amps = match &(*spectrum).0 {
            SpectralDifference::Periodic(sd) => {
                let mode = if fast { TransformMode::FastTransform } else { TransformMode::ExactSum };
                amplitudes_periodic(sd, mode)
            }
            SpectralDifference::Continuous(sd) => core(amplitudes_continuous(sd, n_min, n_max))?,
        };
        write(out, boxed(AnticipProbabilities(probabilities(&amps))))
    })
}

/// First index of the series.
///
/// # Safety
/// `probs` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anticip_probabilities_n_min(probs: *const AnticipProbabilities) -> i64 {
    probs.as_ref().map_or(0, |p| p.0.n_min())
}

/// Last index of the series.
///
/// # Safety
/// `probs` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anticip_probabilities_n_max(probs: *const AnticipProbabilities) -> i64 {
    probs.as_ref().map_or(-1, |p| p.0.n_max())
}

/// `p_n` for an index inside the series.
///
/// # Safety
/// `probs` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticip_probabilities_get(
    probs: *const AnticipProbabilities,
    n: i64,
    out: *mut f64,
) -> AnticipStatus {
    guard(|| {
        non_null(probs, "probs")?;
        let series = &(*probs).0;
        let v = series.get(n).ok_or_else(|| {
            fail(
                AnticipStatus::OutOfRange,
                format!("n = {n} outside {}..={}", series.n_min(), series.n_max()),
            )
        })?;
        write(out, v)
    })
}

/// Sum of the series: one period, or the continuous window.
///
/// # Safety
/// `probs` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anticip_probabilities_total(probs: *const AnticipProbabilities) -> f64 {
    probs.as_ref().map_or(f64::NAN, |p| p.0.total())
}

/// Bound on the mass outside a continuous window; NaN for periodic series.
///
/// # Safety
/// `probs` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anticip_probabilities_tail_bound(probs: *const AnticipProbabilities) -> f64 {
    probs.as_ref().and_then(|p| p.0.tail_bound()).unwrap_or(f64::NAN)
}

/// # Safety
/// `probs` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anticip_probabilities_free(probs: *mut AnticipProbabilities) {
    if !probs.is_null() {
        drop(Box::from_raw(probs));
    }
}

/// Closed-form `p_n` of an extremal model state.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticip_model_pn(
    kind: AnticipModelKind,
    size: usize,
    y: f64,
    n: i64,
    out: *mut f64,
) -> AnticipStatus {
    guard(|| {
        let spec = core(ModelSpec::new(kind.into(), size, y))?;
        write(out, core(closed_form_pn(&spec, n))?)
    })
}

/// Which periodic closed-form moment to evaluate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnticipMoment {
    /// `E(p_n)`; `index` is `n`.
    ExpectedPn = 0,
    /// `Var(p_n)`; `index` is `n`.
    VariancePn = 1,
    /// `E(p_N)`; `index` is the cut `N`.
    ExpectedTail = 2,
    /// `Var(p_N)`; `index` is the cut `N`.
    VarianceTail = 3,
    /// `E(p_tot)`; `period` and `index` are ignored.
    ExpectedTotal = 4,
}

/// Closed-form moment under i.i.d. sampling of `ŷ` with the given moments.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticip_periodic_moment(
    which: AnticipMoment,
    period: usize,
    index: i64,
    law: AnticipMoments,
    out: *mut f64,
) -> AnticipStatus {
    guard(|| {
        let m = moments(law)?;
        let cut = || {
            usize::try_from(index).map_err(|_| {
                fail(AnticipStatus::OutOfRange, format!("cut {index} is negative"))
            })
        };
        let value = match which {
            AnticipMoment::ExpectedPn => core(stats::expected_pn(period, index, &m))?,
            AnticipMoment::VariancePn => core(stats::var_pn(period, index, &m))?,
            AnticipMoment::ExpectedTail => core(stats::expected_pN(period, cut()?, &m))?,
            AnticipMoment::VarianceTail => core(stats::var_pN(period, cut()?, &m))?,
            AnticipMoment::ExpectedTotal => stats::expected_ptot(&m),
        };
        write(out, value)
    })
}

/// Monte Carlo run over `trials` i.i.d. spectral differences.
///
/// `distribution` uses the CLI syntax (`uniform`, `two-point:Y`,
/// `table:PATH`). `continuous` selects `size` cells instead of period `size`.
/// `threads = 0` uses all cores; results do not depend on it.
///
/// # Safety
/// `distribution` must be a NUL-terminated string; `n_list` and `cut_list`
/// must point to `n_len` and `cut_len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticip_monte_carlo_run(
    continuous: bool,
    size: usize,
    distribution: *const c_char,
    trials: u64,
    seed: u64,
    n_list: *const i64,
    n_len: usize,
    cut_list: *const usize,
    cut_len: usize,
    threads: usize,
    out: *mut *mut AnticipReport,
) -> AnticipStatus {
    guard(|| {
        non_null(distribution, "distribution")?;
        let spec = CStr::from_ptr(distribution)
            .to_str()
            .map_err(|e| fail(AnticipStatus::InvalidUtf8, e.to_string()))?;
        let law = core(SamplingDistribution::parse(spec))?;
        let geometry = if continuous {
            Geometry::Continuous { cells: size }
        } else {
            Geometry::Periodic { period: size }
        };
        let mut config = MonteCarloConfig::new(geometry, law, trials, seed);
        config.n_list = slice(n_list, n_len, "n_list")?.to_vec();
        config.cut_list = slice(cut_list, cut_len, "cut_list")?.to_vec();
        config.threads = (threads > 0).then_some(threads);
        let report = core(run_monte_carlo(&config))?;
        write(out, boxed(AnticipReport(report)))
    })
}

unsafe fn estimate<'a>(
    report: *const AnticipReport,
    index: usize,
) -> Result<&'a anticip_core::sampling::Estimate, AnticipStatus> {
    let report = report
        .as_ref()
        .ok_or_else(|| fail(AnticipStatus::NullPointer, "report is null".into()))?;
    let estimates = &report.0.estimates;
    estimates.get(index).ok_or_else(|| {
        fail(
            AnticipStatus::OutOfRange,
            format!("estimate {index} out of range 0..{}", estimates.len()),
        )
    })
}

/// Number of estimates in the report.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anticip_report_len(report: *const AnticipReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.estimates.len())
}

/// Estimate at position `index`, in the report's order.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anticip_report_estimate(
    report: *const AnticipReport,
    index: usize,
    out: *mut AnticipEstimate,
) -> AnticipStatus {
    guard(|| {
        let e = estimate(report, index)?;
        write(
            out,
            AnticipEstimate {
                trials: e.trials,
                mean: e.mean,
                variance: e.variance,
                std_error: e.std_error,
                variance_std_error: e.variance_std_error,
                predicted_mean: e.predicted_mean.unwrap_or(f64::NAN),
                predicted_variance: e.predicted_variance.unwrap_or(f64::NAN),
                z_mean: e.z_mean.unwrap_or(f64::NAN),
                z_variance: e.z_variance.unwrap_or(f64::NAN),
            },
        )
    })
}

/// Label of estimate `index` (`p_n[3]`, `p_N[2]`, `p_tot`, ...), copied
/// NUL-terminated into `buffer`.
///
/// # Safety
/// `report` must be a live handle; `buffer` must point to `capacity` bytes.
#[no_mangle]
pub unsafe extern "C" fn anticip_report_label(
    report: *const AnticipReport,
    index: usize,
    buffer: *mut c_char,
    capacity: usize,
) -> AnticipStatus {
    guard(|| {
        non_null(buffer, "buffer")?;
        let e = estimate(report, index)?;
        let label = e.statistic.as_bytes();
        if label.len() >= capacity {
            return Err(fail(
                AnticipStatus::BufferTooSmall,
                format!("label needs {} bytes", label.len() + 1),
            ));
        }
        ptr::copy_nonoverlapping(label.as_ptr(), buffer.cast(), label.len());
        *buffer.add(label.len()) = 0;
        Ok(())
    })
}

/// Position of the `p_tot` estimate, or `SIZE_MAX` when absent.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn anticip_report_total_index(report: *const AnticipReport) -> usize {
    report
        .as_ref()
        .and_then(|r| {
            let label = Statistic::PTot.label();
            r.0.estimates.iter().position(|e| e.statistic == label)
        })
        .unwrap_or(usize::MAX)
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anticip_report_free(report: *mut AnticipReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
