//! Half-integer frequency discrete Fourier transform.
//!
//! Computes `H[m] = sum_k x[k] * exp(-2 pi i (m - 1/2) k / L)` for `m = 0..L`.
//! Because the kernel is `L`-periodic in `m`, `H[m]` is the value for every
//! index `n` with `n ≡ m (mod L)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Reusable plan for one transform length.
///
/// Premultiplies the input by the half-step phase `exp(i pi k / L)` and runs a
/// standard forward FFT of length `L`.
pub struct HalfIntegerTransform {
    len: usize,
    fft: Arc<dyn Fft<f64>>,
    phase: Vec<Complex64>,
    buffer: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl HalfIntegerTransform {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let fft = FftPlanner::new().plan_fft_forward(len);
        let phase = (0..len)
            .map(|k| Complex64::from_polar(1.0, PI * k as f64 / len as f64))
            .collect();
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        Self {
            len,
            fft,
            phase,
            buffer: vec![Complex64::new(0.0, 0.0); len],
            scratch,
        }
    }

    /// Transforms `input` and returns the residue-indexed spectrum.
    ///
    /// The returned slice is owned by the plan and overwritten on the next call.
    pub fn apply(&mut self, input: &[f64]) -> &[Complex64] {
        assert_eq!(input.len(), self.len, "input length does not match plan");
        for ((b, &x), &w) in self.buffer.iter_mut().zip(input).zip(&self.phase) {
            *b = w * x;
        }
        self.fft
            .process_with_scratch(&mut self.buffer, &mut self.scratch);
        &self.buffer
    }
}

/// Table of `exp(-i pi m / len)` for `m = 0..2 len`.
///
/// Phases of the form `pi * integer / len` are reduced exactly in integer
/// arithmetic before lookup, so large indices lose no accuracy.
pub(crate) struct PhaseTable {
    len: i64,
    table: Vec<Complex64>,
}

impl PhaseTable {
    pub(crate) fn new(len: usize) -> Self {
        let table = (0..2 * len)
            .map(|m| Complex64::from_polar(1.0, -PI * m as f64 / len as f64))
            .collect();
        Self {
            len: len as i64,
            table,
        }
    }

    /// `exp(-i pi m / len)` for any integer `m`.
    pub(crate) fn get(&self, m: i64) -> Complex64 {
        self.table[m.rem_euclid(2 * self.len) as usize]
    }
}

/// Direct `O(L^2)` evaluation of the half-integer transform, one residue.
pub(crate) fn half_integer_direct(input: &[f64], phases: &PhaseTable, n: i64) -> Complex64 {
    let two_n_minus_one = 2 * n - 1;
    input
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let m = (two_n_minus_one.rem_euclid(2 * phases.len) * k as i64) % (2 * phases.len);
            phases.get(m) * x
        })
        .sum()
}
