//! Closed-form means and variances of the anticipation statistics under
//! i.i.d. sampling of the normalized spectral difference.
//!
//! The periodic formulas are written in the kernels
//!
//! ```text
//! S_n = p⁻¹ Σ_k exp(-2πi(n-½)k/p)      T = p⁻¹ [2n-1 ≡ 0 mod p]
//! U_N = Σ_{N<n<p+1-N} |S_n|²             π_N = 1 - 2N/p
//! ```
//!
//! and the raw moments `m_1..m_4` of the sampling law. They are kept in the
//! polynomial form in which they were derived (collected by moment monomial)
//! rather than simplified, so each coefficient can be checked term by term.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{tilde_index, Period};

/// Raw moments `m_k = E(ŷ^k)`, `k = 1..4`, of the sampling law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentTuple {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

const MOMENT_TOLERANCE: f64 = 1e-12;

impl MomentTuple {
    pub fn new(m1: f64, m2: f64, m3: f64, m4: f64) -> Result<Self> {
        let m = Self { m1, m2, m3, m4 };
        if [m1, m2, m3, m4].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMoments(format!("non-finite moment in {m:?}")));
        }
        if m2 < m1 * m1 - MOMENT_TOLERANCE {
            return Err(Error::InvalidMoments(format!("m2 = {m2} < m1² = {}", m1 * m1)));
        }
        if m4 < m2 * m2 - MOMENT_TOLERANCE {
            return Err(Error::InvalidMoments(format!("m4 = {m4} < m2² = {}", m2 * m2)));
        }
        Ok(m)
    }

    /// Moments of the point mass at `y`.
    pub fn point_mass(y: f64) -> Self {
        Self {
            m1: y,
            m2: y * y,
            m3: y * y * y,
            m4: y * y * y * y,
        }
    }

    /// `σ² = m_2 - m_1²`.
    pub fn variance(&self) -> f64 {
        (self.m2 - self.m1 * self.m1).max(0.0)
    }

    /// `m_k = m_1^k` for `k = 2, 3, 4`: the law is a point mass.
    pub fn is_degenerate(&self) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= MOMENT_TOLERANCE * b.abs().max(1.0);
        let m1 = self.m1;
        close(self.m2, m1 * m1) && close(self.m3, m1 * m1 * m1) && close(self.m4, m1 * m1 * m1 * m1)
    }
}

/// Kernel values entering the periodic formulas for one `(p, n, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValues {
    /// `S_n`.
    #[serde(skip)]
    pub s: Complex64,
    /// `|S_n|²`.
    pub s_sq: f64,
    /// `T_n = p⁻¹ [n ≡ 0 mod p]`.
    pub t_n: f64,
    /// `T = |T_{2n-1}|`, the value used in the `p_n` variance.
    pub t: f64,
    pub u_cut: f64,
    pub pi_cut: f64,
    /// `π'_n = 1 - n/p`.
    pub pi_prime: f64,
}

/// `S_n = -i exp(iπ(n-½)/p) / (p sin(π(n-½)/p))`.
pub fn kernel_s(p: usize, n: i64) -> Complex64 {
    let phi = PI * (n as f64 - 0.5) / p as f64;
    Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, phi) / (p as f64 * phi.sin())
}

/// `|S_n|²`, with the index `2n - 1 ≡ 0 (mod p)` (odd `p`) handled exactly.
pub fn kernel_s_sq(p: usize, n: i64) -> f64 {
    let pf = p as f64;
    if (2 * n - 1).rem_euclid(p as i64) == 0 {
        return 1.0 / (pf * pf);
    }
    let s = (PI * (n as f64 - 0.5) / pf).sin();
    1.0 / (pf * pf * s * s)
}

/// `T_n = p⁻¹` if `n ≡ 0 (mod p)`, else 0.
pub fn kernel_t(p: usize, n: i64) -> f64 {
    if n.rem_euclid(p as i64) == 0 {
        1.0 / p as f64
    } else {
        0.0
    }
}

/// `U_N = Σ |S_n|²` over `N < n < p + 1 - N`.
pub fn window_u(p: usize, cut: usize) -> f64 {
    (cut as i64 + 1..=(p - cut) as i64)
        .map(|n| kernel_s_sq(p, n))
        .sum()
}

/// `π_N = 1 - 2N/p`; for `N < p/2` the tilde of `N` is `N` itself.
pub fn pi_cut(p: usize, cut: usize) -> f64 {
    1.0 - 2.0 * cut as f64 / p as f64
}

fn check_n(p: usize, n: i64) -> Result<()> {
    if p < 2 {
        return Err(Error::PeriodTooSmall(p));
    }
    if n < 1 || n > p as i64 {
        return Err(Error::IndexOutOfRange {
            index: n,
            range: format!("1..={p}"),
        });
    }
    Ok(())
}

fn check_cut(p: usize, cut: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::PeriodTooSmall(p));
    }
    if 2 * cut >= p {
        return Err(Error::CutOutOfRange { n: cut, period: p });
    }
    Ok(())
}

pub fn kernels(p: usize, n: i64, cut: usize) -> Result<KernelValues> {
    check_n(p, n)?;
    check_cut(p, cut)?;
    Ok(KernelValues {
        s: kernel_s(p, n),
        s_sq: kernel_s_sq(p, n),
        t_n: kernel_t(p, n),
        t: kernel_t(p, 2 * n - 1),
        u_cut: window_u(p, cut),
        pi_cut: pi_cut(p, cut),
        pi_prime: 1.0 - n as f64 / p as f64,
    })
}

/// `E(p_n) = p⁻¹σ² + m_1²|S_n|²`.
pub fn expected_pn(p: usize, n: i64, m: &MomentTuple) -> Result<f64> {
    check_n(p, n)?;
    Ok(m.variance() / p as f64 + m.m1 * m.m1 * kernel_s_sq(p, n))
}

/// `E(p_n²)`.
pub fn expected_pn_sq(p: usize, n: i64, m: &MomentTuple) -> Result<f64> {
    check_n(p, n)?;
    let q = 1.0 / p as f64;
    let (q2, q3) = (q * q, q * q * q);
    let s2 = kernel_s_sq(p, n);
    let t = kernel_t(p, 2 * n - 1);
    let MomentTuple { m1, m2, m3, m4 } = *m;
    Ok(q3 * m4
        + 4.0 * q2 * (s2 - q) * m1 * m3
        + (t * t + 2.0 * q2 - 3.0 * q3) * m2 * m2
        + ((2.0 * t + 4.0 * q - 12.0 * q2) * s2 + 12.0 * q3 - 4.0 * q2 - 2.0 * t * t) * m1 * m1 * m2
        + (s2 * s2 + (8.0 * q2 - 2.0 * t - 4.0 * q) * s2 + t * t - 6.0 * q3 + 2.0 * q2)
            * m1.powi(4))
}

/// `Var(p_n)`; exactly zero for a point-mass law.
pub fn var_pn(p: usize, n: i64, m: &MomentTuple) -> Result<f64> {
    check_n(p, n)?;
    if m.is_degenerate() {
        return Ok(0.0);
    }
    let q = 1.0 / p as f64;
    let (q2, q3) = (q * q, q * q * q);
    let s2 = kernel_s_sq(p, n);
    let t = kernel_t(p, 2 * n - 1);
    let MomentTuple { m1, m2, m3, m4 } = *m;
    Ok(q3 * m4
        + 4.0 * q2 * (s2 - q) * m1 * m3
        + (t * t + q2 - 3.0 * q3) * m2 * m2
        + ((2.0 * t + 2.0 * q - 12.0 * q2) * s2 + 12.0 * q3 - 2.0 * q2 - 2.0 * t * t) * m1 * m1 * m2
        + ((8.0 * q2 - 2.0 * t - 2.0 * q) * s2 + t * t - 6.0 * q3 + q2) * m1.powi(4))
}

/// `E(p_N) = π_N σ² + m_1² U_N`.
#[allow(non_snake_case)]
pub fn expected_pN(p: usize, cut: usize, m: &MomentTuple) -> Result<f64> {
    check_cut(p, cut)?;
    Ok(pi_cut(p, cut) * m.variance() + m.m1 * m.m1 * window_u(p, cut))
}

/// `Var(p_N)`; exactly zero for a point-mass law.
#[allow(non_snake_case)]
pub fn var_pN(p: usize, cut: usize, m: &MomentTuple) -> Result<f64> {
    check_cut(p, cut)?;
    if m.is_degenerate() {
        return Ok(0.0);
    }
    let q = 1.0 / p as f64;
    let pi = pi_cut(p, cut);
    let u = window_u(p, cut);
    let MomentTuple { m1, m2, m3, m4 } = *m;
    Ok(q * pi * pi * m4
        + 4.0 * q * pi * (u - pi) * m1 * m3
        + q * pi * (2.0 - 3.0 * pi) * m2 * m2
        + 4.0 * q * (1.0 - 3.0 * pi) * (u - pi) * m1 * m1 * m2
        + 2.0 * q * (2.0 * u * (2.0 * pi - 1.0) + pi * (1.0 - 3.0 * pi)) * m1.powi(4))
}

/// `E(p_tot) = m_2`.
pub fn expected_ptot(m: &MomentTuple) -> f64 {
    m.m2
}

/// Leading-order value of an asymptotic expansion together with the order of
/// the neglected remainder, `O(p^remainder_exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptotic {
    pub leading: f64,
    pub remainder_exponent: f64,
}

/// `E(⟨ñ^r⟩) = (p/2)^r m_2 / (r + 1) + O(p^{r-1})`.
pub fn expected_moment_observable(p: usize, r: f64, m: &MomentTuple) -> Asymptotic {
    Asymptotic {
        leading: (p as f64 / 2.0).powf(r) * m.m2 / (r + 1.0),
        remainder_exponent: r - 1.0,
    }
}

/// `Σ_n ñ^r E(p_n)` over one period, with no asymptotic approximation.
pub fn exact_expected_moment_observable(p: usize, r: f64, m: &MomentTuple) -> f64 {
    (1..=p as i64)
        .map(|n| {
            let w = (tilde_index(n, Period::Finite(p)) as f64).powf(r);
            w * (m.variance() / p as f64 + m.m1 * m.m1 * kernel_s_sq(p, n))
        })
        .sum()
}

/// Variance of the quadratic form `ŷᵀAŷ` for i.i.d. components.
///
/// `a` is a dense symmetric `d × d` matrix in row-major order.
pub fn quadratic_form_variance(a: &[f64], d: usize, m: &MomentTuple) -> f64 {
    assert_eq!(a.len(), d * d);
    let MomentTuple { m1, m2, m3, m4 } = *m;
    let var = m2 - m1 * m1;
    let mu3 = m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3);
    let mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
    let diag: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    let row_sums: Vec<f64> = (0..d).map(|i| a[i * d..(i + 1) * d].iter().sum()).collect();
    let diag_sq: f64 = diag.iter().map(|x| x * x).sum();
    let frob: f64 = a.iter().map(|x| x * x).sum();
    let b_sq: f64 = row_sums.iter().map(|x| x * x).sum();
    let b_diag: f64 = row_sums.iter().zip(&diag).map(|(b, a)| b * a).sum();
    (mu4 - 3.0 * var * var) * diag_sq
        + 2.0 * var * var * frob
        + 4.0 * m1 * m1 * var * b_sq
        + 4.0 * m1 * mu3 * b_diag
}

/// Continuum limit paired with the prediction at a finite cell count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousPrediction {
    pub continuum: f64,
    pub finite_cells: Option<f64>,
}

/// Continuous-spectrum expectations.
pub mod continuous {
    use super::*;

    fn omega(n: i64) -> f64 {
        n as f64 - 0.5
    }

    /// `E(p_n)`: continuum `m_1² / (π²(n-½)²)`; with `M` cells the variance
    /// term `σ² M sin²(π(n-½)/M) / (π²(n-½)²)` is added.
    pub fn expected_pn(n: i64, m: &MomentTuple, cells: Option<usize>) -> ContinuousPrediction {
        let w = omega(n);
        let mean_part = m.m1 * m.m1 / (PI * PI * w * w);
        ContinuousPrediction {
            continuum: mean_part,
            finite_cells: cells.map(|c| {
                let s = (PI * w / c as f64).sin();
                m.variance() * c as f64 * s * s / (PI * PI * w * w) + mean_part
            }),
        }
    }

    /// `E(p_tot) = m_2` at every cell count.
    pub fn expected_ptot(m: &MomentTuple, cells: Option<usize>) -> ContinuousPrediction {
        ContinuousPrediction {
            continuum: m.m2,
            finite_cells: cells.map(|_| m.m2),
        }
    }

    /// `E(p_N) = m_2 - Σ_{1-N <= n <= N} E(p_n)`.
    #[allow(non_snake_case)]
    pub fn expected_pN(cut: usize, m: &MomentTuple, cells: Option<usize>) -> ContinuousPrediction {
        let cut = cut as i64;
        let excluded: Vec<ContinuousPrediction> =
            (1 - cut..=cut).map(|n| expected_pn(n, m, cells)).collect();
        ContinuousPrediction {
            continuum: m.m2 - excluded.iter().map(|e| e.continuum).sum::<f64>(),
            finite_cells: cells.map(|_| {
                m.m2 - excluded
                    .iter()
                    .map(|e| e.finite_cells.unwrap_or(0.0))
                    .sum::<f64>()
            }),
        }
    }

    /// `Var(p_N)`: zero in the continuum; at `M` cells the exact variance of
    /// the quadratic form `p_N = ŷᵀ(I/M - B)ŷ`, with `B` the cell-overlap
    /// matrix of the excluded indices.
    #[allow(non_snake_case)]
    pub fn var_pN(cut: usize, m: &MomentTuple, cells: Option<usize>) -> ContinuousPrediction {
        ContinuousPrediction {
            continuum: 0.0,
            finite_cells: cells.map(|c| {
                let a = tail_form(c, cut);
                quadratic_form_variance(&a, c, m)
            }),
        }
    }

    /// Symmetric matrix of the quadratic form `ŷ ↦ p_N` on `M` cells.
    pub fn tail_form(cells: usize, cut: usize) -> Vec<f64> {
        let mf = cells as f64;
        let mut a = vec![0.0; cells * cells];
        for i in 0..cells {
            a[i * cells + i] = 1.0 / mf;
        }
        let cut = cut as i64;
        for n in 1 - cut..=cut {
            let w = omega(n);
            let amp = (PI * w / mf).sin() / (PI * w);
            // cell j overlap: amp · exp(-iπ w (2j+1)/M)
            let c: Vec<Complex64> = (0..cells)
                .map(|j| Complex64::from_polar(amp, -PI * w * (2 * j + 1) as f64 / mf))
                .collect();
            for i in 0..cells {
                for j in 0..cells {
                    a[i * cells + j] -= (c[i] * c[j].conj()).re;
                }
            }
        }
        a
    }
}
