//! Generalized binomial coefficients and the parity-aware summation limit.
//!
//! The coefficient `F_m(n)` is the expansion coefficient of `(x + y)^n`:
//! for integer `n ≥ 0` it is the ordinary `n(n-1)…(n-m+1)/m!`, and for any
//! other real order it is `(-1)^m Γ(m-n) / (m! Γ(-n))`. Negative indices give
//! zero.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// Largest row held by the shared dense table of `C(i, j)`.
pub const TABLE_ROWS: usize = 1000;

/// Length of the log-factorial table backing the log-space weights.
const LN_FACTORIAL_LEN: usize = 4 * TABLE_ROWS + 64;

/// Below this log-magnitude a power factor is evaluated in log space.
const LOG_SPACE_THRESHOLD: f64 = -650.0;

/// `C(n, m)` for integer `n ≥ 0`; zero when `m < 0` or `m > n`.
///
/// Results that fit in a `u128` are computed exactly and rounded once, so
/// every coefficient representable in `f64` is returned exactly. Larger
/// coefficients fall back to the running product with the division
/// interleaved per factor.
pub fn binomial_integer(n: u64, m: i64) -> f64 {
    if m < 0 || m as u64 > n {
        return 0.0;
    }
    let m = (m as u64).min(n - m as u64);
    if let Some(exact) = binomial_u128(n, m) {
        return exact as f64;
    }
    let mut acc = 1.0_f64;
    for q in 1..=m {
        acc = acc * (n - m + q) as f64 / q as f64;
    }
    acc
}

fn binomial_u128(n: u64, m: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for q in 1..=m as u128 {
        // acc * (n - m + q) / q is exactly C(n - m + q, q)
        acc = acc.checked_mul(n as u128 - m as u128 + q)? / q;
    }
    Some(acc)
}

/// `F_m(n)` for real order `n`.
///
/// Integer orders `n ≥ 0` are routed to [`binomial_integer`]. Everything else
/// goes through log-gamma with explicit sign bookkeeping, which stays finite
/// long after `Γ` itself overflows.
pub fn binomial_general(n: f64, m: u64) -> Result<f64> {
    if !n.is_finite() {
        return Err(Error::domain(format!(
            "binomial order must be finite, got {n}"
        )));
    }
    if n >= 0.0 && n.fract() == 0.0 && n <= u64::MAX as f64 {
        return Ok(binomial_integer(n as u64, m as i64));
    }
    let m_f = m as f64;
    let (ln_top, sign_top) = ln_gamma_signed(m_f - n)?;
    let (ln_bottom, sign_bottom) = ln_gamma_signed(-n)?;
    let ln_fact = libm::lgamma(m_f + 1.0);
    let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
    let magnitude = (ln_top - ln_fact - ln_bottom).exp();
    Ok(parity * sign_top * sign_bottom * magnitude)
}

fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if x <= 0.0 && x.fract() == 0.0 {
        return Err(Error::domain(format!(
            "gamma function is singular at the non-positive integer {x}"
        )));
    }
    let (value, sign) = libm::lgamma_r(x);
    Ok((value, if sign < 0 { -1.0 } else { 1.0 }))
}

/// Upper summation limit `E(n/2) = n/2 - (1 - (-1)^n)/4`, i.e. `floor(n/2)`.
pub fn summation_limit(n: u64) -> u64 {
    // 4·E = 2n - (1 - (-1)^n)
    let parity_correction = if n % 2 == 0 { 0 } else { 2 };
    (2 * n - parity_correction) / 4
}

/// Dense table of `C(i, j)` for `0 ≤ j ≤ i < rows`, plus log-factorials for
/// weights that leave the dense range.
///
/// Immutable after construction; share it freely across threads.
#[derive(Debug)]
pub struct BinomialTable {
    rows: usize,
    values: Vec<f64>,
    ln_factorial: Vec<f64>,
}

impl BinomialTable {
    pub fn new(rows: usize) -> Self {
        let mut values = Vec::with_capacity(rows * (rows + 1) / 2);
        let mut exact_prev: Option<Vec<u128>> = Some(Vec::new());
        let mut prev: Vec<f64> = Vec::new();
        for i in 0..rows {
            let mut row_f = vec![1.0; i + 1];
            let mut row_exact = exact_prev.as_ref().map(|_| vec![1u128; i + 1]);
            for j in 1..i {
                if let (Some(ex), Some(prev_ex)) = (row_exact.as_mut(), exact_prev.as_ref()) {
                    match prev_ex[j - 1].checked_add(prev_ex[j]) {
                        Some(v) => ex[j] = v,
                        None => row_exact = None,
                    }
                }
                row_f[j] = prev[j - 1] + prev[j];
            }
            if let Some(ex) = &row_exact {
                for (dst, src) in row_f.iter_mut().zip(ex) {
                    *dst = *src as f64;
                }
            }
            values.extend_from_slice(&row_f);
            exact_prev = row_exact;
            prev = row_f;
        }

        let mut ln_factorial = Vec::with_capacity(LN_FACTORIAL_LEN);
        let mut acc = NeumaierSum::new();
        ln_factorial.push(0.0);
        for q in 1..LN_FACTORIAL_LEN {
            acc.add((q as f64).ln());
            ln_factorial.push(acc.value());
        }

        Self {
            rows,
            values,
            ln_factorial,
        }
    }

    /// Process-wide table sized to [`TABLE_ROWS`].
    pub fn shared() -> &'static BinomialTable {
        static TABLE: OnceLock<BinomialTable> = OnceLock::new();
        TABLE.get_or_init(|| BinomialTable::new(TABLE_ROWS + 1))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `C(i, j)`; rows beyond the table use the running product.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else if i < self.rows {
            self.values[i * (i + 1) / 2 + j]
        } else {
            binomial_integer(i as u64, j as i64)
        }
    }

    pub fn ln_factorial(&self, n: usize) -> f64 {
        match self.ln_factorial.get(n) {
            Some(v) => *v,
            None => libm::lgamma(n as f64 + 1.0),
        }
    }

    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            f64::NEG_INFINITY
        } else {
            self.ln_factorial(n) - self.ln_factorial(k) - self.ln_factorial(n - k)
        }
    }

    /// `C(n, k) · 2^(-n)`, the symmetric binomial mass.
    #[inline]
    pub fn half_mass(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return 0.0;
        }
        if n < self.rows && n <= 1020 {
            self.get(n, k) * 2f64.powi(-(n as i32))
        } else {
            (self.ln_binomial(n, k) - n as f64 * std::f64::consts::LN_2).exp()
        }
    }
}

/// Binomial weights `C(n, k) p^(n-k) q^k` with `0 < p, q ≤ 1`.
///
/// Direct products are used while every factor stays in the normal range;
/// otherwise the weight is assembled in log space. Weights below the smallest
/// subnormal come back as zero.
#[derive(Debug, Clone, Copy)]
pub struct BinomialWeights {
    p: f64,
    q: f64,
    ln_p: f64,
    ln_q: f64,
}

impl BinomialWeights {
    pub fn new(p: f64, q: f64) -> Self {
        debug_assert!(p > 0.0 && q > 0.0);
        Self {
            p,
            q,
            ln_p: p.ln(),
            ln_q: q.ln(),
        }
    }

    #[inline]
    pub fn weight(&self, table: &BinomialTable, n: usize, k: usize) -> f64 {
        if k > n {
            return 0.0;
        }
        let lp = (n - k) as f64 * self.ln_p;
        let lq = k as f64 * self.ln_q;
        if n < table.rows() && lp > LOG_SPACE_THRESHOLD && lq > LOG_SPACE_THRESHOLD {
            table.get(n, k) * self.p.powi((n - k) as i32) * self.q.powi(k as i32)
        } else {
            let lw = table.ln_binomial(n, k) + lp + lq;
            if lw < -745.0 {
                0.0
            } else {
                lw.exp()
            }
        }
    }
}
