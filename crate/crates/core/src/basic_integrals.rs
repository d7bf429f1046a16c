//! One-dimensional cosine-power integrals over `[0, π]`.
//!
//! * `I_n    = ∫ cosⁿφ dφ`
//! * `L_n(k) = ∫ cos(kx) cosⁿx dx` for `k ≥ 2`, expanded through the
//!   Chebyshev form of `cos(kx)` into a finite sum of `I`'s
//! * `J_n(k)` dispatches between them and applies the selection rules
//!
//! Every value is a rational multiple of `π`. Internally they are carried in
//! units of `π` ("reduced" values). The `L_n(k)` sum alternates in sign and
//! cancels badly once `k` is comparable to `√n`; when the floating-point sum
//! is ill-conditioned it is redone in exact integer arithmetic, where every
//! term is an integer over the common denominator `2^(n+k)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::{BigInt, Sign};
use num_traits::{One, ToPrimitive, Zero};

use crate::combinatorics::{binomial_integer, summation_limit};
use crate::summation::NeumaierSum;

/// `I_n / π`: zero for odd `n`, `2^(-n) C(n, n/2)` for even `n`.
pub fn reduced_cosine_power(n: u64) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    if n <= 1020 {
        binomial_integer(n, (n / 2) as i64) * 2f64.powi(-(n as i32))
    } else {
        // (n-1)!! / n!!
        let mut acc = 1.0;
        for q in 1..=n / 2 {
            acc *= (2 * q - 1) as f64 / (2 * q) as f64;
        }
        acc
    }
}

/// `I_n = ∫₀^π cosⁿφ dφ`; exactly zero for odd `n`.
pub fn cosine_power_integral(n: u64) -> f64 {
    PI * reduced_cosine_power(n)
}

/// Largest `Σ|terms| / |sum|` accepted from the floating-point Chebyshev sum.
const MAX_CHEBYSHEV_CONDITION: f64 = 64.0;

/// `L_n(k) / π` from the finite Chebyshev sum.
fn reduced_cosine_product(n: u64, k: u64, power: impl Fn(u64) -> f64) -> f64 {
    let mut acc = NeumaierSum::new();
    let lead = 2f64.powi(k as i32 - 1) * power(k + n);
    acc.add(lead);
    let mut magnitude = lead.abs();
    for i in 1..=summation_limit(k) {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        // k · 2^(k-2i-1) · F_{i-1}(k-i-1) / i is an integer (a Chebyshev coefficient)
        let coefficient = k as f64
            * 2f64.powi(k as i32 - 2 * i as i32 - 1)
            * binomial_integer(k - i - 1, i as i64 - 1)
            / i as f64;
        let term = coefficient * power(k + n - 2 * i);
        magnitude += term.abs();
        acc.add(sign * term);
    }
    let value = acc.value();
    if value > 0.0 && magnitude <= MAX_CHEBYSHEV_CONDITION * value {
        value
    } else {
        exact_reduced_cosine_product(n, k)
    }
}

/// The Chebyshev sum for `L_n(k) / π` in integers: each term
/// `c_i I_{n+k-2i} / π` equals `c_i C(p, p/2) 4^i / 2^(n+k)` with `p = n+k-2i`.
fn exact_reduced_cosine_product(n: u64, k: u64) -> f64 {
    let top = n + k;
    if top % 2 == 1 {
        return 0.0;
    }
    let mut p = top;
    let mut central = central_binomial(p);
    let mut total = BigInt::zero();
    for i in 0..=summation_limit(k) {
        if i > 0 {
            // C(p-2, p/2-1) = C(p, p/2) · (p/2)² / (p (p-1))
            let h = p / 2;
            central = central * (h * h) / (p * (p - 1));
            p -= 2;
        }
        let coefficient = if i == 0 {
            BigInt::one() << (k - 1)
        } else {
            ((BigInt::from(k) * binomial_big(k - i - 1, i - 1)) << (k - 2 * i)) / (2 * i)
        };
        let term = (coefficient * &central) << (2 * i);
        if i % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    scaled_to_f64(&total, top)
}

fn central_binomial(p: u64) -> BigInt {
    binomial_big(p, p / 2)
}

fn binomial_big(n: u64, m: u64) -> BigInt {
    let m = m.min(n - m);
    let mut acc = BigInt::one();
    for j in 0..m {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// `x · 2^(-e)` rounded to `f64` without overflowing on the way.
fn scaled_to_f64(x: &BigInt, e: u64) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let (sign, mag) = (x.sign(), x.magnitude() >> shift);
    let mantissa = mag.to_u64().expect("at most 64 bits") as f64;
    let v = libm::scalbn(mantissa, shift as i32 - e as i32);
    if sign == Sign::Minus {
        -v
    } else {
        v
    }
}

/// `L_n(k) = ∫₀^π cos(kx) cosⁿx dx` for `k ≥ 2`, by the finite Chebyshev sum.
///
/// The sum itself reproduces the selection zeros (`k > n` or odd `n + k`);
/// [`j_integral`] applies them before getting here.
pub fn cosine_product_integral(n: u64, k: u64) -> f64 {
    assert!(k >= 2, "cosine_product_integral needs k >= 2, got {k}");
    PI * reduced_cosine_product(n, k, reduced_cosine_power)
}

/// True when `J_n(k)` vanishes by the selection rules.
#[inline]
pub fn j_vanishes(n: u64, k: u64) -> bool {
    k > n || (n + k) % 2 == 1
}

/// `J_n(k) / π`.
pub fn reduced_j(n: u64, k: u64) -> f64 {
    if j_vanishes(n, k) {
        0.0
    } else if k == 0 {
        reduced_cosine_power(n)
    } else if k == 1 {
        reduced_cosine_power(n + 1)
    } else {
        reduced_cosine_product(n, k, reduced_cosine_power)
    }
}

/// `J_n(k)`: `0` when `k > n` or `n + k` is odd, else `I_n` (`k = 0`),
/// `I_{n+1}` (`k = 1`) or `L_n(k)` (`k ≥ 2`). The zero rules take precedence.
pub fn j_integral(n: u64, k: u64) -> f64 {
    PI * reduced_j(n, k)
}

/// Memoized `I_n` and `J_n(k)` values for a fixed set of wavenumbers `k`.
///
/// The table is filled eagerly in [`IntegralTable::new`] and never mutated
/// afterwards, so it can be shared across threads without locking. Lookups
/// outside the cached range are computed on the spot and not stored.
#[derive(Debug, Clone)]
pub struct IntegralTable {
    max_n: usize,
    reduced_powers: Vec<f64>,
    reduced_j_rows: BTreeMap<u64, Vec<f64>>,
}

impl IntegralTable {
    /// Cache `I_n` for `n ≤ max_n + 1` and `J_n(k)` for `n ≤ max_n` and each `k`.
    pub fn new(max_n: usize, wavenumbers: &[u64]) -> Self {
        let reduced_powers: Vec<f64> = (0..=(max_n as u64 + 1)).map(reduced_cosine_power).collect();
        let cached_power = |p: u64| {
            reduced_powers
                .get(p as usize)
                .copied()
                .unwrap_or_else(|| reduced_cosine_power(p))
        };
        let mut reduced_j_rows = BTreeMap::new();
        for &k in wavenumbers {
            reduced_j_rows.entry(k).or_insert_with(|| {
                (0..=max_n as u64)
                    .map(|n| {
                        if j_vanishes(n, k) {
                            0.0
                        } else if k == 0 {
                            cached_power(n)
                        } else if k == 1 {
                            cached_power(n + 1)
                        } else {
                            reduced_cosine_product(n, k, cached_power)
                        }
                    })
                    .collect()
            });
        }
        Self {
            max_n,
            reduced_powers,
            reduced_j_rows,
        }
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn cosine_power(&self, n: u64) -> f64 {
        PI * self
            .reduced_powers
            .get(n as usize)
            .copied()
            .unwrap_or_else(|| reduced_cosine_power(n))
    }

    /// Cached row of `J_n(k) / π` over `n = 0..=max_n`, if `k` was requested.
    pub fn reduced_row(&self, k: u64) -> Option<&[f64]> {
        self.reduced_j_rows.get(&k).map(Vec::as_slice)
    }

    #[inline]
    pub fn reduced_j(&self, n: u64, k: u64) -> f64 {
        match self.reduced_j_rows.get(&k) {
            Some(row) if (n as usize) < row.len() => row[n as usize],
            _ => reduced_j(n, k),
        }
    }

    pub fn j(&self, n: u64, k: u64) -> f64 {
        PI * self.reduced_j(n, k)
    }
}
