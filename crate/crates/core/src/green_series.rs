//! Binomial-expansion series for the FCC lattice Green function.
//!
//! Expanding `1/(t - ω)` with `ω = γ cos x cos y + cos y cos z + cos z cos x`
//! and integrating term by term leaves products of one-dimensional integrals
//! `J_p(k)`:
//!
//! * **series5** expands in powers of `ω/t` and then splits each `ωⁱ` with
//!   two binomial sums,
//!   `G = π⁻³ Σᵢ t^(-1-i) Σⱼ C(i,j) γ^(i-j) Σₖ C(j,k) J_{i-j+k}(l) J_{i-k}(m) J_j(n)`.
//! * **series6** first expands in the mixed bond `cos z (cos x + cos y)` and
//!   then in `γ cos x cos y / t`, giving a double sum over `i` and `j`.
//!
//! All coefficients are non-negative, so partial sums increase monotonically.
//! To stay inside the `f64` range up to the hard cap, the coefficients are
//! carried as binomial probability masses: with `s = 2 + γ`,
//! `C(i,j) γ^(i-j) C(j,k) = sⁱ · [C(i,j)(γ/s)^(i-j)(2/s)ʲ] · [C(j,k) 2^(-j)]`,
//! and the leftover `sⁱ t^(-1-i)` is the geometric factor `(s/t)ⁱ / t`.

use std::f64::consts::PI;

use crate::acceleration::{aitken_delta2, wynn_epsilon, Accelerated, PartialSumSequence};
use crate::basic_integrals::{reduced_j, IntegralTable};
use crate::combinatorics::{BinomialTable, BinomialWeights};
use crate::error::{Error, Result};
use crate::params::{Acceleration, GreenParams, Method, SeriesEvaluation};
use crate::summation::NeumaierSum;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_N_MAX: usize = 400;
/// Truncation limits above this are refused.
pub const N_MAX_HARD_CAP: usize = 1000;

/// Ratios this close to one are treated as the band edge.
const BAND_EDGE_SLACK: f64 = 1e-9;
/// Partial sums handed to a transform away from the band edge.
const ACCEL_WINDOW: usize = 20;
/// Share of the tolerance allowed for each truncated inner sum of series6.
const INNER_TOL_FRACTION: f64 = 1e-3;

/// Truncation and acceleration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    pub tol: f64,
    /// Maximum number of outer terms.
    pub n_max: usize,
    /// Maximum number of inner terms per outer index (series6 only).
    pub l_max: usize,
    pub accel: Acceleration,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            n_max: DEFAULT_N_MAX,
            l_max: N_MAX_HARD_CAP,
            accel: Acceleration::None,
        }
    }
}

impl SeriesOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::domain(format!("tol must be > 0, got {}", self.tol)));
        }
        for (name, v) in [("n_max", self.n_max), ("l_max", self.l_max)] {
            if v == 0 {
                return Err(Error::domain(format!("{name} must be >= 1")));
            }
            if v > N_MAX_HARD_CAP {
                return Err(Error::TruncationCap {
                    requested: v,
                    cap: N_MAX_HARD_CAP,
                });
            }
        }
        Ok(())
    }
}

/// Cached `J_p(k) / π` for one wavenumber.
#[derive(Clone, Copy)]
struct JRow<'a> {
    k: u64,
    cached: Option<&'a [f64]>,
}

impl<'a> JRow<'a> {
    fn new(tables: &'a IntegralTable, k: u32) -> Self {
        Self {
            k: k as u64,
            cached: tables.reduced_row(k as u64),
        }
    }

    #[inline]
    fn get(&self, p: usize) -> f64 {
        match self.cached.and_then(|row| row.get(p)) {
            Some(v) => *v,
            None => reduced_j(p as u64, self.k),
        }
    }
}

/// Integral table sized for a series truncated at `n_max` outer terms.
pub fn series_tables(params: &GreenParams, n_max: usize, l_max: usize) -> IntegralTable {
    let depth = (2 * n_max + 8).max(n_max + l_max + 8);
    let site = params.site();
    IntegralTable::new(depth, &[site[0] as u64, site[1] as u64, site[2] as u64])
}

/// First outer index at which a series5 term can be non-zero.
fn first_nonzero_index(params: &GreenParams) -> usize {
    let [l, m, n] = params.site().map(|v| v as usize);
    let half_sum = (l + m + n).div_ceil(2);
    l.max(m).max(n).max(half_sum)
}

/// `π⁻³ ∫ ωⁱ cos lx cos my cos nz / (2+γ)ⁱ`, the i-th moment scaled into `[0, 1]`.
fn scaled_moment(i: usize, params: &GreenParams, tables: &IntegralTable) -> f64 {
    let binom = BinomialTable::shared();
    let s = params.band_edge();
    let outer = BinomialWeights::new(params.gamma / s, 2.0 / s);
    let (jl, jm, jn) = (
        JRow::new(tables, params.l),
        JRow::new(tables, params.m),
        JRow::new(tables, params.n),
    );
    let mut acc = NeumaierSum::new();
    for j in 0..=i {
        let zj = jn.get(j);
        if zj == 0.0 {
            continue;
        }
        let w = outer.weight(binom, i, j);
        if w == 0.0 {
            continue;
        }
        let mut inner = NeumaierSum::new();
        // J_{i-j+k}(l) vanishes unless i - j + k + l is even
        let k0 = (i + j + params.l as usize) % 2;
        for k in (k0..=j).step_by(2) {
            let x = jl.get(i - j + k);
            if x == 0.0 {
                continue;
            }
            let y = jm.get(i - k);
            if y == 0.0 {
                continue;
            }
            inner.add(binom.half_mass(j, k) * x * y);
        }
        acc.add(w * zj * inner.value());
    }
    acc.value()
}

/// The i-th outer term of series5 without the global `π⁻³`:
/// `t^(-1-i) Σⱼ F_j(i) γ^(i-j) Σₖ F_k(j) J_{i-j+k}(l) J_{i-k}(m) J_j(n)`.
///
/// `tables` must hold `J_p(k)` for the three site indices up to `p = i`;
/// missing entries are computed on the fly.
pub fn outer_term_series5(i: usize, params: &GreenParams, tables: &IntegralTable) -> f64 {
    PI.powi(3) * contribution5(i, params, tables)
}

/// Coefficient of `t^(-1-i)` in the expansion of `G`, i.e. the i-th moment
/// `π⁻³ ∫∫∫ ωⁱ cos lx cos my cos nz`.
pub fn moment_coefficient(i: usize, params: &GreenParams, tables: &IntegralTable) -> f64 {
    scaled_moment(i, params, tables) * params.band_edge().powi(i as i32)
}

/// Term `i` of `G` itself (the outer term divided by `π³`).
fn contribution5(i: usize, params: &GreenParams, tables: &IntegralTable) -> f64 {
    let ratio = params.band_edge() / params.t;
    scaled_moment(i, params, tables) * ratio.powi(i as i32) / params.t
}

/// Outer term `i` of series6 (divided by `π³`) and a bound on the part of its
/// inner sum that was cut off.
fn contribution6(
    i: usize,
    params: &GreenParams,
    tables: &IntegralTable,
    l_max: usize,
    inner_tol: f64,
) -> (f64, f64) {
    let (jl, jm, jn) = (
        JRow::new(tables, params.l),
        JRow::new(tables, params.m),
        JRow::new(tables, params.n),
    );
    let zi = jn.get(i);
    if zi == 0.0 {
        return (0.0, 0.0);
    }
    let binom = BinomialTable::shared();
    let t = params.t;
    let x = params.gamma / t;
    // C(i+j, j) (2/t)^i (γ/t)^j
    let weights = BinomialWeights::new(2.0 / t, x);
    let scale = zi / t;

    let mut acc = NeumaierSum::new();
    let mut residual = f64::INFINITY;
    for j in 0..l_max {
        let w = weights.weight(binom, i + j, j);
        if w > 0.0 {
            let mut inner = NeumaierSum::new();
            // J_{j+k}(l) vanishes unless j + k + l is even
            let k0 = (j + params.l as usize) % 2;
            for k in (k0..=i).step_by(2) {
                let a = jl.get(j + k);
                if a == 0.0 {
                    continue;
                }
                let b = jm.get(j + i - k);
                if b == 0.0 {
                    continue;
                }
                inner.add(binom.half_mass(i, k) * a * b);
            }
            acc.add(w * inner.value());
        }
        // every later weight ratio is below this one, and the J products are ≤ 1
        let rho = x * (i + j + 1) as f64 / (j + 1) as f64;
        if rho < 1.0 {
            let tail = scale * w * rho / (1.0 - rho);
            residual = tail;
            if tail <= inner_tol {
                break;
            }
        } else {
            residual = f64::INFINITY;
        }
    }
    (scale * acc.value(), residual)
}

/// Common-ratio bound used by the geometric tail estimate of each method.
fn tail_ratio(params: &GreenParams, method: Method) -> f64 {
    match method {
        Method::Series6 => 2.0 / (params.t - params.gamma),
        _ => params.band_edge() / params.t,
    }
}

/// Raw summation record.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTrace {
    pub method: Method,
    /// Outer terms of `G` (already divided by `π³`).
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Geometric tail estimate after each term (running minimum; infinite
    /// until a non-zero term has been seen, and at the band edge).
    pub tail_bounds: Vec<f64>,
    /// Accumulated bound on inner truncation (series6).
    pub inner_residual: f64,
    pub ratio: f64,
    pub converged: bool,
}

impl SeriesTrace {
    pub fn value(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }

    pub fn error_estimate(&self) -> f64 {
        self.tail_bounds.last().copied().unwrap_or(f64::INFINITY) + self.inner_residual
    }

    pub fn terms_used(&self) -> usize {
        self.terms.len()
    }
}

/// Sum outer terms until the tail estimate drops below `tol` (when
/// `stop_early`) or `n_max` terms have been taken.
fn drive(
    mut term: impl FnMut(usize) -> (f64, f64),
    ratio: f64,
    first_index: usize,
    method: Method,
    tol: f64,
    n_max: usize,
    stop_early: bool,
) -> SeriesTrace {
    let mut terms = Vec::new();
    let mut partial_sums = Vec::new();
    let mut tail_bounds = Vec::new();
    let mut acc = NeumaierSum::new();
    let mut inner_residual = NeumaierSum::new();
    let mut best_tail = f64::INFINITY;
    let mut converged = false;
    for i in 0..n_max {
        let (a, residual) = term(i);
        acc.add(a);
        inner_residual.add(residual);
        let prev = terms.last().copied().unwrap_or(0.0);
        terms.push(a);
        partial_sums.push(acc.value());
        let base = a.max(prev);
        if i >= first_index && base > 0.0 && ratio < 1.0 {
            best_tail = best_tail.min(base * ratio / (1.0 - ratio));
        }
        tail_bounds.push(best_tail);
        if best_tail + inner_residual.value() <= tol {
            converged = true;
            if stop_early {
                break;
            }
        }
    }
    SeriesTrace {
        method,
        terms,
        partial_sums,
        tail_bounds,
        inner_residual: inner_residual.value(),
        ratio,
        converged,
    }
}

fn trace_with(
    params: &GreenParams,
    method: Method,
    opts: &SeriesOptions,
    stop_early: bool,
) -> Result<SeriesTrace> {
    opts.validate()?;
    params.check_series_domain()?;
    let ratio = tail_ratio(params, method);
    match method {
        Method::Series5 => {
            let tables = series_tables(params, opts.n_max, 0);
            Ok(drive(
                |i| (contribution5(i, params, &tables), 0.0),
                ratio,
                first_nonzero_index(params),
                method,
                opts.tol,
                opts.n_max,
                stop_early,
            ))
        }
        Method::Series6 => {
            let tables = series_tables(params, opts.n_max, opts.l_max);
            let inner_tol = INNER_TOL_FRACTION * opts.tol;
            Ok(drive(
                |i| contribution6(i, params, &tables, opts.l_max, inner_tol),
                ratio,
                first_nonzero_index(params),
                method,
                opts.tol,
                opts.n_max,
                stop_early,
            ))
        }
        Method::Quadrature => Err(Error::domain("quadrature has no series trace")),
    }
}

/// All `n_max` outer terms of a series, without early stopping.
pub fn series_trace(
    params: &GreenParams,
    method: Method,
    opts: &SeriesOptions,
) -> Result<SeriesTrace> {
    trace_with(params, method, opts, false)
}

/// Is the tail ratio at (or numerically at) one?
pub fn at_band_edge(ratio: f64) -> bool {
    ratio >= 1.0 - BAND_EDGE_SLACK
}

/// Partial sums `S_N` at `N = s·2^(a-k)·3^k`, `k = 0, 1, …`: a subsequence
/// whose counts grow by a factor 3/2, with `s = 2` when every other term of
/// the series vanishes by parity and `s = 1` otherwise.
///
/// At the band edge the tail of the series decays like `N^(-1/2)` with
/// corrections in further half-integer powers. Sampling at a fixed count
/// ratio turns each of those powers into a geometric mode, which the
/// ε-algorithm removes exactly. Of the admissible ladders the longest one is
/// used, and among equally long ones the one reaching furthest.
pub fn band_edge_subsequence(partial_sums: &[f64]) -> Vec<f64> {
    let total = partial_sums.len();
    let half = total / 2;
    let stride = if partial_sums[half.min(total.saturating_sub(1))..]
        .windows(2)
        .any(|w| w[0] == w[1])
    {
        2
    } else {
        1
    };
    let mut best: Vec<usize> = Vec::new();
    for a in 1..=30u32 {
        if stride << a > total {
            break;
        }
        let ladder: Vec<usize> = (0..=a)
            .map(|k| (stride << (a - k)) * 3usize.pow(k))
            .take_while(|&n| n <= total)
            .collect();
        if ladder.len() > best.len() || (ladder.len() == best.len() && ladder.last() > best.last())
        {
            best = ladder;
        }
    }
    if best.len() < 3 {
        return partial_sums.to_vec();
    }
    best.iter().map(|&n| partial_sums[n - 1]).collect()
}

/// Extrapolate a run of partial sums with the chosen transform.
///
/// At the band edge the transform sees [`band_edge_subsequence`]; elsewhere
/// it sees the newest few distinct sums.
pub fn accelerate_partial_sums(
    partial_sums: &[f64],
    ratio: f64,
    method: Method,
    accel: Acceleration,
) -> Option<Accelerated> {
    let input = if at_band_edge(ratio) {
        band_edge_subsequence(partial_sums)
    } else {
        partial_sums.to_vec()
    };
    let seq = PartialSumSequence::new(input, method)
        .ok()?
        .without_repeats();
    let seq = if at_band_edge(ratio) {
        seq
    } else {
        seq.tail(ACCEL_WINDOW)
    };
    let transform = |seq: &PartialSumSequence| match accel {
        Acceleration::None => None,
        Acceleration::Wynn => wynn_epsilon(seq).ok(),
        Acceleration::Aitken => aitken_delta2(seq).ok(),
    };
    let full = transform(&seq).filter(|a| a.value.is_finite() && a.error_estimate.is_finite())?;
    // the transform's own estimate is blind to pre-asymptotic drift, so also
    // see how far the newest quarter of the input moved the answer
    let shorter = seq.len() - (seq.len() / 4).max(1);
    let drift = if shorter >= 3 {
        transform(&seq.head(shorter))
            .map(|a| (a.value - full.value).abs())
            .filter(|d| d.is_finite())
            .unwrap_or(f64::INFINITY)
    } else {
        0.0
    };
    Some(Accelerated {
        value: full.value,
        error_estimate: full.error_estimate.max(drift),
    })
}

/// Turn a raw trace into an evaluation, accelerating if requested and needed.
fn finish(trace: SeriesTrace, opts: &SeriesOptions) -> SeriesEvaluation {
    let raw = SeriesEvaluation {
        value: trace.value(),
        terms_used: trace.terms_used(),
        abs_error_estimate: trace.error_estimate(),
        method: trace.method,
        accelerated: Acceleration::None,
        converged: trace.converged,
    };
    if trace.converged || opts.accel == Acceleration::None {
        return raw;
    }
    let Some(acc) =
        accelerate_partial_sums(&trace.partial_sums, trace.ratio, trace.method, opts.accel)
    else {
        return raw;
    };
    // a transform must never move a sum further than its own tail allows
    let raw_tail = trace.error_estimate();
    if raw_tail.is_finite() && (acc.value - raw.value).abs() > 10.0 * raw_tail {
        return raw;
    }
    let error = acc.error_estimate + trace.inner_residual;
    SeriesEvaluation {
        value: acc.value,
        abs_error_estimate: error,
        accelerated: opts.accel,
        converged: error <= opts.tol,
        ..raw
    }
}

/// `G(t, l, m, n; γ)` by the single binomial series, truncated adaptively.
pub fn evaluate_series5(params: &GreenParams, opts: &SeriesOptions) -> Result<SeriesEvaluation> {
    let trace = trace_with(params, Method::Series5, opts, true)?;
    Ok(finish(trace, opts))
}

/// `G(t, l, m, n; γ)` by the double series, both limits adaptive.
pub fn evaluate_series6(params: &GreenParams, opts: &SeriesOptions) -> Result<SeriesEvaluation> {
    let trace = trace_with(params, Method::Series6, opts, true)?;
    Ok(finish(trace, opts))
}

pub fn evaluate_series(
    params: &GreenParams,
    method: Method,
    opts: &SeriesOptions,
) -> Result<SeriesEvaluation> {
    match method {
        Method::Series5 => evaluate_series5(params, opts),
        Method::Series6 => evaluate_series6(params, opts),
        Method::Quadrature => Err(Error::domain("quadrature is not a series method")),
    }
}
