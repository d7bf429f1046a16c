//! Sequence transforms for slowly converging partial sums.
//!
//! Two standard nonlinear transforms are provided: Wynn's ε-algorithm and
//! iterated Aitken Δ². Both are exact on sums of a geometric series and both
//! return a heuristic error estimate alongside the extrapolated value.

use crate::error::AccelError;
use crate::params::Method;

/// Ordered partial sums of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSumSequence {
    sums: Vec<f64>,
    source_method: Method,
}

impl PartialSumSequence {
    pub fn new(sums: Vec<f64>, source_method: Method) -> Result<Self, AccelError> {
        if sums.is_empty() {
            return Err(AccelError::TooShort { needed: 1, got: 0 });
        }
        if sums.iter().any(|s| !s.is_finite()) {
            return Err(AccelError::NonFinite);
        }
        Ok(Self {
            sums,
            source_method,
        })
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.sums.last().expect("non-empty by construction")
    }

    pub fn source_method(&self) -> Method {
        self.source_method
    }

    /// Same sequence with runs of repeated values collapsed to one entry.
    ///
    /// Series whose odd terms vanish by parity produce such runs; the
    /// transforms need strictly changing input.
    pub fn without_repeats(&self) -> Self {
        let mut sums: Vec<f64> = Vec::with_capacity(self.sums.len());
        for &s in &self.sums {
            if sums.last() != Some(&s) {
                sums.push(s);
            }
        }
        Self {
            sums,
            source_method: self.source_method,
        }
    }

    /// The first `len` entries.
    pub fn head(&self, len: usize) -> Self {
        Self {
            sums: self.sums[..len.clamp(1, self.sums.len())].to_vec(),
            source_method: self.source_method,
        }
    }

    /// The last `window` entries.
    pub fn tail(&self, window: usize) -> Self {
        let start = self.sums.len().saturating_sub(window.max(1));
        Self {
            sums: self.sums[start..].to_vec(),
            source_method: self.source_method,
        }
    }
}

/// Extrapolated limit and the transform's own error heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accelerated {
    pub value: f64,
    pub error_estimate: f64,
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs())
}

/// Input checks shared by both transforms. Returns the constant when the
/// sequence has already stopped moving.
fn settled_tail(seq: &PartialSumSequence) -> Result<Option<f64>, AccelError> {
    if seq.len() < 3 {
        return Err(AccelError::TooShort {
            needed: 3,
            got: seq.len(),
        });
    }
    let s = seq.sums();
    let n = s.len();
    if s[n - 1] == s[n - 2] {
        return Ok(Some(s[n - 1]));
    }
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(AccelError::DegenerateDifference);
    }
    Ok(None)
}

/// Wynn's ε-algorithm.
///
/// Builds the ε-table column by column and returns the newest entry of the
/// highest even column that could be formed. When a column has converged to
/// rounding level the next column is not formed and that column's entry is
/// returned. The error estimate is the distance between the newest entries of
/// the two highest even columns.
pub fn wynn_epsilon(seq: &PartialSumSequence) -> Result<Accelerated, AccelError> {
    if let Some(c) = settled_tail(seq)? {
        return Ok(Accelerated {
            value: c,
            error_estimate: 0.0,
        });
    }
    let s = seq.sums();
    let mut previous: Vec<f64> = vec![0.0; s.len() + 1]; // ε_{-1}
    let mut current: Vec<f64> = s.to_vec(); // ε_0
    let mut best = *s.last().unwrap();
    let mut best_prev = s[s.len() - 2];
    let mut column = 0usize;

    while current.len() >= 2 {
        let mut next = Vec::with_capacity(current.len() - 1);
        let mut degenerate = false;
        for j in 0..current.len() - 1 {
            let diff = current[j + 1] - current[j];
            let converged = if column % 2 == 0 {
                nearly_equal(current[j + 1], current[j])
            } else {
                diff == 0.0
            };
            if converged {
                degenerate = true;
                break;
            }
            next.push(previous[j + 1] + 1.0 / diff);
        }
        if degenerate {
            if column % 2 == 0 {
                // this even column is flat: its newest entry is the limit
                let value = *current.last().unwrap();
                let error_estimate = if column == 0 {
                    0.0
                } else {
                    (value - best_prev).abs()
                };
                return Ok(Accelerated {
                    value,
                    error_estimate,
                });
            }
            break;
        }
        column += 1;
        previous = current;
        current = next;
        if column % 2 == 0 {
            best_prev = best;
            best = *current.last().unwrap();
        }
        if current.iter().any(|v| !v.is_finite()) {
            break;
        }
    }

    if column < 2 {
        return Err(AccelError::DegenerateDifference);
    }
    Ok(Accelerated {
        value: best,
        error_estimate: (best - best_prev).abs(),
    })
}

/// Iterated Aitken Δ²: apply the transform repeatedly while at least three
/// entries remain, and return the newest entry of the final pass.
pub fn aitken_delta2(seq: &PartialSumSequence) -> Result<Accelerated, AccelError> {
    if let Some(c) = settled_tail(seq)? {
        return Ok(Accelerated {
            value: c,
            error_estimate: 0.0,
        });
    }
    let mut current: Vec<f64> = seq.sums().to_vec();
    let mut prev_last = current[current.len() - 2];
    let mut passes = 0;

    while current.len() >= 3 {
        let mut next = Vec::with_capacity(current.len() - 2);
        for w in current.windows(3) {
            let d1 = w[1] - w[0];
            let d2 = w[2] - w[1];
            let curvature = d2 - d1;
            if nearly_equal(w[2], w[1]) {
                next.push(w[2]);
            } else if curvature == 0.0 {
                return if passes == 0 {
                    Err(AccelError::DegenerateDifference)
                } else {
                    Ok(Accelerated {
                        value: *current.last().unwrap(),
                        error_estimate: (current.last().unwrap() - prev_last).abs(),
                    })
                };
            } else {
                next.push(w[2] - d2 * d2 / curvature);
            }
        }
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        prev_last = *current.last().unwrap();
        current = next;
        passes += 1;
    }

    let value = *current.last().unwrap();
    Ok(Accelerated {
        value,
        error_estimate: (value - prev_last).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(v: &[f64]) -> PartialSumSequence {
        PartialSumSequence::new(v.to_vec(), Method::Series5).unwrap()
    }

    fn geometric_sums(a: f64, r: f64, n: usize) -> Vec<f64> {
        let mut acc = 0.0;
        (0..n)
            .map(|i| {
                acc += a * r.powi(i as i32);
                acc
            })
            .collect()
    }

    #[test]
    fn wynn_halving_series() {
        let out = wynn_epsilon(&seq(&[1.0, 1.5, 1.75, 1.875, 1.9375])).unwrap();
        assert!((out.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn aitken_single_step() {
        let out = aitken_delta2(&seq(&[1.0, 1.5, 1.75])).unwrap();
        assert!((out.value - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_sequences_are_fixed_points() {
        let c = 0.448_220_394_4;
        assert_eq!(wynn_epsilon(&seq(&[c, c, c])).unwrap().value, c);
        assert_eq!(aitken_delta2(&seq(&[c, c, c])).unwrap().value, c);
        assert_eq!(wynn_epsilon(&seq(&[0.1, 0.3, c, c, c])).unwrap().value, c);
        assert_eq!(aitken_delta2(&seq(&[0.1, 0.3, c, c])).unwrap().value, c);
    }

    #[test]
    fn rejects_short_and_interior_ties() {
        assert_eq!(
            wynn_epsilon(&seq(&[1.0, 2.0])),
            Err(AccelError::TooShort { needed: 3, got: 2 })
        );
        assert_eq!(
            aitken_delta2(&seq(&[1.0, 1.0, 2.0, 2.5])),
            Err(AccelError::DegenerateDifference)
        );
        assert_eq!(
            wynn_epsilon(&seq(&[1.0, 1.0, 2.0, 2.5])),
            Err(AccelError::DegenerateDifference)
        );
        assert!(PartialSumSequence::new(vec![1.0, f64::NAN], Method::Series5).is_err());
        assert!(PartialSumSequence::new(vec![], Method::Series5).is_err());
    }

    #[test]
    fn arithmetic_progression_is_degenerate_for_aitken() {
        assert_eq!(
            aitken_delta2(&seq(&[1.0, 2.0, 3.0])),
            Err(AccelError::DegenerateDifference)
        );
    }

    #[test]
    fn two_geometric_modes_need_wynn() {
        // S_n = 1 - 0.8^n + 0.5 (-0.3)^n: Wynn eliminates both modes from five terms.
        let s: Vec<f64> = (0..9)
            .map(|n| 1.0 - 0.8f64.powi(n) + 0.5 * (-0.3f64).powi(n))
            .collect();
        let out = wynn_epsilon(&seq(&s)).unwrap();
        assert!((out.value - 1.0).abs() < 1e-12, "{out:?}");
    }

    #[test]
    fn without_repeats_collapses_runs() {
        let s = seq(&[0.0, 0.0, 1.0, 1.0, 1.5]).without_repeats();
        assert_eq!(s.sums(), &[0.0, 1.0, 1.5]);
        assert_eq!(seq(&[1.0, 2.0, 3.0]).tail(2).sums(), &[2.0, 3.0]);
        assert_eq!(seq(&[1.0, 2.0, 3.0]).head(2).sums(), &[1.0, 2.0]);
    }

    proptest! {
        #[test]
        fn exact_on_geometric_sums(a in 0.1f64..10.0, r in -0.9f64..0.9) {
            prop_assume!(r.abs() > 0.05);
            let limit = a / (1.0 - r);
            let s = seq(&geometric_sums(a, r, 12));
            let w = wynn_epsilon(&s).unwrap();
            let k = aitken_delta2(&s).unwrap();
            prop_assert!(((w.value - limit) / limit).abs() < 1e-12, "wynn {} vs {}", w.value, limit);
            prop_assert!(((k.value - limit) / limit).abs() < 1e-12, "aitken {} vs {}", k.value, limit);
        }

        #[test]
        fn constant_tail_returns_constant(head in proptest::collection::vec(-5.0f64..5.0, 0..5), c in -5.0f64..5.0) {
            let mut v = head;
            v.push(c);
            v.push(c);
            v.push(c);
            let s = PartialSumSequence::new(v, Method::Series5).unwrap();
            prop_assert_eq!(wynn_epsilon(&s).unwrap().value, c);
            prop_assert_eq!(aitken_delta2(&s).unwrap().value, c);
        }
    }
}
