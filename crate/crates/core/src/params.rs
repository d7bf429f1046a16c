//! Evaluation points and result records shared by every method.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(t, γ, l, m, n)` at which the Green function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenParams {
    pub t: f64,
    pub gamma: f64,
    pub l: u32,
    pub m: u32,
    pub n: u32,
}

impl GreenParams {
    /// Validate the invariants that hold for every method: finite `t`,
    /// `γ > 0`, and even `l + m + n`.
    pub fn new(t: f64, gamma: f64, l: u32, m: u32, n: u32) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::domain(format!("t must be finite, got {t}")));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::domain(format!("gamma must be > 0, got {gamma}")));
        }
        if (l as u64 + m as u64 + n as u64) % 2 != 0 {
            return Err(Error::domain(format!(
                "l+m+n must be even, got {l}+{m}+{n}"
            )));
        }
        Ok(Self { t, gamma, l, m, n })
    }

    pub fn isotropic(t: f64, l: u32, m: u32, n: u32) -> Result<Self> {
        Self::new(t, 1.0, l, m, n)
    }

    /// Upper band edge `sup ω = 2 + γ`.
    pub fn band_edge(&self) -> f64 {
        2.0 + self.gamma
    }

    /// Distance of `t` above the band edge.
    pub fn gap(&self) -> f64 {
        self.t - self.band_edge()
    }

    pub fn site(&self) -> [u32; 3] {
        [self.l, self.m, self.n]
    }

    /// Series methods need `t ≥ 2 + γ` (`t ≥ 3` in the isotropic case).
    pub(crate) fn check_series_domain(&self) -> Result<()> {
        if self.t < self.band_edge() {
            return Err(Error::domain(format!(
                "series requires t >= 2 + gamma = {}, got t = {}",
                self.band_edge(),
                self.t
            )));
        }
        Ok(())
    }
}

/// Evaluation route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Single binomial expansion of `1/(t - ω)` in powers of `ω/t`.
    Series5,
    /// Double expansion, first in the `γ cos x cos y` bond, then the rest.
    Series6,
    /// Direct cubature of the defining triple integral.
    Quadrature,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Series5, Method::Series6, Method::Quadrature];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Series5 => "series5",
            Method::Series6 => "series6",
            Method::Quadrature => "quadrature",
        }
    }

    pub fn is_series(&self) -> bool {
        !matches!(self, Method::Quadrature)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series5" => Ok(Method::Series5),
            "series6" => Ok(Method::Series6),
            "quadrature" => Ok(Method::Quadrature),
            other => Err(Error::domain(format!("unknown method '{other}'"))),
        }
    }
}

/// Sequence transform applied to the partial sums.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Acceleration {
    #[default]
    None,
    Wynn,
    Aitken,
}

impl Acceleration {
    pub fn as_str(&self) -> &'static str {
        match self {
            Acceleration::None => "none",
            Acceleration::Wynn => "wynn",
            Acceleration::Aitken => "aitken",
        }
    }
}

impl fmt::Display for Acceleration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Acceleration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Acceleration::None),
            "wynn" => Ok(Acceleration::Wynn),
            "aitken" => Ok(Acceleration::Aitken),
            other => Err(Error::domain(format!("unknown acceleration '{other}'"))),
        }
    }
}

/// A computed value with its convergence metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEvaluation {
    pub value: f64,
    /// Outer series terms summed, or integrand evaluations for quadrature.
    pub terms_used: usize,
    pub abs_error_estimate: f64,
    pub method: Method,
    /// Transform that produced `value`; `None` when the raw sum was kept.
    pub accelerated: Acceleration,
    pub converged: bool,
}
