//! Face-centered cubic lattice Green function
//!
//! `G(t, l, m, n; γ) = π⁻³ ∫∫∫_{[0,π]³} cos(lx) cos(my) cos(nz) / (t − ω) dx dy dz`
//! with `ω = γ cos x cos y + cos y cos z + cos z cos x`.
//!
//! The function is evaluated by two binomial-expansion series built from
//! closed-form cosine-power integrals ([`green_series`]) and cross-checked
//! by a direct tensor-product Gauss–Legendre cubature of the integral
//! ([`oracle_quadrature`]). Partial sums can be extrapolated with Wynn's
//! ε-algorithm or iterated Aitken Δ² ([`acceleration`]).

pub mod acceleration;
pub mod basic_integrals;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod green_series;
pub mod oracle_quadrature;
pub mod params;
pub mod summation;

pub use error::{AccelError, Error, Result};
pub use green_series::{evaluate_series5, evaluate_series6, SeriesOptions};
pub use oracle_quadrature::{green_by_quadrature, QuadratureSpec};
pub use params::{Acceleration, GreenParams, Method, SeriesEvaluation};
