//! Direct cubature of the defining triple integral.
//!
//! The cube `[0, π]³` is cut into `S³` cells, each integrated with an
//! `n × n × n` Gauss–Legendre product rule. Near the band edge the integrand
//! `1/(t − ω)` peaks at the two corners where `ω = 2 + γ`, namely `(0,0,0)`
//! and `(π,π,π)`; the cells touching those corners are replaced by a dyadic
//! cascade of sub-cubes shrinking toward the corner. At `t = 2 + γ` the
//! integrand behaves like `1/r²` there, which is integrable, and each dyadic
//! shell contributes in proportion to its size.
//!
//! Cells are integrated in parallel and reduced in a fixed order, so a given
//! [`QuadratureSpec`] always produces the same bits.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{Acceleration, GreenParams, Method, SeriesEvaluation};
use crate::summation::compensated_sum;

/// Corner refinement only kicks in when `t − (2 + γ)` is below this.
const REFINE_BELOW_GAP: f64 = 1.0;

/// Structure function `ω(x, y, z) = γ cos x cos y + cos y cos z + cos z cos x`.
#[inline]
pub fn omega(x: f64, y: f64, z: f64, gamma: f64) -> f64 {
    let (cx, cy, cz) = (x.cos(), y.cos(), z.cos());
    gamma * cx * cy + cy * cz + cz * cx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    pub subdivisions_per_axis: usize,
    pub corner_refinement_levels: usize,
    pub target_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_axis: 24,
            subdivisions_per_axis: 4,
            corner_refinement_levels: 12,
            target_tol: 1e-10,
        }
    }
}

impl QuadratureSpec {
    /// Deep corner cascade for `t` at (or within `1e-6` of) the band edge.
    pub fn band_edge() -> Self {
        Self {
            corner_refinement_levels: 30,
            target_tol: 1e-8,
            ..Self::default()
        }
    }

    /// The default spec, or [`QuadratureSpec::band_edge`] when `t` sits on the edge.
    pub fn for_params(params: &GreenParams) -> Self {
        if params.gap() < 1e-6 {
            Self::band_edge()
        } else {
            Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 4 {
            return Err(Error::domain("nodes_per_axis must be >= 4"));
        }
        if self.subdivisions_per_axis < 1 {
            return Err(Error::domain("subdivisions_per_axis must be >= 1"));
        }
        if !(self.target_tol.is_finite() && self.target_tol > 0.0) {
            return Err(Error::domain("target_tol must be > 0"));
        }
        Ok(())
    }

    fn refined(&self) -> Self {
        Self {
            subdivisions_per_axis: 2 * self.subdivisions_per_axis,
            ..*self
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of `P_n` by Newton iteration from the Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Axis-aligned box `[lo, hi]` per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    lo: [f64; 3],
    hi: [f64; 3],
}

/// Single-level cubature result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubatureResult {
    pub value: f64,
    pub node_count: usize,
}

fn build_cells(spec: &QuadratureSpec, refine: bool) -> Vec<Cell> {
    let s = spec.subdivisions_per_axis;
    let h = PI / s as f64;
    let edge = |i: usize| if i == s { PI } else { i as f64 * h };
    let mut cells = Vec::new();
    for ix in 0..s {
        for iy in 0..s {
            for iz in 0..s {
                let cell = Cell {
                    lo: [edge(ix), edge(iy), edge(iz)],
                    hi: [edge(ix + 1), edge(iy + 1), edge(iz + 1)],
                };
                let at_origin = ix == 0 && iy == 0 && iz == 0;
                let at_far = ix == s - 1 && iy == s - 1 && iz == s - 1;
                if refine && at_origin {
                    dyadic_cascade(0.0, 1.0, h, spec.corner_refinement_levels, &mut cells);
                } else if refine && at_far {
                    dyadic_cascade(PI, -1.0, h, spec.corner_refinement_levels, &mut cells);
                } else {
                    cells.push(cell);
                }
            }
        }
    }
    cells
}

/// Cover the cube of side `size` at `vertex` (extending in direction `dir`)
/// with `7 · levels + 1` cubes shrinking toward `vertex`.
fn dyadic_cascade(vertex: f64, dir: f64, size: f64, levels: usize, out: &mut Vec<Cell>) {
    let interval = |a: f64, b: f64| {
        let (p, q) = (vertex + dir * a, vertex + dir * b);
        (p.min(q), p.max(q))
    };
    let mut size = size;
    for _ in 0..levels {
        let half = 0.5 * size;
        for child in 1..8u8 {
            let mut lo = [0.0; 3];
            let mut hi = [0.0; 3];
            for axis in 0..3 {
                let far_half = (child >> axis) & 1 == 1;
                let (a, b) = if far_half { (half, size) } else { (0.0, half) };
                let (p, q) = interval(a, b);
                lo[axis] = p;
                hi[axis] = q;
            }
            out.push(Cell { lo, hi });
        }
        size = half;
    }
    let (p, q) = interval(0.0, size);
    out.push(Cell {
        lo: [p; 3],
        hi: [q; 3],
    });
}

/// Which corner a cell's versines are measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Versine {
    /// `e = 1 − cos x = 2 sin²(x/2)`
    FromZero,
    /// `e = 1 + cos x = 2 cos²(x/2)`
    FromPi,
}

impl Versine {
    fn for_cell(cell: &Cell) -> Self {
        let centre: f64 = (0..3).map(|a| cell.lo[a] + cell.hi[a]).sum::<f64>() / 2.0;
        if centre > 1.5 * PI {
            Versine::FromPi
        } else {
            Versine::FromZero
        }
    }

    #[inline]
    fn eval(self, x: f64) -> f64 {
        match self {
            Versine::FromZero => 2.0 * (0.5 * x).sin().powi(2),
            Versine::FromPi => 2.0 * (0.5 * x).cos().powi(2),
        }
    }
}

/// Per-axis node data for one cell: the versine and `w · cos(kx)` at each node.
fn axis_samples(
    rule: &GaussLegendre,
    lo: f64,
    hi: f64,
    k: u32,
    versine: Versine,
) -> (Vec<f64>, Vec<f64>) {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut versines = Vec::with_capacity(rule.nodes.len());
    let mut weighted = Vec::with_capacity(rule.nodes.len());
    for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
        let x = mid + half * xi;
        versines.push(versine.eval(x));
        weighted.push(w * half * (k as f64 * x).cos());
    }
    (versines, weighted)
}

/// Integral of `cos lx cos my cos nz / (t − ω)` over one cell.
///
/// The denominator is assembled as
/// `t − ω = (t − 2 − γ) + γ(1 − cx cy) + (1 − cy cz) + (1 − cz cx)` with
/// `1 − ab = e_a + e_b − e_a e_b`, which holds for both versine choices and
/// stays free of cancellation at whichever corner the cell is close to.
fn cell_integral(cell: &Cell, rule: &GaussLegendre, params: &GreenParams) -> f64 {
    let versine = Versine::for_cell(cell);
    let (ex, wx) = axis_samples(rule, cell.lo[0], cell.hi[0], params.l, versine);
    let (ey, wy) = axis_samples(rule, cell.lo[1], cell.hi[1], params.m, versine);
    let (ez, wz) = axis_samples(rule, cell.lo[2], cell.hi[2], params.n, versine);
    let (gap, gamma) = (params.gap(), params.gamma);
    let mut total = 0.0;
    for a in 0..ex.len() {
        let mut plane = 0.0;
        for b in 0..ey.len() {
            let (ea, eb) = (ex[a], ey[b]);
            let base = gap + gamma * (ea + eb - ea * eb) + ea + eb;
            let mixed = 2.0 - ea - eb;
            let mut line = 0.0;
            for c in 0..ez.len() {
                line += wz[c] / (base + ez[c] * mixed);
            }
            plane += wy[b] * line;
        }
        total += wx[a] * plane;
    }
    total
}

/// One cubature pass at the resolution given by `spec`, normalized by `π⁻³`.
pub fn integrate(params: &GreenParams, spec: &QuadratureSpec) -> Result<CubatureResult> {
    spec.validate()?;
    let gap = params.gap();
    if gap < 0.0 {
        return Err(Error::domain(format!(
            "quadrature requires t >= 2 + gamma = {}, got t = {} (pole inside the domain)",
            params.band_edge(),
            params.t
        )));
    }
    if gap == 0.0 && spec.corner_refinement_levels == 0 {
        return Err(Error::domain(
            "t = 2 + gamma needs corner_refinement_levels >= 1",
        ));
    }
    let refine = gap < REFINE_BELOW_GAP && spec.corner_refinement_levels > 0;
    let rule = GaussLegendre::new(spec.nodes_per_axis);
    let cells = build_cells(spec, refine);
    let parts: Vec<f64> = cells
        .par_iter()
        .map(|cell| cell_integral(cell, &rule, params))
        .collect();
    let n = spec.nodes_per_axis;
    Ok(CubatureResult {
        value: compensated_sum(&parts) / PI.powi(3),
        node_count: cells.len() * n * n * n,
    })
}

/// `G` by cubature. The reported value comes from the finer of two passes
/// (subdivisions doubled); the error estimate is the difference between them.
pub fn green_by_quadrature(
    params: &GreenParams,
    spec: &QuadratureSpec,
) -> Result<SeriesEvaluation> {
    let coarse = integrate(params, spec)?;
    let fine = integrate(params, &spec.refined())?;
    let error = (fine.value - coarse.value).abs();
    Ok(SeriesEvaluation {
        value: fine.value,
        terms_used: fine.node_count + coarse.node_count,
        abs_error_estimate: error,
        method: Method::Quadrature,
        accelerated: Acceleration::None,
        converged: error <= spec.target_tol,
    })
}
