//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's numerics: walks are enumerated
//! step by step, integrals are done by adaptive Simpson, and binomials use
//! exact integer arithmetic.

#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;
use std::process::{Command, Output};

/// The twelve nearest neighbours of the FCC lattice with their weights in
/// `ω = γ cos x cos y + cos y cos z + cos z cos x`: each product of cosines
/// splits into four plane waves with amplitude `1/4`.
pub fn fcc_steps(gamma: f64) -> Vec<([i32; 3], f64)> {
    let mut steps = Vec::with_capacity(12);
    for a in [-1, 1] {
        for b in [-1, 1] {
            steps.push(([a, b, 0], gamma / 4.0));
            steps.push(([0, a, b], 0.25));
            steps.push(([a, 0, b], 0.25));
        }
    }
    steps
}

/// Weighted walk counts by explicit enumeration of every step sequence:
/// `result[i][site]` is the summed weight of all `i`-step walks from the
/// origin that end at `site`.
pub fn walk_moments(gamma: f64, max_len: usize) -> Vec<HashMap<[i32; 3], f64>> {
    fn visit(
        pos: [i32; 3],
        weight: f64,
        depth: usize,
        steps: &[([i32; 3], f64)],
        out: &mut Vec<HashMap<[i32; 3], f64>>,
    ) {
        *out[depth].entry(pos).or_insert(0.0) += weight;
        if depth + 1 == out.len() {
            return;
        }
        for (d, w) in steps {
            let next = [pos[0] + d[0], pos[1] + d[1], pos[2] + d[2]];
            visit(next, weight * w, depth + 1, steps, out);
        }
    }
    let steps = fcc_steps(gamma);
    let mut out = vec![HashMap::new(); max_len + 1];
    visit([0, 0, 0], 1.0, 0, &steps, &mut out);
    out
}

pub fn walk_moment(table: &[HashMap<[i32; 3], f64>], i: usize, site: [i32; 3]) -> f64 {
    table[i].get(&site).copied().unwrap_or(0.0)
}

/// Adaptive Simpson with Richardson correction, started on `panels` equal
/// panels so that symmetric integrands cannot fool the first comparison.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, panels: usize) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            let hi = if p + 1 == panels { b } else { lo + h };
            let (flo, fhi) = (f(lo), f(hi));
            let (whole, m, fm) = simpson(f, lo, flo, hi, fhi);
            recurse(f, lo, flo, hi, fhi, whole, m, fm, tol / panels as f64, 40)
        })
        .sum()
}

/// `∫₀^π cos(kx) cosⁿx dx` by adaptive Simpson.
pub fn cosine_integral_numeric(n: u32, k: u32) -> f64 {
    let f = move |x: f64| (k as f64 * x).cos() * x.cos().powi(n as i32);
    adaptive_simpson(&f, 0.0, PI, 1e-15, 16)
}

/// Exact binomial coefficient in 128-bit integers (n ≤ 120).
pub fn binomial_exact(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc
}

/// `π 2⁻ⁿ C(n, (n−k)/2)` when `k ≤ n` and `n + k` is even, else zero.
pub fn cosine_integral_closed_form(n: u64, k: u64) -> f64 {
    if k > n || (n + k) % 2 == 1 {
        return 0.0;
    }
    PI * binomial_exact(n, (n - k) / 2) as f64 * 2f64.powi(-(n as i32))
}

/// `G(3, 0, 0, 0; 1) = 3 Γ(1/3)⁶ / (2^(14/3) π⁴)`, the isotropic band-edge
/// value at the origin.
pub fn fcc_band_edge_constant() -> f64 {
    3.0 * libm::tgamma(1.0 / 3.0).powi(6) / (2f64.powf(14.0 / 3.0) * PI.powi(4))
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greenfcc"))
        .args(args)
        .output()
        .expect("run greenfcc")
}

pub fn json_lines(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect()
}
