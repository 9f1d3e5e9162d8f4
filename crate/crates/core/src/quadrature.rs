//! Gauss-Legendre rules, deterministic reductions and tensor quadrature over
//! the ball `B^2`.
//!
//! Parallel work is always collected into an ordered buffer and reduced with
//! [`pairwise_sum`], so results do not depend on the number of worker threads.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hermitian::{BallPoint, C64, ZERO};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = ((i as f64 + 0.75) / (n as f64 + 0.5) * PI).cos();
        let mut dp = 1.0;
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
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn gauss(n: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        Rule {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|wi| wi * half).collect(),
        }
    }

    /// Periodic trapezoid rule on `[0, 2 pi)`.
    pub fn trapezoid_periodic(n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        Rule {
            nodes: (0..n).map(|j| j as f64 * h).collect(),
            weights: vec![h; n],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sequential evaluation with pairwise reduction.
    pub fn integrate<F: Fn(f64) -> C64>(&self, f: F) -> C64 {
        let terms: Vec<C64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .collect();
        pairwise_sum(&terms)
    }

    /// Parallel evaluation with pairwise reduction.
    pub fn par_integrate<F: Fn(f64) -> C64 + Sync>(&self, f: F) -> C64 {
        let terms: Vec<C64> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(&x, &w)| f(x) * w)
            .collect();
        pairwise_sum(&terms)
    }
}

/// Deterministic tree reduction; the split points depend only on the length.
pub fn pairwise_sum(values: &[C64]) -> C64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().fold(ZERO, |acc, v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_real(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_real(&values[..mid]) + pairwise_sum_real(&values[mid..])
}

/// Node counts for tensor quadrature over `B^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes in each of the two radial variables.
    pub n_rad: usize,
    /// Trapezoid nodes in each of the two angles.
    pub n_ang: usize,
    /// Accepted gap between the full rule and the half rule.
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            n_rad: 64,
            n_ang: 64,
            tol: 1e-6,
        }
    }
}

impl QuadratureSpec {
    pub fn new(n_rad: usize, n_ang: usize) -> Self {
        QuadratureSpec {
            n_rad,
            n_ang,
            ..Default::default()
        }
    }

    pub fn halved(&self) -> Self {
        QuadratureSpec {
            n_rad: (self.n_rad / 2).max(1),
            n_ang: (self.n_ang / 2).max(1),
            tol: self.tol,
        }
    }
}

/// Quadrature result with a crude error estimate (full rule vs half rule).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Integral {
    pub value: C64,
    pub est_error: f64,
}

/// `int_{B^2} f dx_1 dy_1 dx_2 dy_2` for several integrands sharing nodes.
///
/// With `z_j = rho_j e^{i t_j}` and `s_j = rho_j^2` the measure is
/// `(1/4) ds_1 ds_2 dt_1 dt_2` on the simplex `s_1 + s_2 < 1`, which is
/// mapped to the unit square by `s_1 = u`, `s_2 = (1 - u) v`.
/// Each integrand receives the ball point and returns a value; integrand `i`
/// is `f(z)[i]`.
pub fn ball2_integrate_many<F>(f: F, count: usize, spec: QuadratureSpec) -> Vec<C64>
where
    F: Fn(&BallPoint, &mut [C64]) + Sync,
{
    let rad = Rule::gauss(spec.n_rad, 0.0, 1.0);
    let ang = Rule::trapezoid_periodic(spec.n_ang);
    let dirs: Vec<C64> = ang.nodes.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let ang_w = ang.weights[0];

    let tiles: Vec<Vec<C64>> = (0..rad.len())
        .into_par_iter()
        .map(|iu| {
            let u = rad.nodes[iu];
            let mut buf = vec![ZERO; count];
            // layout [integrand][node], so each integrand's values are contiguous
            let mut per_v = vec![ZERO; count * rad.len()];
            let mut rows = vec![ZERO; count * dirs.len()];
            let mut row = vec![ZERO; count];
            let mut coords = vec![ZERO; 2];
            for iv in 0..rad.len() {
                let v = rad.nodes[iv];
                let s1 = u;
                let s2 = (1.0 - u) * v;
                let (r1, r2) = (s1.sqrt(), s2.sqrt());
                for (i1, d1) in dirs.iter().enumerate() {
                    row.fill(ZERO);
                    for d2 in &dirs {
                        coords[0] = d1 * r1;
                        coords[1] = d2 * r2;
                        let z = BallPoint::from_trusted(std::mem::take(&mut coords));
                        f(&z, &mut buf);
                        coords = z.into_coords();
                        for (acc, b) in row.iter_mut().zip(&buf) {
                            *acc += b;
                        }
                    }
                    for (i, r) in row.iter().enumerate() {
                        rows[i * dirs.len() + i1] = *r;
                    }
                }
                let w = rad.weights[iv] * (1.0 - u) * 0.25 * ang_w * ang_w;
                for i in 0..count {
                    let s = pairwise_sum(&rows[i * dirs.len()..(i + 1) * dirs.len()]);
                    per_v[i * rad.len() + iv] = s * w;
                }
            }
            (0..count)
                .map(|i| pairwise_sum(&per_v[i * rad.len()..(i + 1) * rad.len()]) * rad.weights[iu])
                .collect::<Vec<_>>()
        })
        .collect();

    (0..count)
        .map(|i| {
            let col: Vec<C64> = tiles.iter().map(|t| t[i]).collect();
            pairwise_sum(&col)
        })
        .collect()
}

/// Single-integrand form of [`ball2_integrate_many`] with the half-rule
/// error estimate.
pub fn ball2_integrate<F>(f: F, spec: QuadratureSpec) -> Integral
where
    F: Fn(&BallPoint) -> C64 + Sync,
{
    let g = |z: &BallPoint, out: &mut [C64]| out[0] = f(z);
    let full = ball2_integrate_many(g, 1, spec)[0];
    let half = ball2_integrate_many(g, 1, spec.halved())[0];
    Integral {
        value: full,
        est_error: (full - half).norm(),
    }
}
