//! Integral of the weight-`6k` coherent state over the lifted torus against
//! the half-form `(i/2) dTheta ^ dr / r`, and the constant relating it to the
//! seed `q_l(z) zeta^{2k}`.

use std::f64::consts::PI;

use num_traits::ToPrimitive;
use serde::Serialize;

use super::residue::{c1_residue, c1_sum, leibniz_coefficient};
use super::SeedData;
use crate::bundle::{bundle_action, CirclePoint};
use crate::coherent::{coherent_eval, CoherentState};
use crate::error::{Error, Result};
use crate::exact::{binomial, ln_factorial, to_f64};
use crate::hermitian::{act, BallPoint, C64, ZERO};
use crate::quadrature::{pairwise_sum, QuadratureSpec, Rule};
use crate::torus::TorusSpec;

const I: C64 = C64::new(0.0, 1.0);

/// Node counts for the torus integral: Gauss in `t = r/(1+r)`, trapezoid in
/// `Theta`.
pub fn default_torus_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        n_rad: 256,
        n_ang: 64,
        tol: 1e-6,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorusIntegral {
    pub value: C64,
    pub est_error: f64,
    /// Smallest `|B / A'|` over the radial nodes; the contour argument needs
    /// it above one.
    pub min_contour_ratio: f64,
}

/// Affine coordinates of `A^{-1} z`.
fn normalized_coords(spec: &TorusSpec, z: &BallPoint) -> Result<(C64, C64)> {
    let w = act(&spec.normalizer.inverse(), z)?;
    Ok((w.coords()[0], w.coords()[1]))
}

/// `A' = 2 v_1 sqrt(r) R`, `B = v_2 (r - 1) - r - 1`.
fn contour_pieces(v1: C64, v2: C64, r: f64, radius: f64) -> (C64, C64) {
    (v1 * (2.0 * r.sqrt() * radius), v2 * (r - 1.0) - (r + 1.0))
}

/// `int_0^{2 pi} e^{i mode Theta} / (A' e^{-i Theta} + B)^{6k} dTheta` by
/// the trapezoid rule.
pub fn angular_mode_numeric(v1: C64, v2: C64, r: f64, radius: f64, k: u32, mode: i64, nodes: usize) -> C64 {
    let (a, b) = contour_pieces(v1, v2, r, radius);
    let rule = Rule::trapezoid_periodic(nodes);
    rule.integrate(|th| C64::from_polar(1.0, mode as f64 * th) * (a * C64::from_polar(1.0, -th) + b).powi(-6 * k as i32))
}

/// Residue form of [`angular_mode_numeric`]: only `mode >= 0` survives,
/// `2 pi binom(6k+mode-1, mode) (-A')^mode / B^{6k+mode}`.
pub fn angular_mode_closed(v1: C64, v2: C64, r: f64, radius: f64, k: u32, mode: i64) -> C64 {
    if mode < 0 {
        return ZERO;
    }
    let (a, b) = contour_pieces(v1, v2, r, radius);
    let m = mode as u64;
    let c = binomial(6 * k as u64 + m - 1, m).to_f64().unwrap_or(f64::INFINITY);
    (-a).powu(m as u32) * b.powi(-(6 * k as i32 + mode as i32)) * (2.0 * PI * c)
}

fn integrate_once(spec: &TorusSpec, p: &CirclePoint, quad: QuadratureSpec, phase_rate: f64) -> Result<(C64, f64)> {
    let (v1, v2) = normalized_coords(spec, p.base())?;
    let rad = Rule::gauss(quad.n_rad, 0.0, 1.0);
    let ang = Rule::trapezoid_periodic(quad.n_ang);
    let mut min_ratio = f64::INFINITY;
    let mut per_r = Vec::with_capacity(rad.len());
    for (&t, &wt) in rad.nodes.iter().zip(&rad.weights) {
        let r = t / (1.0 - t);
        let dr_dt = 1.0 / ((1.0 - t) * (1.0 - t));
        let (a, b) = contour_pieces(v1, v2, r, spec.radius);
        if a.norm() > 0.0 {
            min_ratio = min_ratio.min(b.norm() / a.norm());
        }
        let mut per_theta = Vec::with_capacity(ang.len());
        for &th in &ang.nodes {
            let w = crate::torus::torus_point(spec, r, th)?;
            let on_torus = CirclePoint::with_phase(w.base().clone(), phase_rate * th);
            let moved = bundle_action(&spec.normalizer, &on_torus)?;
            let cs = CoherentState::new(moved, spec.k)?.doubled();
            per_theta.push(coherent_eval(&cs, p)?);
        }
        let inner = pairwise_sum(&per_theta) * ang.weights[0];
        per_r.push(inner * (wt * dr_dt / r));
    }
    Ok((pairwise_sum(&per_r) * I * 0.5, min_ratio))
}

/// `int Psi_{(u,eta)}(z, zeta) nu` over the lifted torus around the axis.
///
/// `fiber_mode` overrides the Fourier mode `2l` that the fiber phase
/// contributes in `Theta`.
pub fn torus_integral(spec: &TorusSpec, p: &CirclePoint, quad: QuadratureSpec, fiber_mode: Option<i64>) -> Result<TorusIntegral> {
    let k = spec.k as f64;
    let mode = fiber_mode.unwrap_or(2 * spec.l as i64);
    let rate = -(mode as f64) / (2.0 * k);
    let (full, min_ratio) = integrate_once(spec, p, quad, rate)?;
    if min_ratio <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "contour precondition |B/A| > 1 fails (min {min_ratio})"
        )));
    }
    let half_spec = QuadratureSpec {
        n_rad: quad.n_rad / 2,
        ..quad
    };
    let (half, _) = integrate_once(spec, p, half_spec, rate)?;
    let est_error = (full - half).norm();
    if est_error > quad.tol * full.norm().max(f64::MIN_POSITIVE) && fiber_mode.is_none() {
        return Err(Error::NonConvergent { est_error });
    }
    Ok(TorusIntegral {
        value: full,
        est_error,
        min_contour_ratio: min_ratio,
    })
}

/// `torus_integral / (q_l(z) zeta^{2k})`.
pub fn empirical_constant(spec: &TorusSpec, p: &CirclePoint, quad: QuadratureSpec) -> Result<C64> {
    let seed = SeedData::from_torus(spec);
    let ti = torus_integral(spec, p, quad, None)?;
    Ok(ti.value / (seed.q_l(p.base())? * p.zeta().powu(2 * spec.k)))
}

/// Closed-form candidates for the constant, all evaluated at the same
/// `<Y, X>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantVariants {
    /// The displayed constant with the printed alternating sum.
    pub printed: C64,
    /// The displayed constant with the Leibniz residue coefficient in place of
    /// the printed sum.
    pub printed_with_residue: C64,
    /// The last line of the derivation, with the printed sum.
    pub derivation_final_line: C64,
    /// Re-derived: `(i/4 pi) (p!)^2 / ((6k-3)! (2l)!) (3k)^{3k} l^l / (3k+l)^{3k+l} (-2 <Y,X>)^{3k+l}`.
    pub derived: C64,
}

pub fn constant_variants(k: u32, l: u32, yx: C64) -> Result<ConstantVariants> {
    if k == 0 || l == 0 {
        return Err(Error::InvalidParameter("k and l must be positive".into()));
    }
    let (k64, l64) = (k as u64, l as u64);
    let s = 3 * k64 + l64;
    let p = s - 1;
    let n = 2 * p + 1;
    let ln_shape = (3 * k64) as f64 * ((3 * k64) as f64).ln()
        + l as f64 * (l as f64).ln()
        - s as f64 * (s as f64).ln();
    let shape = ln_shape.exp();
    let fact_ratio = (ln_factorial(n) - ln_factorial(6 * k64 - 3) - ln_factorial(2 * l64)).exp();
    let c1_printed = to_f64(&c1_sum(k, l)?);
    let c1_leibniz = to_f64(&leibniz_coefficient(k, l)?);
    let pw = s as i32;

    let printed_base = I * 2f64.powi(pw - 2) * fact_ratio * shape * yx.powi(pw);
    let final_line = I
        * 2f64.powi(6 * k as i32 + 2 * l as i32 - 2)
        * fact_ratio
        * shape
        * (yx * 0.5).powi(-pw)
        * c1_printed;
    let derived_coef = (2.0 * ln_factorial(p) - ln_factorial(6 * k64 - 3) - ln_factorial(2 * l64)).exp();
    let derived = I / (4.0 * PI) * derived_coef * shape * (yx * -2.0).powi(pw);
    Ok(ConstantVariants {
        printed: printed_base * c1_printed,
        printed_with_residue: printed_base * c1_leibniz,
        derivation_final_line: final_line,
        derived,
    })
}

/// `(p!)^2 / N!` as a float; equals `-c1_residue`.
pub fn residue_magnitude(k: u32, l: u32) -> Result<f64> {
    Ok(-to_f64(&c1_residue(k, l)?))
}
