//! Cylinder coordinates around the axis of a hyperbolic element, the tori
//! `T(l)` over the invariant cylinders and their Bohr-Sommerfeld integrals.
//!
//! In normalized coordinates `w = A^{-1} z` the element acts by the normal
//! form, and
//!
//! ```text
//! w_2 = (r e^{i phi} - i) / (r e^{i phi} + i),   w_1 = sqrt(1 - |w_2|^2) R e^{i Theta}.
//! ```
//!
//! The lifted torus sits on `phi = pi/2`, `R = R_0 = sqrt(l / (3k + l))`
//! with fiber phase `psi = -(l/k) Theta`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bundle::{
    alpha_form, bundle_action, push_tangent, theta_form, CirclePoint, SignConvention, Tangent,
};
use crate::error::{Error, Result};
use crate::hermitian::{act, BallPoint, GroupElement, C64};
use crate::quadrature::{pairwise_sum, Rule};
use crate::spectral::{build_a, hyperbolic_data, normal_form, HyperbolicData};

/// Gauss nodes used for the Bohr-Sommerfeld line integrals.
pub const BS_NODES: usize = 2048;

const I: C64 = C64::new(0.0, 1.0);
const TAU: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CylCoords {
    pub r: f64,
    pub phi: f64,
    pub radius: f64,
    pub theta: f64,
}

impl CylCoords {
    pub fn new(r: f64, phi: f64, radius: f64, theta: f64) -> Result<Self> {
        let ok = r.is_finite()
            && r > 0.0
            && phi > 0.0
            && phi < PI
            && (0.0..1.0).contains(&radius)
            && theta.is_finite();
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "cylinder coordinates out of range: r={r} phi={phi} R={radius}"
            )));
        }
        Ok(CylCoords {
            r,
            phi,
            radius,
            theta: theta.rem_euclid(TAU),
        })
    }
}

pub fn coords_to_ball(c: &CylCoords) -> Result<BallPoint> {
    let c = CylCoords::new(c.r, c.phi, c.radius, c.theta)?;
    let s = C64::from_polar(c.r, c.phi);
    let w2 = (s - I) / (s + I);
    let w1 = C64::from_polar((1.0 - w2.norm_sqr()).sqrt() * c.radius, c.theta);
    BallPoint::new(vec![w1, w2])
}

pub fn ball_to_coords(w: &BallPoint) -> Result<CylCoords> {
    if w.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: w.dim(),
        });
    }
    let (w1, w2) = (w.coords()[0], w.coords()[1]);
    let s = I * (C64::new(1.0, 0.0) + w2) / (C64::new(1.0, 0.0) - w2);
    let radius = w1.norm() / (1.0 - w2.norm_sqr()).sqrt();
    let theta = if w1.norm() > 0.0 { w1.arg() } else { 0.0 };
    CylCoords::new(s.norm(), s.arg(), radius, theta)
}

/// Curve on the quotient torus along which `theta` is integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TorusLoop {
    /// `Theta` over `[0, 2 pi m]` at fixed `r`.
    Theta(i64),
    /// `r` over `[1, lambda^2]`, closed by the identification.
    Radial,
}

/// Torus parameters together with the normalizer of the hyperbolic element.
#[derive(Clone, Debug)]
pub struct TorusSpec {
    pub k: u32,
    pub l: u32,
    pub hyp: HyperbolicData,
    pub normalizer: GroupElement,
    pub gamma: GroupElement,
    pub radius: f64,
}

impl TorusSpec {
    pub fn new(k: u32, l: u32, hyp: HyperbolicData) -> Result<Self> {
        if k == 0 || l == 0 {
            return Err(Error::InvalidParameter("k and l must be positive".into()));
        }
        let normalizer = build_a(&hyp)?;
        let gamma = normal_form(hyp.lambda)?;
        Ok(TorusSpec {
            k,
            l,
            radius: bs_radius(k, l),
            hyp,
            normalizer,
            gamma,
        })
    }

    /// Spec for the hyperbolic element itself given as a matrix.
    pub fn for_element(k: u32, l: u32, g: &GroupElement) -> Result<Self> {
        TorusSpec::new(k, l, hyperbolic_data(g, crate::hermitian::EPS_GRP)?)
    }

    /// Spec for the normal form with eigenvalue `lambda` (here `A` is the
    /// identity).
    pub fn normal(k: u32, l: u32, lambda: f64) -> Result<Self> {
        TorusSpec::for_element(k, l, &normal_form(lambda)?)
    }

    /// Same torus family drawn at a different radius.
    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "radius {radius} outside (0,1)"
            )));
        }
        self.radius = radius;
        Ok(self)
    }

    pub fn lambda(&self) -> f64 {
        self.hyp.lambda
    }

    /// `-(l/k)`, the fiber phase per unit `Theta`.
    pub fn phase_rate(&self) -> f64 {
        -(self.l as f64) / self.k as f64
    }
}

/// `sqrt(l / (3k + l))`.
pub fn bs_radius(k: u32, l: u32) -> f64 {
    (l as f64 / (3 * k + l) as f64).sqrt()
}

/// Image of cylinder coordinates under the normal-form element, through
/// the ball action.
pub fn gamma_in_coords(spec: &TorusSpec, c: &CylCoords) -> Result<CylCoords> {
    ball_to_coords(&act(&spec.gamma, &coords_to_ball(c)?)?)
}

/// A point of a torus together with its two coordinate tangents.
#[derive(Clone, Debug)]
pub struct TorusSample {
    pub point: CirclePoint,
    pub d_r: Tangent,
    pub d_theta: Tangent,
}

/// Point of the lifted torus in normalized coordinates, with analytic
/// tangents.
pub fn torus_sample(spec: &TorusSpec, r: f64, theta: f64) -> Result<TorusSample> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r = {r} must be positive")));
    }
    let big_r = spec.radius;
    let e = C64::from_polar(1.0, theta);
    let sr = r.sqrt();
    let rp1 = r + 1.0;
    let w2 = C64::new((r - 1.0) / rp1, 0.0);
    let w1 = e * (2.0 * sr / rp1 * big_r);
    let z = BallPoint::new(vec![w1, w2])?;
    let psi = spec.phase_rate() * theta;
    let point = CirclePoint::with_phase(z, psi);
    let zeta = point.zeta();

    let dw1_dr = e * (big_r * (1.0 - r) / (sr * rp1 * rp1));
    let dw2_dr = C64::new(2.0 / (rp1 * rp1), 0.0);
    // |zeta| = (4 r (1 - R^2) / (r+1)^2)^{3/2}
    let dln_mod = 1.5 * (1.0 - r) / (r * rp1);
    let d_r = Tangent {
        dz: vec![dw1_dr, dw2_dr],
        dzeta: zeta * dln_mod,
    };
    let d_theta = Tangent {
        dz: vec![I * w1, C64::new(0.0, 0.0)],
        dzeta: zeta * I * spec.phase_rate(),
    };
    Ok(TorusSample {
        point,
        d_r,
        d_theta,
    })
}

pub fn torus_point(spec: &TorusSpec, r: f64, theta: f64) -> Result<CirclePoint> {
    Ok(torus_sample(spec, r, theta)?.point)
}

/// The sample transported by `A` onto the torus around the original axis.
pub fn lambda_sample(spec: &TorusSpec, r: f64, theta: f64) -> Result<TorusSample> {
    let s = torus_sample(spec, r, theta)?;
    let a = &spec.normalizer;
    Ok(TorusSample {
        point: bundle_action(a, &s.point)?,
        d_r: push_tangent(a, &s.point, &s.d_r)?,
        d_theta: push_tangent(a, &s.point, &s.d_theta)?,
    })
}

pub fn lambda_point(spec: &TorusSpec, r: f64, theta: f64) -> Result<CirclePoint> {
    Ok(lambda_sample(spec, r, theta)?.point)
}

/// Deterministic sample grid over one fundamental domain
/// `r in [1, lambda^2)`, `Theta in [0, 2 pi)`.
fn sample_grid(spec: &TorusSpec, samples: usize) -> Vec<(f64, f64)> {
    let l2 = spec.lambda().powi(2);
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    (0..samples)
        .map(|j| {
            let t = (j as f64 + 0.5) / samples as f64;
            (l2.powf(t), TAU * (j as f64 * golden).fract())
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LegendrianReport {
    /// `max |alpha|` over tangents of the lifted torus.
    pub torus: f64,
    /// The same after transport by `A`.
    pub transported: f64,
}

impl LegendrianReport {
    pub fn max(&self) -> f64 {
        self.torus.max(self.transported)
    }
}

pub fn legendrian_residual(spec: &TorusSpec, samples: usize) -> Result<LegendrianReport> {
    let conv = SignConvention::Legendrian;
    let eval = |s: &TorusSample| {
        alpha_form(&s.point, &s.d_r, conv)
            .norm()
            .max(alpha_form(&s.point, &s.d_theta, conv).norm())
    };
    let mut rep = LegendrianReport {
        torus: 0.0,
        transported: 0.0,
    };
    for (r, th) in sample_grid(spec, samples) {
        rep.torus = rep.torus.max(eval(&torus_sample(spec, r, th)?));
        rep.transported = rep.transported.max(eval(&lambda_sample(spec, r, th)?));
    }
    Ok(rep)
}

/// Result of a Bohr-Sommerfeld line integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BsValue {
    pub curve: TorusLoop,
    /// `oint theta` as a complex number.
    pub raw: [f64; 2],
    /// `(3k / 2 pi) Re oint theta`.
    pub value: f64,
    /// Distance of `value` to the nearest integer.
    pub integrality_defect: f64,
}

fn theta_integral<F>(a: f64, b: f64, f: F) -> Result<C64>
where
    F: Fn(f64) -> Result<C64>,
{
    let rule = Rule::gauss(BS_NODES, a, b);
    let mut terms = Vec::with_capacity(rule.len());
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        terms.push(f(t)? * w);
    }
    Ok(pairwise_sum(&terms))
}

/// `(3k/2 pi) oint theta` along a loop of the quotient torus.
///
/// Angular loops run on the transported torus at `r = 1`. The radial loop is
/// evaluated on the covering segment in normalized coordinates.
pub fn bs_integral(spec: &TorusSpec, curve: TorusLoop) -> Result<BsValue> {
    let conv = SignConvention::Legendrian;
    let raw = match curve {
        TorusLoop::Theta(0) => C64::new(0.0, 0.0),
        TorusLoop::Theta(m) => theta_integral(0.0, TAU * m as f64, |th| {
            let s = lambda_sample(spec, 1.0, th)?;
            Ok(theta_form(s.point.base(), &s.d_theta.dz, conv))
        })?,
        TorusLoop::Radial => {
            let end = spec.lambda().powi(2);
            let start_img = act(&spec.gamma, torus_point(spec, 1.0, 0.0)?.base())?;
            let end_pt = torus_point(spec, end, 0.0)?;
            let gap = start_img
                .coords()
                .iter()
                .zip(end_pt.base().coords())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if gap > 1e-9 {
                return Err(Error::CurveNotClosed);
            }
            theta_integral(1.0, end, |r| {
                let s = torus_sample(spec, r, 0.0)?;
                Ok(theta_form(s.point.base(), &s.d_r.dz, conv))
            })?
        }
    };
    let value = 3.0 * spec.k as f64 / TAU * raw.re;
    Ok(BsValue {
        curve,
        raw: [raw.re, raw.im],
        value,
        integrality_defect: (value - value.round()).abs(),
    })
}

/// `r = r_0 lambda^{2n}` with `r_0` in `[1, lambda^2)`; returns `(r_0, n)`.
pub fn reduce_r(spec: &TorusSpec, r: f64) -> Result<(f64, i64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r = {r} must be positive")));
    }
    let l2 = spec.lambda().powi(2);
    let mut n = (r.ln() / l2.ln()).floor() as i64;
    let mut r0 = r / l2.powi(n as i32);
    // guard the floor against rounding at the domain edges
    if r0 >= l2 {
        r0 /= l2;
        n += 1;
    } else if r0 < 1.0 {
        r0 *= l2;
        n -= 1;
    }
    Ok((r0, n))
}
