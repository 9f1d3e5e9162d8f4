//! Orthonormal monomial basis of weight-`3k` functions on `B^2` and the
//! coherent-state kernel
//!
//! ```text
//! Psi_{(w,eta)}(z, zeta) = (3k-1)(3k-2)/(4 pi^2) * zeta^k conj(eta)^k / (-<z,w>)^{3k}.
//! ```
//!
//! Integrals over the circle bundle are reduced to the ball: the fiber
//! integral keeps only the matching Fourier mode, so pairing `f zeta^k`
//! against the kernel leaves `|zeta|^{2k} = (-<z,z>)^{3k}` under the measure
//! of [`crate::bundle::petersson_inner`].

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::bundle::{bundle_action, CirclePoint, WeightedFunction};
use crate::error::{Error, Result};
use crate::exact::{factorial_int, ln_factorial};
use crate::hermitian::{BallPoint, GroupElement, C64, ZERO};
use crate::quadrature::{ball2_integrate_many, QuadratureSpec};

/// Largest factorial argument on the floating-point path.
pub const MAX_FLOAT_FACTORIAL: u64 = 170;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    pub l: u32,
    pub m: u32,
    pub k: u32,
}

impl BasisIndex {
    pub fn new(l: u32, m: u32, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("basis needs k >= 1".into()));
        }
        Ok(BasisIndex { l, m, k })
    }

    fn top(&self) -> u64 {
        3 * self.k as u64 + self.l as u64 + self.m as u64 - 1
    }
}

/// `(3k+l+m-1)! / (l! m! (3k-3)!)`, the square of `2 pi` times the basis
/// coefficient.
pub fn basis_radicand_exact(idx: BasisIndex) -> BigRational {
    let num = factorial_int(idx.top());
    let den = factorial_int(idx.l as u64)
        * factorial_int(idx.m as u64)
        * factorial_int(3 * idx.k as u64 - 3);
    BigRational::new(num, den)
}

/// `(1/2 pi) sqrt((3k+l+m-1)! / (l! m! (3k-3)!))` via log-gamma.
pub fn basis_coefficient(idx: BasisIndex) -> Result<f64> {
    if idx.top() > MAX_FLOAT_FACTORIAL {
        return Err(Error::InvalidParameter(format!(
            "3k+l+m-1 = {} exceeds the floating-point cap {MAX_FLOAT_FACTORIAL}",
            idx.top()
        )));
    }
    let ln = ln_factorial(idx.top())
        - ln_factorial(idx.l as u64)
        - ln_factorial(idx.m as u64)
        - ln_factorial(3 * idx.k as u64 - 3);
    Ok((0.5 * ln).exp() / (2.0 * PI))
}

/// The monomial part `c z_1^l z_2^m` (without `zeta^k`).
pub fn basis_function(idx: BasisIndex) -> Result<WeightedFunction> {
    let c = basis_coefficient(idx)?;
    Ok(WeightedFunction::new(idx.k, move |z: &BallPoint| {
        z.coords()[0].powu(idx.l) * z.coords()[1].powu(idx.m) * c
    }))
}

/// `F_{l,m,k}(z, zeta)`.
pub fn basis_f(idx: BasisIndex, p: &CirclePoint) -> Result<C64> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: p.dim(),
        });
    }
    let f = basis_function(idx)?;
    Ok(f.eval(p.base()) * p.zeta().powu(idx.k))
}

/// Denominator of the kernel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KernelBase {
    /// `(-<z,w>)^{3k}`, positive at `z = w`.
    #[default]
    NegatedPairing,
    /// `<z,w>^{3k}`.
    AsPrinted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherentState {
    pub point: CirclePoint,
    pub k: u32,
    /// Use the weight-`6k` kernel.
    pub weight_doubling: bool,
    pub base: KernelBase,
}

impl CoherentState {
    pub fn new(point: CirclePoint, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("kernel needs k >= 1".into()));
        }
        if point.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: point.dim(),
            });
        }
        Ok(CoherentState {
            point,
            k,
            weight_doubling: false,
            base: KernelBase::default(),
        })
    }

    pub fn doubled(mut self) -> Self {
        self.weight_doubling = true;
        self
    }

    pub fn with_base(mut self, base: KernelBase) -> Self {
        self.base = base;
        self
    }

    /// Power of `zeta` carried by the kernel.
    pub fn fiber_power(&self) -> u32 {
        if self.weight_doubling {
            2 * self.k
        } else {
            self.k
        }
    }

    /// `(N-1)(N-2) / (4 pi^2)` with `N = 3 * fiber_power`.
    pub fn coefficient(&self) -> f64 {
        let n = 3.0 * self.fiber_power() as f64;
        (n - 1.0) * (n - 2.0) / (4.0 * PI * PI)
    }

    /// `coef / base(z, w)^{3 * fiber_power}`, the kernel without fiber factors.
    fn ball_kernel(&self, z: &BallPoint) -> Result<C64> {
        let pairing = z.lifted_pairing(self.point.base());
        if (-pairing).re <= 0.0 {
            return Err(Error::BranchCut {
                re: -pairing.re,
                im: -pairing.im,
            });
        }
        let base = match self.base {
            KernelBase::NegatedPairing => -pairing,
            KernelBase::AsPrinted => pairing,
        };
        Ok(base.powi(-3 * self.fiber_power() as i32) * self.coefficient())
    }
}

/// `Psi_{(w,eta)}(z, zeta)`.
pub fn coherent_eval(cs: &CoherentState, p: &CirclePoint) -> Result<C64> {
    let kp = cs.fiber_power();
    Ok(cs.ball_kernel(p.base())? * p.zeta().powu(kp) * cs.point.zeta().conj().powu(kp))
}

/// `sum_{l < terms} (N+l)!/l! t^l`, which tends to `N! / (1-t)^{N+1}`.
pub fn factorial_ratio_series(n: u64, t: f64, terms: u64) -> f64 {
    (0..terms)
        .map(|l| (ln_factorial(n + l) - ln_factorial(l)).exp() * t.powi(l as i32))
        .sum()
}

/// `sum_{l, m < terms} (3k+l+m-1)!/(l! m!) x^l y^m`, which tends to
/// `(3k-1)! / (1-x-y)^{3k}`.
pub fn kernel_double_series(k: u32, x: f64, y: f64, terms: u64) -> f64 {
    let base = 3 * k as u64 - 1;
    let mut sum = 0.0;
    for l in 0..terms {
        for m in 0..terms {
            let ln = ln_factorial(base + l + m) - ln_factorial(l) - ln_factorial(m);
            sum += ln.exp() * x.powi(l as i32) * y.powi(m as i32);
        }
    }
    sum
}

/// Reproducing-property residuals for a weighted function.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ReproducingReport {
    /// `f(w) eta^k`.
    pub expected: [f64; 2],
    /// `int conj(Psi_{(w,eta)}) F`.
    pub integral: [f64; 2],
    pub absolute: f64,
    pub relative: f64,
}

/// Compare `F(w, eta)` with the kernel integral of `F = f zeta^{k'}`.
pub fn reproducing_check(
    f: &WeightedFunction,
    cs: &CoherentState,
    spec: QuadratureSpec,
) -> Result<ReproducingReport> {
    let kp = cs.fiber_power();
    if f.k != kp {
        return Err(Error::InvalidParameter(format!(
            "function weight k={} does not match kernel fiber power {kp}",
            f.k
        )));
    }
    let power = 3 * kp as i32 - 3;
    let eta_k = cs.point.zeta().powu(kp);
    let failure = std::sync::Mutex::new(None);
    let vals = ball2_integrate_many(
        |z, out| {
            let kernel = match cs.ball_kernel(z) {
                Ok(v) => v,
                Err(e) => {
                    *failure.lock().expect("poisoned") = Some(e);
                    ZERO
                }
            };
            // conj(Psi) F with the fiber integrated out
            out[0] = kernel.conj() * eta_k * f.eval(z) * 4.0 * z.neg_form().powi(power);
        },
        1,
        spec,
    );
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    let expected = f.eval(cs.point.base()) * eta_k;
    let integral = vals[0];
    let absolute = (expected - integral).norm();
    let relative = if expected.norm() > 0.0 {
        absolute / expected.norm()
    } else {
        absolute
    };
    Ok(ReproducingReport {
        expected: [expected.re, expected.im],
        integral: [integral.re, integral.im],
        absolute,
        relative,
    })
}

/// `max_p |Psi_{(w,eta)}(g^{-1} p) - Psi_{g(w,eta)}(p)|` over `samples`.
pub fn equivariance_check(
    g: &GroupElement,
    cs: &CoherentState,
    samples: &[CirclePoint],
) -> Result<f64> {
    let moved = CoherentState {
        point: bundle_action(g, &cs.point)?,
        ..cs.clone()
    };
    let g_inv = g.inverse();
    let mut worst: f64 = 0.0;
    for p in samples {
        let lhs = coherent_eval(cs, &bundle_action(&g_inv, p)?)?;
        let rhs = coherent_eval(&moved, p)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Exact `(N+l)!/l!` for oracle use.
pub fn factorial_ratio_exact(n: u64, l: u64) -> BigInt {
    factorial_int(n + l) / factorial_int(l)
}
