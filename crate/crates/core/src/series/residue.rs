//! The radial integral `int_0^inf r^p / (r - a)^{N+1} dr` with `p = 3k+l-1`,
//! `N = 6k+2l-1`, and the exact coefficients around it.
//!
//! For `a < 0` the integral equals `-res_{z=a} z^p ln z / (z - a)^{N+1}`.
//! The residue is `L a^{-(p+1)}` where the Leibniz expansion of
//! `d^N (z^p ln z) / N!` gives `L = (-1)^p (p!)^2 / N!`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{binomial, factorial_int, ln_factorial};
use crate::hermitian::C64;
use crate::quadrature::{Integral, Rule};

fn exponents(k: u32, l: u32) -> Result<(u64, u64)> {
    if k == 0 || l == 0 {
        return Err(Error::InvalidParameter("k and l must be positive".into()));
    }
    let p = 3 * k as u64 + l as u64 - 1;
    Ok((p, 2 * p + 1))
}

fn sign(e: u64) -> BigInt {
    if e.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// `sum_{j=0}^{p} (-1)^j p! / (j! j! (N-j)!)`, summed exactly as printed.
pub fn c1_sum(k: u32, l: u32) -> Result<BigRational> {
    let (p, n) = exponents(k, l)?;
    let pf = factorial_int(p);
    let mut acc = BigRational::zero();
    for j in 0..=p {
        let jf = factorial_int(j);
        let den = &jf * &jf * factorial_int(n - j);
        acc += BigRational::new(sign(j) * &pf, den);
    }
    Ok(acc)
}

/// Coefficient `L` of `a^{-(3k+l)}` in the residue, from the term-by-term
/// Leibniz expansion.
pub fn leibniz_coefficient(k: u32, l: u32) -> Result<BigRational> {
    let (p, n) = exponents(k, l)?;
    let pf = factorial_int(p);
    let mut acc = BigRational::zero();
    for j in 0..=p {
        // (z^p)^{(j)} = p!/(p-j)! z^{p-j};  (ln z)^{(m)} = (-1)^{m-1} (m-1)! z^{-m}
        let m = n - j;
        let term = BigInt::from(binomial(n, j)) * &pf * factorial_int(m - 1) * sign(m - 1);
        acc += BigRational::new(term, factorial_int(p - j));
    }
    Ok(acc / BigRational::from_integer(factorial_int(n)))
}

/// Residue coefficient normalized against `(-a)`:
/// `res = c1_residue * (-a)^{-(3k+l)}`, so that
/// `int_0^inf = -c1_residue |a|^{-(3k+l)}` for `a < 0`.
pub fn c1_residue(k: u32, l: u32) -> Result<BigRational> {
    let (p, _) = exponents(k, l)?;
    Ok(leibniz_coefficient(k, l)? * BigRational::from_integer(sign(p + 1)))
}

/// `-(p!)^2 / N!`.
pub fn c1_closed_form(k: u32, l: u32) -> Result<BigRational> {
    let (p, n) = exponents(k, l)?;
    let pf = factorial_int(p);
    Ok(BigRational::new(-(&pf * &pf), factorial_int(n)))
}

/// `int_0^inf r^p / (r - a)^{N+1} dr` for `a < 0`.
///
/// Uses `r = t / (1 - t)`, which turns the integrand into
/// `t^p (1-t)^p / (t + |a| (1-t))^{N+1}` on `(0,1)`; the Gauss rule is doubled
/// from `start_nodes` until two successive values agree to `tol` relative.
pub fn radial_integral(a: f64, k: u32, l: u32, start_nodes: usize, tol: f64) -> Result<Integral> {
    if !(a < 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("radial integral needs a < 0, got {a}")));
    }
    let (p, n) = exponents(k, l)?;
    let b = -a;
    let eval = |nodes: usize| {
        Rule::gauss(nodes, 0.0, 1.0)
            .integrate(|t| {
                let s = 1.0 - t;
                let v = (t * s).powi(p as i32) / (t + b * s).powi((n + 1) as i32);
                C64::new(v, 0.0)
            })
            .re
    };
    let mut nodes = start_nodes.max(2);
    let mut prev = eval(nodes);
    for _ in 0..12 {
        nodes *= 2;
        let next = eval(nodes);
        let err = (next - prev).abs();
        if err <= tol * next.abs() {
            return Ok(Integral {
                value: C64::new(next, 0.0),
                est_error: err,
            });
        }
        prev = next;
    }
    Err(Error::NonConvergent {
        est_error: (eval(nodes) - prev).abs(),
    })
}

/// `B(p+1, N-p) |a|^{p-N} = p! (N-p-1)! / N! |a|^{p-N}` in floating point.
pub fn radial_integral_beta(a: f64, k: u32, l: u32) -> Result<f64> {
    let (p, n) = exponents(k, l)?;
    let ln = ln_factorial(p) + ln_factorial(n - p - 1) - ln_factorial(n);
    Ok(ln.exp() * a.abs().powi(p as i32 - n as i32))
}
