//! Exact factorial arithmetic and its floating-point counterpart.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn factorial_int(n: u64) -> BigInt {
    BigInt::from(factorial(n))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `ln(n!)` through `lgamma`.
pub fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

pub fn rational(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

pub fn to_f64(r: &BigRational) -> f64 {
    // numerator and denominator can overflow f64 separately; scale first
    let num = r.numer();
    let den = r.denom();
    match (num.to_f64(), den.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            let shift = num.bits().max(den.bits()).saturating_sub(1000);
            let a = (num >> shift).to_f64().unwrap_or(f64::NAN);
            let b = (den >> shift).to_f64().unwrap_or(f64::NAN);
            a / b
        }
    }
}

/// `p/q` rendered as `"p/q"` (or `"p"` for integers).
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
