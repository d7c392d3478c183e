//! Exact rational arithmetic helpers.
//!
//! The exact counting path compares `|f(p1/q) - p2/q|` against `delta/Q`
//! without any floating-point ambiguity, so everything threshold-shaped is
//! carried as a [`Rat`]. An `f64` converts to a `Rat` losslessly (every
//! finite double is a dyadic rational), which is how interval endpoints and
//! decimal CLI inputs enter the exact path.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// `n/d` as a rational. Panics on `d = 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact conversion; `None` for NaN/infinite.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Largest integer `<= r`, as i64. `None` when out of i64 range.
pub fn floor_i64(r: &Rat) -> Option<i64> {
    r.floor().to_integer().to_i64()
}

/// Smallest integer `>= r`, as i64. `None` when out of i64 range.
pub fn ceil_i64(r: &Rat) -> Option<i64> {
    r.ceil().to_integer().to_i64()
}

pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

/// Parse `a/b`, an integer, or a decimal string into an exact rational.
pub fn rat_parse(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1, s),
    };
    let r = match body.split_once('.') {
        None => Rat::from_integer(body.parse::<BigInt>().ok()?),
        Some((int, frac)) => {
            let int: BigInt = if int.is_empty() { BigInt::from(0) } else { int.parse().ok()? };
            if frac.is_empty() {
                Rat::from_integer(int)
            } else {
                let num: BigInt = frac.parse().ok()?;
                let den = BigInt::from(10u32).pow(frac.len() as u32);
                Rat::from_integer(int) + Rat::new(num, den)
            }
        }
    };
    Some(rat_int(sign) * r)
}

/// Evaluate a polynomial with rational coefficients (ascending degree) by
/// Horner's rule.
pub fn poly_eval(coeffs: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Derivative coefficients of a rational-coefficient polynomial.
pub fn poly_derivative(coeffs: &[Rat]) -> Vec<Rat> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * rat_int(i as i64))
        .collect()
}
