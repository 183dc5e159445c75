//! Exact rational scalars.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Scalar = BigRational;

pub fn int(v: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (t, "1"),
    };
    let p = BigInt::from_str(num).map_err(|_| Error::ScalarParse(s.to_string()))?;
    let q = BigInt::from_str(den).map_err(|_| Error::ScalarParse(s.to_string()))?;
    if q.is_zero() {
        return Err(Error::ScalarParse(s.to_string()));
    }
    Ok(Scalar::new(p, q))
}

/// Serializes as `"p/q"`, including a denominator of 1.
pub fn format_ratio(x: &Scalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn is_one(x: &Scalar) -> bool {
    x.is_one()
}

pub fn sign(x: &Scalar) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

pub fn is_integer(x: &Scalar) -> bool {
    x.denom().is_one()
}
