//! Exact rational scalars and their canonical text form.
//!
//! All arithmetic in the crate is over `Rat` (arbitrary-precision rationals).
//! The canonical text form is `"p"` for integers and `"p/q"` with `q > 0`
//! otherwise; this is what every JSON interface emits and accepts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

/// Parse a rational from its text form (`"3"`, `"-5/7"`).
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| format!("invalid rational numerator {num:?}"))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| format!("invalid rational denominator {den:?}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rat::new(n, d))
}

/// Canonical text form: reduced, positive denominator, denominator 1 omitted.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Floor of a rational as a BigInt.
pub fn rat_floor(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

/// Ceiling of a rational as a BigInt.
pub fn rat_ceil(r: &Rat) -> BigInt {
    r.ceil().to_integer()
}

pub fn rat_is_nonneg(r: &Rat) -> bool {
    !r.is_negative()
}
