//! Exact rational arithmetic carrier and its text forms.
//!
//! Every quantity in the game (collections, totals, levels, costs, slopes,
//! utilities) is a [`Rational`]. Text form is `p/q` with the denominator
//! omitted when it is 1; decimals are converted exactly on input.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{FairexError, Result};

/// Arbitrary-precision rational, canonical (gcd 1, positive denominator).
pub type Rational = num_rational::BigRational;

/// Shorthand for small rationals in code and tests.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand for integer-valued rationals.
pub fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, a plain integer, or an exact decimal such as `3.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(FairexError::Parse("empty rational".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| FairexError::Parse(format!("bad numerator in `{s}`")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| FairexError::Parse(format!("bad denominator in `{s}`")))?;
        if d.is_zero() {
            return Err(FairexError::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(FairexError::Parse(format!("bad decimal `{s}`")));
        }
        let negative = int_part.trim_start().starts_with('-');
        let i: BigInt = if int_part == "-" || int_part.is_empty() {
            BigInt::zero()
        } else {
            int_part
                .parse()
                .map_err(|_| FairexError::Parse(format!("bad decimal `{s}`")))?
        };
        let f: BigInt = frac_part
            .parse()
            .map_err(|_| FairexError::Parse(format!("bad decimal `{s}`")))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let abs = i.abs() * &scale + f;
        let signed = if negative { -abs } else { abs };
        return Ok(Rational::new(signed, scale));
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| FairexError::Parse(format!("bad rational `{s}`")))?;
    Ok(Rational::from_integer(n))
}

/// Canonical text form: `p` when integral, else `p/q`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact comparison with an allocation-free cross-multiplication fast path
/// for machine-word operands. Solver selection loops compare millions of
/// small breakpoints; the generic bignum path allocates on every call.
pub fn cmp_fast(a: &Rational, b: &Rational) -> std::cmp::Ordering {
    use num_traits::ToPrimitive;
    match (
        a.numer().to_i64(),
        a.denom().to_i64(),
        b.numer().to_i64(),
        b.denom().to_i64(),
    ) {
        (Some(an), Some(ad), Some(bn), Some(bd)) => {
            (an as i128 * bd as i128).cmp(&(bn as i128 * ad as i128))
        }
        _ => a.cmp(b),
    }
}
