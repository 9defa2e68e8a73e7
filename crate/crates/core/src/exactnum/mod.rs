//! Exact arithmetic over Q extended by square roots of rationals.
//!
//! Every number is kept in a canonical form: a rational part plus rational
//! multiples of `√m` for distinct square-free integers `m > 1`. Square roots
//! of distinct square-free integers are linearly independent over Q, so a
//! value is zero exactly when all of its coefficients are zero. Signs of
//! nonzero values are settled by refining rational interval enclosures.

mod interval;
mod radical;

pub use interval::Interval;
pub use radical::RadicalSum;

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Arbitrary-precision rational, always stored reduced with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn of_rational(q: &Rational) -> Sign {
        Sign::from(q.cmp(&Rational::zero()))
    }
}

impl From<Ordering> for Sign {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Negative => "negative",
            Sign::Zero => "zero",
            Sign::Positive => "positive",
        })
    }
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn integer(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"p"` or `"p/q"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Malformed(format!("not a rational number: `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// Parses a rational, or a decimal with optional exponent such as `1e-30` or `2.5E-3`.
pub fn parse_number(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.contains('/') || !(s.contains('.') || s.contains(['e', 'E'])) {
        return parse_rational(s);
    }
    let bad = || Error::Malformed(format!("not a number: `{s}`"));
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let negative = int_part.starts_with('-');
    let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut value = Rational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let shift = exp - frac_part.len() as i32;
    let scale = Rational::from_integer(num_traits::pow(BigInt::from(10), shift.unsigned_abs() as usize));
    if shift < 0 {
        value /= scale;
    } else {
        value *= scale;
    }
    Ok(if negative { -value } else { value })
}

/// Canonical `"num/den"` encoding.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Splits `v` into `(f, m)` with `v = f² · m` and `m` square-free.
///
/// Trial division runs only up to the cube root of the unfactored part: what
/// is left afterwards has at most two prime factors, so it is either a perfect
/// square or already square-free.
pub fn square_free_decompose(v: &BigUint) -> (BigUint, BigUint) {
    assert!(!v.is_zero(), "square_free_decompose(0)");
    let mut rest = v.clone();
    let mut outer = BigUint::one();
    let mut core = BigUint::one();
    let mut d = BigUint::from(2u32);
    while &d * &d * &d <= rest {
        let mut exp = 0u32;
        while (&rest % &d).is_zero() {
            rest /= &d;
            exp += 1;
        }
        if exp > 0 {
            outer *= d.pow(exp / 2);
            if exp % 2 == 1 {
                core *= &d;
            }
        }
        d += 1u32;
    }
    let root = rest.sqrt();
    if &root * &root == rest {
        outer *= root;
    } else {
        core *= rest;
    }
    (outer, core)
}

/// Writes `√s` as `coefficient · √radicand` with a square-free radicand.
pub fn canonicalize_root(s: &Rational) -> Result<(Rational, BigUint)> {
    if !s.is_positive() {
        return Err(Error::Domain(format!(
            "square root of non-positive rational {}",
            format_rational(s)
        )));
    }
    // √(a/b) = √(ab) / b
    let a = s.numer().to_biguint().expect("positive numerator");
    let b = s.denom().to_biguint().expect("positive denominator");
    let (outer, core) = square_free_decompose(&(&a * &b));
    let coeff = Rational::new(
        BigInt::from_biguint(BigSign::Plus, outer),
        BigInt::from_biguint(BigSign::Plus, b),
    );
    Ok((coeff, core))
}

/// Number of bits of `⌈q⌉` for `q > 0`; a cheap upper bound on `log2 q`.
pub(crate) fn ceil_log2(q: &Rational) -> u64 {
    let c = q.ceil().to_integer();
    if c.is_positive() {
        c.bits()
    } else {
        0
    }
}

/// `⌊q · 2^bits⌋`
pub(crate) fn floor_scaled(q: &Rational, bits: u64) -> BigInt {
    let scaled = q.numer() << bits;
    scaled.div_floor(q.denom())
}

pub(crate) fn dyadic(m: BigInt, bits: u64) -> Rational {
    Rational::new(m, BigInt::one() << bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_of_eight() {
        let (c, m) = canonicalize_root(&integer(8)).unwrap();
        assert_eq!(c, integer(2));
        assert_eq!(m, BigUint::from(2u32));
    }

    #[test]
    fn root_of_63_over_1024() {
        // 63 = 9·7 and 1024 = 32², so √(63/1024) = 3√7/32
        let (c, m) = canonicalize_root(&rational(63, 1024)).unwrap();
        assert_eq!(c, rational(3, 32));
        assert_eq!(m, BigUint::from(7u32));
        assert_eq!(&c * &c * Rational::from_integer(BigInt::from(7)), rational(63, 1024));
    }

    #[test]
    fn root_of_one() {
        let (c, m) = canonicalize_root(&integer(1)).unwrap();
        assert_eq!(c, integer(1));
        assert_eq!(m, BigUint::one());
    }

    #[test]
    fn root_of_non_positive_is_domain_error() {
        assert!(matches!(canonicalize_root(&integer(0)), Err(Error::Domain(_))));
        assert!(matches!(canonicalize_root(&rational(-1, 3)), Err(Error::Domain(_))));
    }

    #[test]
    fn square_free_of_prime_squares() {
        // 1009² · 1013 exercises the perfect-square tail and a large prime
        let v = BigUint::from(1009u64 * 1009 * 1013);
        let (f, m) = square_free_decompose(&v);
        assert_eq!(f, BigUint::from(1009u32));
        assert_eq!(m, BigUint::from(1013u32));
        let (f, m) = square_free_decompose(&BigUint::from(1009u64 * 1009));
        assert_eq!((f, m), (BigUint::from(1009u32), BigUint::one()));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("1/17").unwrap(), rational(1, 17));
        assert_eq!(parse_rational(" -6/4 ").unwrap(), rational(-3, 2));
        assert_eq!(parse_rational("5").unwrap(), integer(5));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&integer(5)), "5/1");
        assert_eq!(parse_number("1e-3").unwrap(), rational(1, 1000));
        assert_eq!(parse_number("2.5E-1").unwrap(), rational(1, 4));
        assert_eq!(parse_number("-0.5").unwrap(), rational(-1, 2));
        assert_eq!(parse_number("3/4").unwrap(), rational(3, 4));
    }
}
