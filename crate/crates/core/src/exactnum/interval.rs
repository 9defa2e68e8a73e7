use super::{dyadic, floor_scaled, format_rational, Rational, Sign};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Closed interval with rational endpoints.
///
/// Arithmetic on rational endpoints is exact, so the only place where rounding
/// happens is [`Interval::round_outward`] and the root extraction behind
/// [`Interval::pow_rational`], and both round away from the enclosed set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!(
                "interval lower bound {} exceeds upper bound {}",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(v: Rational) -> Self {
        Interval { lo: v.clone(), hi: v }
    }

    pub fn lower(&self) -> &Rational {
        &self.lo
    }

    pub fn upper(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(BigInt::from(2))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// The common sign of every member, if there is one.
    pub fn sign(&self) -> Option<Sign> {
        if self.lo.is_positive() {
            Some(Sign::Positive)
        } else if self.hi.is_negative() {
            Some(Sign::Negative)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Sign::Zero)
        } else {
            None
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn scale(&self, k: &Rational) -> Interval {
        let (a, b) = (&self.lo * k, &self.hi * k);
        if k.is_negative() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: a, hi: b }
        }
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            Interval { lo: -&self.hi, hi: -&self.lo }
        } else {
            Interval {
                lo: Rational::zero(),
                hi: (-&self.lo).max(self.hi.clone()),
            }
        }
    }

    /// Exact integer power.
    pub fn powi(&self, e: u32) -> Interval {
        if e == 0 {
            return Interval::point(Rational::one());
        }
        if e % 2 == 1 {
            return Interval { lo: pow(&self.lo, e), hi: pow(&self.hi, e) };
        }
        let a = self.abs();
        Interval { lo: pow(&a.lo, e), hi: pow(&a.hi, e) }
    }

    /// Enclosure of `x^(1/b)` for a non-negative interval, endpoints on the
    /// dyadic grid `2^-bits`.
    pub fn nonneg_root(&self, b: u32, bits: u64) -> Result<Interval> {
        if self.lo.is_negative() {
            return Err(Error::Domain("root of an interval with negative members".into()));
        }
        if b == 1 {
            return Ok(self.clone());
        }
        Ok(Interval { lo: root_floor(&self.lo, b, bits), hi: root_ceil(&self.hi, b, bits) })
    }

    /// Enclosure of `x^p` for a non-negative interval and rational `p > 0`.
    ///
    /// Integer exponents are exact. Otherwise `p = a/b` is evaluated as the
    /// `b`-th root of the `a`-th power, rounded outward to `2^-bits`.
    pub fn pow_rational(&self, p: &Rational, bits: u64) -> Result<Interval> {
        if !p.is_positive() {
            return Err(Error::Domain("exponent must be positive".into()));
        }
        if self.lo.is_negative() {
            return Err(Error::Domain("fractional power of an interval with negative members".into()));
        }
        let a: u32 = p.numer().try_into().map_err(|_| Error::Domain("exponent numerator too large".into()))?;
        let b: u32 = p.denom().try_into().map_err(|_| Error::Domain("exponent denominator too large".into()))?;
        self.powi(a).nonneg_root(b, bits)
    }

    /// Snap both endpoints outward onto the dyadic grid `2^-bits`.
    pub fn round_outward(&self, bits: u64) -> Interval {
        let lo = dyadic(floor_scaled(&self.lo, bits), bits);
        let hi_floor = floor_scaled(&self.hi, bits);
        let hi = if dyadic(hi_floor.clone(), bits) == self.hi {
            self.hi.clone()
        } else {
            dyadic(hi_floor + 1, bits)
        };
        Interval { lo, hi }
    }
}

fn pow(q: &Rational, e: u32) -> Rational {
    num_traits::pow(q.clone(), e as usize)
}

fn root_floor(x: &Rational, b: u32, bits: u64) -> Rational {
    // ⌊x^(1/b) · 2^bits⌋ = ⌊(⌊x · 2^(b·bits)⌋)^(1/b)⌋
    let scaled = floor_scaled(x, bits * b as u64);
    dyadic(scaled.nth_root(b), bits)
}

fn root_ceil(x: &Rational, b: u32, bits: u64) -> Rational {
    let lo = root_floor(x, b, bits);
    if &pow(&lo, b) == x {
        lo
    } else {
        lo + dyadic(BigInt::one(), bits)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_rational(&self.lo), format_rational(&self.hi))
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        Interval { lo: &self.lo + &rhs.lo, hi: &self.hi + &rhs.hi }
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        Interval { lo: &self.lo - &rhs.hi, hi: &self.hi - &rhs.lo }
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        let products = [&self.lo * &rhs.lo, &self.lo * &rhs.hi, &self.hi * &rhs.lo, &self.hi * &rhs.hi];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        Interval { lo, hi }
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for Interval {
            type Output = Interval;
            fn $m(self, rhs: Interval) -> Interval {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        -&self
    }
}
