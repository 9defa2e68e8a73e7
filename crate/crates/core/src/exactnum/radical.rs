use super::{canonicalize_root, ceil_log2, dyadic, format_rational, square_free_decompose, Interval, Rational, Sign};
use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// `Σ q_m · √m` over distinct square-free radicands `m ≥ 1`.
///
/// The term map never stores a zero coefficient, so two values are equal
/// exactly when their maps are equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct RadicalSum {
    terms: BTreeMap<BigUint, Rational>,
}

impl RadicalSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(q: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(BigUint::one(), q);
        }
        RadicalSum { terms }
    }

    pub fn from_integer(v: i64) -> Self {
        Self::from_rational(Rational::from_integer(BigInt::from(v)))
    }

    /// `√q` for a non-negative rational.
    pub fn sqrt(q: &Rational) -> Result<Self> {
        if q.is_zero() {
            return Ok(Self::zero());
        }
        let (coeff, radicand) = canonicalize_root(q)?;
        let mut terms = BTreeMap::new();
        terms.insert(radicand, coeff);
        Ok(RadicalSum { terms })
    }

    /// Builds a sum from arbitrary `(coefficient, radicand)` pairs, pulling
    /// square factors out of each radicand.
    pub fn from_terms<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, BigUint)>,
    {
        let mut out = RadicalSum::zero();
        for (coeff, radicand) in pairs {
            if radicand.is_zero() {
                return Err(Error::Domain("radicand must be positive".into()));
            }
            let (outer, core) = square_free_decompose(&radicand);
            let coeff = coeff * Rational::from_integer(BigInt::from(outer));
            out.add_term(core, coeff);
        }
        Ok(out)
    }

    fn add_term(&mut self, radicand: BigUint, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(radicand);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `(radicand, coefficient)` pairs in increasing radicand order.
    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn rational_part(&self) -> Rational {
        self.terms.get(&BigUint::one()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        RadicalSum {
            terms: self.terms.iter().map(|(m, q)| (m.clone(), q * k)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = RadicalSum::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn abs(&self) -> Self {
        match self.sign() {
            Sign::Negative => -self,
            _ => self.clone(),
        }
    }

    /// Exact sign. Zero is read off the canonical form; a nonzero value is
    /// enclosed at increasing precision until the enclosure excludes zero,
    /// which always happens because the value is bounded away from zero.
    pub fn sign(&self) -> Sign {
        if let Some(q) = self.as_rational() {
            return Sign::of_rational(&q);
        }
        let mut bits = 64;
        loop {
            if let Some(s) = self.enclosure(bits).sign() {
                debug_assert_ne!(s, Sign::Zero);
                return s;
            }
            bits *= 2;
        }
    }

    /// Enclosure with every root bracketed on the dyadic grid `2^-bits`.
    pub fn enclosure(&self, bits: u64) -> Interval {
        let mut acc = Interval::point(Rational::zero());
        for (m, q) in &self.terms {
            let term = if m.is_one() {
                Interval::point(q.clone())
            } else {
                let root = BigInt::from(m << (2 * bits)).sqrt();
                let root = Interval::new(dyadic(root.clone(), bits), dyadic(root + 1, bits))
                    .expect("ordered");
                root.scale(q)
            };
            acc = &acc + &term;
        }
        acc
    }

    /// An enclosure of width at most `width_bound`; rational values come back
    /// as a point.
    pub fn to_interval(&self, width_bound: &Rational) -> Result<Interval> {
        if !width_bound.is_positive() {
            return Err(Error::Domain("width bound must be positive".into()));
        }
        let irrational_mass: Rational = self
            .terms
            .iter()
            .filter(|(m, _)| !m.is_one())
            .map(|(_, q)| q.abs())
            .fold(Rational::zero(), |a, b| a + b);
        if irrational_mass.is_zero() {
            return Ok(Interval::point(self.rational_part()));
        }
        // each root bracket has width 2^-bits, so the total is mass · 2^-bits
        let bits = ceil_log2(&(irrational_mass / width_bound)) + 1;
        Ok(self.enclosure(bits))
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(m, q)| q.to_f64().unwrap_or(f64::NAN) * m.to_f64().unwrap_or(f64::NAN).sqrt())
            .sum()
    }
}

impl From<Rational> for RadicalSum {
    fn from(q: Rational) -> Self {
        RadicalSum::from_rational(q)
    }
}

impl From<&Rational> for RadicalSum {
    fn from(q: &Rational) -> Self {
        RadicalSum::from_rational(q.clone())
    }
}

impl From<i64> for RadicalSum {
    fn from(v: i64) -> Self {
        RadicalSum::from_integer(v)
    }
}

impl fmt::Display for RadicalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, q)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                f.write_str(&format_rational(q))?;
            } else {
                write!(f, "{}·√{}", format_rational(q), m)?;
            }
        }
        Ok(())
    }
}

impl Add for &RadicalSum {
    type Output = RadicalSum;
    fn add(self, rhs: &RadicalSum) -> RadicalSum {
        let mut out = self.clone();
        for (m, q) in &rhs.terms {
            out.add_term(m.clone(), q.clone());
        }
        out
    }
}

impl Sub for &RadicalSum {
    type Output = RadicalSum;
    fn sub(self, rhs: &RadicalSum) -> RadicalSum {
        let mut out = self.clone();
        for (m, q) in &rhs.terms {
            out.add_term(m.clone(), -q);
        }
        out
    }
}

impl Mul for &RadicalSum {
    type Output = RadicalSum;
    fn mul(self, rhs: &RadicalSum) -> RadicalSum {
        let mut out = RadicalSum::zero();
        for (m1, q1) in &self.terms {
            for (m2, q2) in &rhs.terms {
                // √m1·√m2 = g·√((m1/g)(m2/g)); the cofactors are coprime and square-free
                let g = m1.gcd(m2);
                let radicand = (m1 / &g) * (m2 / &g);
                let coeff = q1 * q2 * Rational::from_integer(BigInt::from(g));
                out.add_term(radicand, coeff);
            }
        }
        out
    }
}

impl Neg for &RadicalSum {
    type Output = RadicalSum;
    fn neg(self) -> RadicalSum {
        RadicalSum {
            terms: self.terms.iter().map(|(m, q)| (m.clone(), -q)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr for RadicalSum {
            type Output = RadicalSum;
            fn $m(self, rhs: RadicalSum) -> RadicalSum {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&RadicalSum> for RadicalSum {
            type Output = RadicalSum;
            fn $m(self, rhs: &RadicalSum) -> RadicalSum {
                (&self).$m(rhs)
            }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

impl Neg for RadicalSum {
    type Output = RadicalSum;
    fn neg(self) -> RadicalSum {
        -&self
    }
}

impl AddAssign<&RadicalSum> for RadicalSum {
    fn add_assign(&mut self, rhs: &RadicalSum) {
        for (m, q) in &rhs.terms {
            self.add_term(m.clone(), q.clone());
        }
    }
}

impl std::iter::Sum for RadicalSum {
    fn sum<I: Iterator<Item = RadicalSum>>(iter: I) -> Self {
        let mut acc = RadicalSum::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{integer, rational};

    fn root(v: i64) -> RadicalSum {
        RadicalSum::sqrt(&integer(v)).unwrap()
    }

    fn r(v: i64) -> RadicalSum {
        RadicalSum::from_integer(v)
    }

    #[test]
    fn conjugate_product() {
        let p = &(r(1) + root(2)) * &(r(1) - root(2));
        assert_eq!(p, r(-1));
    }

    #[test]
    fn root_two_squared() {
        assert_eq!(&root(2) * &root(2), r(2));
    }

    #[test]
    fn square_of_one_plus_root7_over_32() {
        // (1 + √7/32)² = 1 + 7/1024 + √7/16
        let a = r(1) + RadicalSum::sqrt(&rational(7, 1024)).unwrap();
        let sq = a.pow(2);
        let expected = RadicalSum::from_rational(rational(1031, 1024))
            + RadicalSum::sqrt(&integer(7)).unwrap().scale(&rational(1, 16));
        assert_eq!(sq, expected);
        let f = 1.0 + 7f64.sqrt() / 32.0;
        assert!((sq.to_f64() - f * f).abs() < 1e-12);
    }

    #[test]
    fn mixed_radicands_multiply_back_into_canonical_form() {
        // √6·√10 = 2√15
        assert_eq!(&root(6) * &root(10), root(15).scale(&integer(2)));
        // √8 is stored as 2√2
        assert_eq!(root(8), root(2).scale(&integer(2)));
    }

    #[test]
    fn signs() {
        assert_eq!((r(3) - root(2).scale(&integer(2))).sign(), Sign::Positive);
        assert_eq!(RadicalSum::zero().sign(), Sign::Zero);
        let z = &(r(1) + root(2)) * &(r(1) - root(2)) + r(1);
        assert_eq!(z.sign(), Sign::Zero);
        assert!(z.is_zero());
        // 99/70 ≈ 1.4142857 > √2 ≈ 1.4142136
        let close = RadicalSum::from_rational(rational(99, 70)) - root(2);
        assert_eq!(close.sign(), Sign::Positive);
        // a value around -1e-12: 1414213562373/10^12 - √2
        let tiny = RadicalSum::from_rational(rational(1_414_213_562_373, 1_000_000_000_000)) - root(2);
        assert_eq!(tiny.sign(), Sign::Negative);
    }

    #[test]
    fn intervals_contain_value() {
        let i = root(2).to_interval(&rational(1, 100)).unwrap();
        assert!(i.width() <= rational(1, 100));
        assert!(i.lower() >= &rational(141, 100) && i.upper() <= &rational(142, 100));
        assert!(i.lower() * i.lower() <= integer(2) && i.upper() * i.upper() >= integer(2));
        assert_eq!(r(5).to_interval(&rational(1, 3)).unwrap(), Interval::point(integer(5)));
        let q = RadicalSum::from_rational(rational(7, 32));
        assert!(q.to_interval(&rational(1, 10)).unwrap().is_point());
        assert!(root(2).to_interval(&integer(0)).is_err());
    }

    #[test]
    fn from_terms_canonicalizes() {
        let a = RadicalSum::from_terms(vec![(integer(1), BigUint::from(8u32)), (integer(-2), BigUint::from(2u32))]).unwrap();
        assert!(a.is_zero());
        assert!(RadicalSum::from_terms(vec![(integer(1), BigUint::zero())]).is_err());
    }

    #[test]
    fn display() {
        let a = r(1) + root(7).scale(&rational(3, 32));
        assert_eq!(a.to_string(), "1/1 + 3/32·√7");
        assert_eq!(RadicalSum::zero().to_string(), "0");
    }
}
