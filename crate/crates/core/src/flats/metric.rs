use super::AxisAlignedFlat;
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational, Interval, RadicalSum, Rational};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;
use std::str::FromStr;

/// Distance used between points and sites.
///
/// `Lp(2)` is never constructed: [`Metric::lp`] folds it into `Euclidean`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Metric {
    Euclidean,
    Lp(Rational),
    L1,
}

impl Metric {
    pub fn lp(p: Rational) -> Result<Metric> {
        if p <= Rational::one() {
            return Err(Error::InvalidParameter(format!(
                "L^p needs p > 1 (got {}); use l1 for p = 1",
                format_rational(&p)
            )));
        }
        if p == Rational::from_integer(BigInt::from(2)) {
            return Ok(Metric::Euclidean);
        }
        Ok(Metric::Lp(p))
    }

    pub fn exponent(&self) -> Rational {
        match self {
            Metric::Euclidean => Rational::from_integer(BigInt::from(2)),
            Metric::Lp(p) => p.clone(),
            Metric::L1 => Rational::one(),
        }
    }

    pub fn integer_exponent(&self) -> Option<u32> {
        let p = self.exponent();
        if p.is_integer() {
            p.to_integer().to_u32()
        } else {
            None
        }
    }

    pub fn exponent_f64(&self) -> f64 {
        self.exponent().to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Metric::Euclidean)
    }

    /// Distance between two points given coordinate-wise differences.
    pub fn dist_f64(&self, diffs: impl Iterator<Item = f64>) -> f64 {
        match self {
            Metric::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Metric::L1 => diffs.map(f64::abs).sum(),
            Metric::Lp(_) => {
                let p = self.exponent_f64();
                diffs.map(|d| d.abs().powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Euclidean => f.write_str("euclidean"),
            Metric::L1 => f.write_str("l1"),
            Metric::Lp(p) if p.is_integer() => write!(f, "lp:{}", p.numer()),
            Metric::Lp(p) => write!(f, "lp:{}", format_rational(p)),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Metric> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "l1" => Ok(Metric::L1),
            "linf" | "lp:inf" | "l-inf" => Err(Error::Unsupported(
                "the L-infinity metric is not supported".into(),
            )),
            other => match other.strip_prefix("lp:") {
                Some(p) => {
                    let p = parse_rational(p)?;
                    if p == Rational::one() {
                        Ok(Metric::L1)
                    } else {
                        Metric::lp(p)
                    }
                }
                None => Err(Error::Malformed(format!(
                    "unknown metric `{s}` (expected euclidean, lp:P or l1)"
                ))),
            },
        }
    }
}

/// Result of [`super::lp_dist_pth_power`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpPower {
    Exact(RadicalSum),
    Enclosure(Interval),
}

impl LpPower {
    pub fn exact(&self) -> Option<&RadicalSum> {
        match self {
            LpPower::Exact(v) => Some(v),
            LpPower::Enclosure(_) => None,
        }
    }
}

/// `|z - v|^p` for a free (`None`) or fixed coordinate.
pub(super) fn coordinate_term(z: &Interval, fixed: Option<&Rational>, m: &Metric, bits: u64) -> Result<Interval> {
    let Some(v) = fixed else {
        return Ok(Interval::point(Rational::zero()));
    };
    let diff = (z - &Interval::point(v.clone())).abs();
    match m.integer_exponent() {
        Some(p) => Ok(diff.powi(p)),
        None => diff.pow_rational(&m.exponent(), bits),
    }
}

pub(super) fn box_pth_power(coords: &[Interval], f: &AxisAlignedFlat, m: &Metric, bits: u64) -> Result<Interval> {
    let mut acc = Interval::point(Rational::zero());
    for (c, v) in f.fixed() {
        acc = &acc + &coordinate_term(&coords[*c], Some(v), m, bits)?;
    }
    Ok(acc)
}
