//! Axis-aligned flats and their distances.
//!
//! A flat is given by the coordinates it leaves free and the values of the
//! others. Distances under L², L^p and L¹ all split coordinate-wise: the free
//! coordinates can always be matched, so only fixed coordinates contribute.

mod metric;

pub use metric::{LpPower, Metric};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, Interval, RadicalSum, Rational, Sign};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// A k-flat in R^d whose free directions are coordinate axes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AxisAlignedFlat {
    dim: usize,
    fixed: BTreeMap<usize, Rational>,
    label: String,
}

impl AxisAlignedFlat {
    /// `fixed` lists the constrained coordinates (0-based) and their values;
    /// every other coordinate is free.
    pub fn new<I>(dim: usize, fixed: I, label: impl Into<String>) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let mut map = BTreeMap::new();
        for (c, v) in fixed {
            if c >= dim {
                return Err(Error::InvalidParameter(format!(
                    "coordinate {c} out of range for dimension {dim}"
                )));
            }
            if map.insert(c, v).is_some() {
                return Err(Error::InvalidParameter(format!("coordinate {c} fixed twice")));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidParameter(
                "a flat must fix at least one coordinate (k < d)".into(),
            ));
        }
        Ok(AxisAlignedFlat { dim, fixed: map, label: label.into() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension k of the flat itself.
    pub fn flat_dim(&self) -> usize {
        self.dim - self.fixed.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn fixed(&self) -> &BTreeMap<usize, Rational> {
        &self.fixed
    }

    pub fn fixed_value(&self, c: usize) -> Option<&Rational> {
        self.fixed.get(&c)
    }

    pub fn is_free(&self, c: usize) -> bool {
        c < self.dim && !self.fixed.contains_key(&c)
    }

    pub fn free_coords(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).filter(move |c| !self.fixed.contains_key(c))
    }

    /// Embeds into R^(dim + before + after): `before` zero-fixed coordinates in
    /// front, then this flat, then `after` zero-fixed coordinates.
    pub fn embed(&self, before: usize, after: usize) -> AxisAlignedFlat {
        let dim = before + self.dim + after;
        let mut fixed: BTreeMap<usize, Rational> = (0..before)
            .chain(before + self.dim..dim)
            .map(|c| (c, Rational::zero()))
            .collect();
        fixed.extend(self.fixed.iter().map(|(c, v)| (c + before, v.clone())));
        AxisAlignedFlat { dim, fixed, label: self.label.clone() }
    }

    /// Overrides the value of a fixed coordinate.
    pub(crate) fn set_fixed(&mut self, c: usize, v: Rational) {
        debug_assert!(self.fixed.contains_key(&c));
        self.fixed.insert(c, v);
    }

    /// True when the two flats contribute identically to any distance in
    /// coordinate `c`: both free there, or both fixed to the same value.
    pub fn agrees_on(&self, other: &AxisAlignedFlat, c: usize) -> bool {
        self.fixed.get(&c) == other.fixed.get(&c)
    }
}

impl fmt::Display for AxisAlignedFlat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = (", self.label)?;
        for c in 0..self.dim {
            if c > 0 {
                f.write_str(", ")?;
            }
            match self.fixed.get(&c) {
                Some(v) if v.is_integer() => write!(f, "{}", v.numer())?,
                Some(v) => f.write_str(&format_rational(v))?,
                None => f.write_str("*")?,
            }
        }
        f.write_str(")")
    }
}

/// A point of R^d with exact coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point(pub Vec<RadicalSum>);

impl Point {
    pub fn new(coords: Vec<RadicalSum>) -> Self {
        Point(coords)
    }

    pub fn from_rationals<I: IntoIterator<Item = Rational>>(coords: I) -> Self {
        Point(coords.into_iter().map(RadicalSum::from_rational).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[RadicalSum] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(RadicalSum::to_f64).collect()
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Squared Euclidean distance from `x` to `f`: the sum over fixed coordinates
/// of `(x_c - v_c)²`.
pub fn sq_dist_point_flat(x: &Point, f: &AxisAlignedFlat) -> Result<RadicalSum> {
    check_dims(f.dim, x.dim())?;
    Ok(f
        .fixed
        .iter()
        .map(|(&c, v)| {
            let diff = &x.0[c] - &RadicalSum::from(v);
            &diff * &diff
        })
        .sum())
}

/// Squared distance between two flats of the same ambient space. A coordinate
/// free in either flat can be matched, so only coordinates fixed in both count.
/// The result is zero exactly when the flats intersect.
pub fn sq_dist_flat_flat(f: &AxisAlignedFlat, g: &AxisAlignedFlat) -> Result<RadicalSum> {
    check_dims(f.dim, g.dim)?;
    let total: Rational = f
        .fixed
        .iter()
        .filter_map(|(c, v)| g.fixed.get(c).map(|w| (v - w) * (v - w)))
        .fold(Rational::zero(), |a, b| a + b);
    Ok(RadicalSum::from_rational(total))
}

pub fn flats_intersect(f: &AxisAlignedFlat, g: &AxisAlignedFlat) -> Result<bool> {
    Ok(sq_dist_flat_flat(f, g)?.sign() == Sign::Zero)
}

/// p-th power of the metric distance from `x` to `f`: `Σ_fixed |x_c - v_c|^p`
/// (for L¹, `p = 1`).
///
/// Integer exponents, L¹ included, give an exact value; absolute values are
/// decided exactly via [`RadicalSum::sign`]. Fractional exponents give an
/// enclosure of width at most `width_bound`.
pub fn lp_dist_pth_power(
    x: &Point,
    f: &AxisAlignedFlat,
    m: &Metric,
    width_bound: &Rational,
) -> Result<LpPower> {
    check_dims(f.dim, x.dim())?;
    if let Some(p) = m.integer_exponent() {
        return Ok(LpPower::Exact(exact_pth_power(x, f, p)));
    }
    // Enclose each coordinate tightly enough that the sum of powers stays
    // within the bound; retry with more precision if the estimate falls short.
    let terms = f.fixed.len() as u64;
    let mut bits = crate::exactnum::ceil_log2(&(Rational::from_integer(terms.into()) / width_bound)) + 16;
    loop {
        let coords: Vec<Interval> = x
            .0
            .iter()
            .map(|v| v.enclosure(bits))
            .collect();
        let total = metric::box_pth_power(&coords, f, m, bits)?;
        if &total.width() <= width_bound {
            return Ok(LpPower::Enclosure(total));
        }
        bits *= 2;
    }
}

pub(crate) fn exact_pth_power(x: &Point, f: &AxisAlignedFlat, p: u32) -> RadicalSum {
    f.fixed
        .iter()
        .map(|(&c, v)| {
            let diff = &x.0[c] - &RadicalSum::from(v);
            if p % 2 == 0 {
                diff.pow(p)
            } else {
                diff.abs().pow(p)
            }
        })
        .sum()
}

/// Enclosure of the p-th power distance from any point of `coords` to `f`.
pub fn box_pth_power(coords: &[Interval], f: &AxisAlignedFlat, m: &Metric, bits: u64) -> Result<Interval> {
    check_dims(f.dim, coords.len())?;
    metric::box_pth_power(coords, f, m, bits)
}

/// Enclosure of `dist(z, a)^p - dist(z, b)^p` over all `z` in the box.
/// Coordinates on which the two flats agree cancel exactly and are skipped.
pub fn box_pth_power_difference(
    coords: &[Interval],
    a: &AxisAlignedFlat,
    b: &AxisAlignedFlat,
    m: &Metric,
    bits: u64,
) -> Result<Interval> {
    check_dims(a.dim, coords.len())?;
    check_dims(b.dim, coords.len())?;
    let mut acc = Interval::point(Rational::zero());
    for (c, z) in coords.iter().enumerate() {
        if a.agrees_on(b, c) {
            continue;
        }
        let ta = metric::coordinate_term(z, a.fixed.get(&c), m, bits)?;
        let tb = metric::coordinate_term(z, b.fixed.get(&c), m, bits)?;
        acc = &acc + &(&ta - &tb);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests;
