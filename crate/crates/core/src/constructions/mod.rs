//! Generators for the explicit constructions, the aggregation combinator and
//! the dimension planner.
//!
//! Every generator returns a [`Construction`]: the sites plus one certificate
//! per claimed Voronoi tuple. Certificates are only claims; [`crate::verify`]
//! decides whether they hold.

mod aggregate;
mod basic;
mod chain;
mod metric;
mod solve;

pub use aggregate::aggregate;
pub use basic::{gen_grid2, gen_grid3_perturbed, gen_hypergrid, gen_quad4, gen_quint5};
pub use chain::{build_chain, plan, plan_blocks, plan_kflat, BlockKind, ChainSpec, Plan};
pub use metric::{apply_metric, MetricOptions, Template};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, integer, parse_number, Interval, Rational};
use crate::flats::{AxisAlignedFlat, Metric, Point};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Default target width of interval witnesses.
pub fn default_interval_width() -> Rational {
    parse_number("1e-30").expect("valid literal")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Exact,
    Interval,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Interval => "interval",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "exact" => Ok(Mode::Exact),
            "interval" => Ok(Mode::Interval),
            _ => Err(Error::Malformed(format!("unknown mode `{s}` (expected exact or interval)"))),
        }
    }
}

/// One equidistance claim checked by a sign change: along coordinate `coord`
/// of the witness box, `dist(·, a)^p - dist(·, b)^p` takes opposite signs on
/// the two faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub a: usize,
    pub b: usize,
    pub coord: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalWitness {
    pub bounds: Vec<Interval>,
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Exact(Point),
    Interval(IntervalWitness),
}

impl Witness {
    pub fn dim(&self) -> usize {
        match self {
            Witness::Exact(p) => p.dim(),
            Witness::Interval(w) => w.bounds.len(),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Witness::Exact(_) => Mode::Exact,
            Witness::Interval(_) => Mode::Interval,
        }
    }

    /// Floating-point representative (the point, or the box midpoint).
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Witness::Exact(p) => p.to_f64(),
            Witness::Interval(w) => w.bounds.iter().map(|i| i.midpoint().to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }
}

/// A site tuple (sorted site indices) and the witness claiming its cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub tuple: Vec<usize>,
    pub witness: Witness,
}

impl Certificate {
    pub fn new(mut tuple: Vec<usize>, witness: Witness) -> Self {
        tuple.sort_unstable();
        Certificate { tuple, witness }
    }

    pub fn mode(&self) -> Mode {
        self.witness.mode()
    }
}

/// Generator parameters, recorded for reproducibility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub generator: String,
    /// Sites per family.
    pub n: u64,
    pub epsilon: Option<Rational>,
    pub flat_dim: usize,
    pub blocks: Vec<BlockKind>,
    /// Value of the separating coordinate on the far side of each aggregation.
    pub separator: Option<Rational>,
    /// Whether the sites are supposed to be pairwise disjoint.
    pub claims_non_intersection: bool,
}

impl Params {
    pub fn new(generator: impl Into<String>, n: u64) -> Self {
        Params {
            generator: generator.into(),
            n,
            epsilon: None,
            flat_dim: 1,
            blocks: Vec::new(),
            separator: None,
            claims_non_intersection: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Construction {
    pub dim: usize,
    pub metric: Metric,
    pub sites: Vec<AxisAlignedFlat>,
    pub certificates: Vec<Certificate>,
    pub params: Params,
}

impl Construction {
    /// Assembles and validates a construction, putting certificates in
    /// canonical (lexicographic by tuple) order.
    pub fn new(
        dim: usize,
        metric: Metric,
        sites: Vec<AxisAlignedFlat>,
        mut certificates: Vec<Certificate>,
        params: Params,
    ) -> Result<Self> {
        certificates.sort_by(|a, b| a.tuple.cmp(&b.tuple));
        let c = Construction { dim, metric, sites, certificates, params };
        c.validate()?;
        Ok(c)
    }

    pub fn empty(dim: usize, metric: Metric) -> Self {
        Construction { dim, metric, sites: Vec::new(), certificates: Vec::new(), params: Params::new("empty", 0) }
    }

    pub fn validate(&self) -> Result<()> {
        let mut labels = BTreeSet::new();
        for s in &self.sites {
            if s.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: s.dim() });
            }
            if !labels.insert(s.label()) {
                return Err(Error::InvalidParameter(format!("duplicate site label `{}`", s.label())));
            }
        }
        for cert in &self.certificates {
            self.validate_certificate(cert)?;
        }
        Ok(())
    }

    pub fn validate_certificate(&self, cert: &Certificate) -> Result<()> {
        if cert.tuple.len() < 2 {
            return Err(Error::InvalidParameter("a certificate tuple needs at least two sites".into()));
        }
        if cert.tuple.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("certificate tuple must be sorted and repetition-free".into()));
        }
        if let Some(&bad) = cert.tuple.iter().find(|&&i| i >= self.sites.len()) {
            return Err(Error::UnknownLabel(format!("#{bad}")));
        }
        if cert.witness.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: cert.witness.dim() });
        }
        if let Witness::Interval(w) = &cert.witness {
            for s in &w.steps {
                if s.a >= self.sites.len() || s.b >= self.sites.len() {
                    return Err(Error::UnknownLabel(format!("#{}", s.a.max(s.b))));
                }
                if s.coord >= self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim, found: s.coord + 1 });
                }
            }
        }
        Ok(())
    }

    pub fn site_index(&self, label: &str) -> Option<usize> {
        self.sites.iter().position(|s| s.label() == label)
    }

    pub fn label_index(&self) -> HashMap<&str, usize> {
        self.sites.iter().enumerate().map(|(i, s)| (s.label(), i)).collect()
    }

    pub fn tuple_labels(&self, tuple: &[usize]) -> Vec<&str> {
        tuple.iter().map(|&i| self.sites[i].label()).collect()
    }

    /// Removes the certificate for the given tuple of labels, if present.
    pub fn remove_certificate(&mut self, labels: &[&str]) -> Option<Certificate> {
        let mut idx: Vec<usize> = labels.iter().map(|l| self.site_index(l)).collect::<Option<_>>()?;
        idx.sort_unstable();
        let pos = self.certificates.iter().position(|c| c.tuple == idx)?;
        Some(self.certificates.remove(pos))
    }
}

/// `1/(8n)`, the perturbation bound for the Euclidean constructions.
pub fn epsilon_bound(n: u64) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(8 * n))
}

/// Perturbation bound under a metric. For L^p the within-block offset δ with
/// `δ^p = k^p - (k-ε)^p ≤ p·n^(p-1)·ε` must stay below 1/2, which holds for
/// `ε < 1/(P·2^P·n^(P-1))` with `P = ⌈p⌉`. At `p = 2` this is `1/(8n)`.
pub fn epsilon_bound_for(metric: &Metric, n: u64) -> Rational {
    let base = epsilon_bound(n);
    match metric {
        Metric::Euclidean | Metric::L1 => base,
        Metric::Lp(p) => {
            let big_p = p.ceil().to_integer().to_u32().unwrap_or(u32::MAX).max(2);
            let denom = BigInt::from(big_p) * (BigInt::one() << big_p) * num_traits::pow(BigInt::from(n), (big_p - 1) as usize);
            base.min(Rational::new(BigInt::one(), denom))
        }
    }
}

/// Default ε: one step inside the bound, `1/(8n+1)` in the Euclidean case.
pub fn default_epsilon(metric: &Metric, n: u64) -> Rational {
    let b = epsilon_bound_for(metric, n);
    Rational::new(b.numer().clone(), b.denom() + BigInt::one())
}

pub(crate) fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn check_epsilon(n: u64, eps: &Rational) -> Result<()> {
    check_epsilon_for(&Metric::Euclidean, n, eps)
}

pub(crate) fn check_epsilon_for(metric: &Metric, n: u64, eps: &Rational) -> Result<()> {
    check_n(n)?;
    let bound = epsilon_bound_for(metric, n);
    if !eps.is_positive() || eps >= &bound {
        let rule = if bound == epsilon_bound(n) {
            "1/(8n)".to_string()
        } else {
            format!("{} under {}", format_rational(&bound), metric)
        };
        return Err(Error::InvalidParameter(format!(
            "epsilon must satisfy 0 < eps < {rule} (n = {n}, eps = {})",
            format_rational(eps)
        )));
    }
    Ok(())
}

pub(crate) fn idx(i: u64) -> Rational {
    integer(i as i64)
}

pub(crate) fn zero() -> Rational {
    Rational::zero()
}

/// Iterates all index vectors in `1..=n` of the given length, lexicographically.
pub(crate) fn index_tuples(len: usize, n: u64) -> impl Iterator<Item = Vec<u64>> {
    let total = (n as usize).checked_pow(len as u32).expect("tuple count overflow");
    (0..total).map(move |mut code| {
        let mut v = vec![0u64; len];
        for slot in v.iter_mut().rev() {
            *slot = (code % n as usize) as u64 + 1;
            code /= n as usize;
        }
        v
    })
}

#[cfg(test)]
mod tests;
