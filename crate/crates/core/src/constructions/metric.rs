//! The constructions under other L^p metrics.

use super::chain::{build_chain, plan_blocks, BlockKind, ChainSpec};
use super::{default_interval_width, idx, Construction, Mode};
use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::flats::Metric;
use num_traits::One;
use std::fmt;

/// A construction family, independent of the metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    Grid2,
    Grid3p,
    Quad4,
    Quint5,
    Hypergrid(usize),
    /// Planner output for the given dimension.
    Plan(usize),
    /// `c` aggregated hypergrids of k-flats.
    Kflat { k: usize, c: usize },
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Template::Grid2 => f.write_str("grid2"),
            Template::Grid3p => f.write_str("grid3p"),
            Template::Quad4 => f.write_str("quad4"),
            Template::Quint5 => f.write_str("quint5"),
            Template::Hypergrid(k) => write!(f, "hypergrid:{k}"),
            Template::Plan(d) => write!(f, "plan:{d}"),
            Template::Kflat { k, c } => write!(f, "kflat:{k}x{c}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetricOptions {
    pub mode: Mode,
    /// Target width of interval witnesses.
    pub width: Rational,
    /// Separator value; defaults to 1, or `d·n + 1` under L¹ so that the
    /// separating coordinate of every witness stays between 0 and σ.
    pub separator: Option<Rational>,
}

impl Default for MetricOptions {
    fn default() -> Self {
        MetricOptions { mode: Mode::Exact, width: default_interval_width(), separator: None }
    }
}

impl MetricOptions {
    pub fn interval() -> Self {
        MetricOptions { mode: Mode::Interval, ..Default::default() }
    }
}

fn names(groups: &[&[&str]]) -> Vec<Vec<String>> {
    groups.iter().map(|g| g.iter().map(|s| s.to_string()).collect()).collect()
}

/// Builds `template` with `n` sites per family under `metric`.
///
/// Exact witnesses exist for the Euclidean and L¹ metrics; other exponents
/// need interval mode.
pub fn apply_metric(
    template: Template,
    n: u64,
    eps: Option<&Rational>,
    metric: &Metric,
    opts: &MetricOptions,
) -> Result<Construction> {
    let (blocks, family_names, target, perturb) = match template {
        Template::Grid2 => (vec![BlockKind::Grid2], Some(names(&[&["V", "H"]])), None, false),
        Template::Grid3p => (vec![BlockKind::Grid3p], Some(names(&[&["A", "B"]])), None, false),
        Template::Quad4 => (vec![BlockKind::Quad4], Some(names(&[&["A", "B", "C"]])), None, false),
        Template::Quint5 => {
            (vec![BlockKind::Grid2; 2], Some(names(&[&["A", "B"], &["C", "D"]])), None, true)
        }
        Template::Hypergrid(k) => {
            if k == 0 {
                return Err(Error::InvalidParameter("flat dimension k must be at least 1".into()));
            }
            let fam = (1..=k + 1).map(|f| format!("F{f}_")).collect();
            (vec![BlockKind::Hypergrid(k)], Some(vec![fam]), None, false)
        }
        Template::Plan(d) => {
            let p = plan_blocks(d)?;
            (p.blocks, None, Some(d), true)
        }
        Template::Kflat { k, c } => {
            if k == 0 || c == 0 {
                return Err(Error::InvalidParameter("k and the number of copies must be at least 1".into()));
            }
            (vec![BlockKind::Hypergrid(k); c], None, None, eps.is_some())
        }
    };
    let mut spec = ChainSpec::new(blocks, n);
    let dim = target.unwrap_or_else(|| spec.consumed_dim());
    spec.family_names = match (family_names, &spec.blocks[..]) {
        (Some(f), _) => Some(f),
        (None, [single]) => Some(vec![single.family_names()]),
        (None, _) => None,
    };
    spec.epsilon = eps.cloned();
    spec.metric = metric.clone();
    spec.perturb = perturb;
    spec.target_dim = target;
    spec.mode = opts.mode;
    spec.width = opts.width.clone();
    spec.separator = match (&opts.separator, metric) {
        (Some(s), _) => s.clone(),
        (None, Metric::L1) => idx(dim as u64 * n + 1),
        (None, _) => Rational::one(),
    };
    spec.generator = template.to_string();
    build_chain(&spec)
}
