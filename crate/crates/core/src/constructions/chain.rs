//! Nested aggregation of building blocks, with the cyclic perturbation that
//! makes grid blocks disjoint, and the dimension planner built on top of it.
//!
//! Layout of a chain of blocks `B0, B1, …`: the coordinates of `B0`, then for
//! each later block its own coordinates followed by one separating
//! coordinate `t_b`. Sites of block `b ≥ 1` sit at `t_b = σ`; every other
//! separator is 0 on every site. Trailing slack coordinates are 0 throughout.

use super::basic::balancing_offset;
use super::solve::{solve_witness, SolveTask};
use super::{
    check_epsilon_for, check_n, default_interval_width, idx, index_tuples, Certificate, Construction, Mode, Params,
    Witness,
};
use crate::error::{Error, Result};
use crate::exactnum::{rational, RadicalSum, Rational};
use crate::flats::{AxisAlignedFlat, Metric, Point};
use num_traits::{One, Zero};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    /// Two crossing line families in the plane.
    Grid2,
    /// Two line families in R³ separated by ε.
    Grid3p,
    /// Three disjoint line families in R⁴.
    Quad4,
    /// `k + 1` families of axis-parallel k-flats in R^(k+1).
    Hypergrid(usize),
}

impl BlockKind {
    pub fn dim(&self) -> usize {
        match self {
            BlockKind::Grid2 => 2,
            BlockKind::Grid3p => 3,
            BlockKind::Quad4 => 4,
            BlockKind::Hypergrid(k) => k + 1,
        }
    }

    /// Number of site families, i.e. the exponent of `n` in the tuple count.
    pub fn exponent(&self) -> u32 {
        match self {
            BlockKind::Grid2 | BlockKind::Grid3p => 2,
            BlockKind::Quad4 => 3,
            BlockKind::Hypergrid(k) => *k as u32 + 1,
        }
    }

    pub fn flat_dim(&self) -> usize {
        match self {
            BlockKind::Hypergrid(k) => *k,
            _ => 1,
        }
    }

    /// Families cross each other inside the block.
    pub fn is_grid(&self) -> bool {
        matches!(self, BlockKind::Grid2 | BlockKind::Hypergrid(_))
    }

    fn needs_epsilon(&self) -> bool {
        matches!(self, BlockKind::Grid3p | BlockKind::Quad4)
    }

    pub(crate) fn family_names(&self) -> Vec<String> {
        match self {
            BlockKind::Grid2 => vec!["V".into(), "H".into()],
            BlockKind::Grid3p => vec!["A".into(), "B".into()],
            BlockKind::Quad4 => vec!["A".into(), "B".into(), "C".into()],
            BlockKind::Hypergrid(k) => (1..=k + 1).map(|f| format!("F{f}_")).collect(),
        }
    }

    /// Local coordinate whose witness value is an exact site index, and the
    /// family supplying that index. Perturbations of the previous block are
    /// placed on this coordinate.
    fn anchor(&self) -> (usize, usize) {
        match self {
            BlockKind::Quad4 => (1, 1),
            _ => (0, 0),
        }
    }

    /// Fixed coordinates (local) of member `i` of family `f`.
    fn local_site(&self, f: usize, i: u64, eps: &Rational, sigma: &Rational) -> Vec<(usize, Rational)> {
        let i = idx(i);
        match (self, f) {
            (BlockKind::Grid2 | BlockKind::Hypergrid(_), f) => vec![(f, i)],
            (BlockKind::Grid3p, 0) => vec![(0, i), (2, Rational::zero())],
            (BlockKind::Grid3p, _) => vec![(1, i), (2, eps.clone())],
            (BlockKind::Quad4, 0) => vec![(0, i), (2, eps.clone()), (3, Rational::zero())],
            (BlockKind::Quad4, 1) => vec![(1, i), (2, Rational::zero()), (3, Rational::zero())],
            (BlockKind::Quad4, _) => vec![(1, Rational::zero()), (2, i), (3, sigma.clone())],
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockKind::Grid2 => f.write_str("grid2"),
            BlockKind::Grid3p => f.write_str("grid3p"),
            BlockKind::Quad4 => f.write_str("quad4"),
            BlockKind::Hypergrid(k) => write!(f, "hypergrid:{k}"),
        }
    }
}

impl std::str::FromStr for BlockKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<BlockKind> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "grid2" => Ok(BlockKind::Grid2),
            "grid3p" | "grid3" => Ok(BlockKind::Grid3p),
            "quad4" => Ok(BlockKind::Quad4),
            _ => match s.strip_prefix("hypergrid:").map(str::parse::<usize>) {
                Some(Ok(k)) if k >= 1 => Ok(BlockKind::Hypergrid(k)),
                _ => Err(Error::Malformed(format!(
                    "unknown block `{s}` (expected grid2, grid3p, quad4 or hypergrid:K)"
                ))),
            },
        }
    }
}

/// Everything needed to build a chain.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    pub blocks: Vec<BlockKind>,
    pub n: u64,
    pub epsilon: Option<Rational>,
    pub metric: Metric,
    /// Shift grid families cyclically so that all sites become disjoint.
    /// Needs ε and at least two blocks.
    pub perturb: bool,
    /// Total dimension; extra coordinates beyond the blocks are slack.
    pub target_dim: Option<usize>,
    pub mode: Mode,
    /// Separator value σ on the far side of each aggregation.
    pub separator: Rational,
    /// Target width of interval witnesses.
    pub width: Rational,
    /// Per-block family names; defaults to `b{b}.` plus the block's names.
    pub family_names: Option<Vec<Vec<String>>>,
    pub generator: String,
}

impl ChainSpec {
    pub fn new(blocks: Vec<BlockKind>, n: u64) -> Self {
        ChainSpec {
            blocks,
            n,
            epsilon: None,
            metric: Metric::Euclidean,
            perturb: false,
            target_dim: None,
            mode: Mode::Exact,
            separator: Rational::one(),
            width: default_interval_width(),
            family_names: None,
            generator: "chain".into(),
        }
    }

    pub fn consumed_dim(&self) -> usize {
        consumed_dim(&self.blocks)
    }
}

fn consumed_dim(blocks: &[BlockKind]) -> usize {
    blocks.iter().map(BlockKind::dim).sum::<usize>() + blocks.len().saturating_sub(1)
}

struct Layout {
    offsets: Vec<usize>,
    seps: Vec<Option<usize>>,
    /// Site index of member 1 of each family, per block.
    family_base: Vec<Vec<usize>>,
}

impl Layout {
    fn new(blocks: &[BlockKind], n: u64) -> Layout {
        let (mut offsets, mut seps, mut family_base) = (Vec::new(), Vec::new(), Vec::new());
        let (mut pos, mut site) = (0, 0);
        for (b, kind) in blocks.iter().enumerate() {
            offsets.push(pos);
            pos += kind.dim();
            if b > 0 {
                seps.push(Some(pos));
                pos += 1;
            } else {
                seps.push(None);
            }
            family_base.push(
                (0..kind.exponent() as usize)
                    .map(|f| site + f * n as usize)
                    .collect(),
            );
            site += kind.exponent() as usize * n as usize;
        }
        Layout { offsets, seps, family_base }
    }

    fn site(&self, b: usize, f: usize, i: u64) -> usize {
        self.family_base[b][f] + (i - 1) as usize
    }

    fn is_separator(&self, c: usize) -> bool {
        self.seps.contains(&Some(c))
    }
}

/// Builds the chain described by `spec`, one certificate per combination of
/// block tuples.
pub fn build_chain(spec: &ChainSpec) -> Result<Construction> {
    let ChainSpec { blocks, n, metric, mode, separator: sigma, .. } = spec;
    let n = *n;
    check_n(n)?;
    if blocks.is_empty() {
        return Err(Error::InvalidParameter("a chain needs at least one block".into()));
    }
    let c = blocks.len();
    let perturb = spec.perturb && c > 1;
    let needs_eps = perturb || blocks.iter().any(BlockKind::needs_epsilon);
    let eps = match (&spec.epsilon, needs_eps) {
        (Some(e), _) => {
            check_epsilon_for(metric, n, e)?;
            e.clone()
        }
        (None, false) => Rational::zero(),
        (None, true) => return Err(Error::InvalidParameter("this chain needs epsilon".into())),
    };
    if *sigma <= Rational::zero() {
        return Err(Error::InvalidParameter("separator must be positive".into()));
    }
    if *mode == Mode::Exact && !matches!(metric, Metric::Euclidean | Metric::L1) {
        return Err(Error::Unsupported(format!(
            "exact witnesses are available for euclidean and l1 only, not {metric}; use interval mode"
        )));
    }
    let consumed = consumed_dim(blocks);
    let dim = spec.target_dim.unwrap_or(consumed);
    if dim < consumed {
        return Err(Error::InvalidParameter(format!("target dimension {dim} is below the {consumed} the blocks need")));
    }
    let names = match &spec.family_names {
        Some(names) => {
            if names.len() != c || names.iter().zip(blocks).any(|(ns, k)| ns.len() != k.exponent() as usize) {
                return Err(Error::InvalidParameter("family names do not match the blocks".into()));
            }
            names.clone()
        }
        None => blocks
            .iter()
            .enumerate()
            .map(|(b, k)| {
                let prefix = if c > 1 { format!("b{b}.") } else { String::new() };
                k.family_names().into_iter().map(|s| format!("{prefix}{s}")).collect()
            })
            .collect(),
    };

    let layout = Layout::new(blocks, n);
    let shift = |f: usize| &eps / idx(f as u64);
    let next_anchor = |b: usize| {
        let nb = (b + 1) % c;
        layout.offsets[nb] + blocks[nb].anchor().0
    };

    let mut sites = Vec::new();
    for (b, kind) in blocks.iter().enumerate() {
        for f in 0..kind.exponent() as usize {
            for i in 1..=n {
                let mut fixed: Vec<(usize, Rational)> = Vec::with_capacity(dim);
                let local: Vec<_> = kind
                    .local_site(f, i, &eps, sigma)
                    .into_iter()
                    .map(|(lc, v)| (layout.offsets[b] + lc, v))
                    .collect();
                let own = layout.offsets[b]..layout.offsets[b] + kind.dim();
                for g in 0..dim {
                    if own.contains(&g) {
                        continue;
                    }
                    let v = if layout.seps[b] == Some(g) {
                        sigma.clone()
                    } else if perturb && kind.is_grid() && f > 0 && g == next_anchor(b) {
                        shift(f)
                    } else {
                        Rational::zero()
                    };
                    fixed.push((g, v));
                }
                fixed.extend(local);
                let label = format!("{}{}", names[b][f], i);
                sites.push(AxisAlignedFlat::new(dim, fixed, label)?);
            }
        }
    }

    let fam_total: usize = blocks.iter().map(|k| k.exponent() as usize).sum();
    let ctx = Ctx { blocks, layout: &layout, eps: &eps, sigma, metric, perturb, dim, sites: &sites };
    let certs = index_tuples(fam_total, n)
        .map(|t| {
            let mut per_block = Vec::with_capacity(c);
            let mut rest = &t[..];
            for k in blocks {
                let (head, tail) = rest.split_at(k.exponent() as usize);
                per_block.push(head.to_vec());
                rest = tail;
            }
            let tuple: Vec<usize> = per_block
                .iter()
                .enumerate()
                .flat_map(|(b, ix)| ix.iter().enumerate().map(move |(f, &i)| (b, f, i)))
                .map(|(b, f, i)| layout.site(b, f, i))
                .collect();
            let witness = match mode {
                Mode::Exact => Witness::Exact(ctx.exact_witness(&per_block)),
                Mode::Interval => Witness::Interval(ctx.interval_witness(&per_block, &spec.width)?),
            };
            Ok(Certificate::new(tuple, witness))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut params = Params::new(spec.generator.clone(), n);
    params.epsilon = needs_eps.then(|| eps.clone());
    params.flat_dim = blocks.iter().map(BlockKind::flat_dim).max().unwrap_or(1);
    params.blocks = blocks.clone();
    params.separator = (c > 1 || blocks.contains(&BlockKind::Quad4)).then(|| sigma.clone());
    params.claims_non_intersection = perturb || blocks.iter().all(|k| !k.is_grid());
    Construction::new(dim, metric.clone(), sites, certs, params)
}

struct Ctx<'a> {
    blocks: &'a [BlockKind],
    layout: &'a Layout,
    eps: &'a Rational,
    sigma: &'a Rational,
    metric: &'a Metric,
    perturb: bool,
    dim: usize,
    sites: &'a [AxisAlignedFlat],
}

impl Ctx<'_> {
    fn anchor_value(&self, b: usize, ix: &[Vec<u64>]) -> Rational {
        let nb = (b + 1) % self.blocks.len();
        idx(ix[nb][self.blocks[nb].anchor().1])
    }

    fn perturbed(&self, kind: &BlockKind) -> bool {
        self.perturb && kind.is_grid()
    }

    fn exact_witness(&self, ix: &[Vec<u64>]) -> Point {
        let l1 = matches!(self.metric, Metric::L1);
        let two = idx(2);
        let mut w = vec![RadicalSum::zero(); self.dim];
        for (b, kind) in self.blocks.iter().enumerate() {
            let o = self.layout.offsets[b];
            let i: Vec<Rational> = ix[b].iter().map(|&v| idx(v)).collect();
            match kind {
                BlockKind::Grid2 | BlockKind::Hypergrid(_) if self.perturbed(kind) => {
                    let anchor = self.anchor_value(b, ix);
                    w[o] = i[0].clone().into();
                    for f in 1..i.len() {
                        let e = self.eps / idx(f as u64);
                        let off = if l1 { e.into() } else { balancing_offset(&anchor, &e) };
                        w[o + f] = RadicalSum::from(&i[f]) + off;
                    }
                }
                BlockKind::Grid2 | BlockKind::Hypergrid(_) => {
                    for (f, v) in i.iter().enumerate() {
                        w[o + f] = (v + rational(1, 4)).into();
                    }
                }
                BlockKind::Grid3p => {
                    w[o] = i[0].clone().into();
                    w[o + 1] = i[1].clone().into();
                    w[o + 2] = (self.eps / &two).into();
                }
                BlockKind::Quad4 => {
                    let (x, j, k) = (&i[0], &i[1], &i[2]);
                    if l1 {
                        w[o] = (x + self.eps).into();
                        w[o + 3] = ((self.sigma + j - k) / &two).into();
                    } else {
                        w[o] = RadicalSum::from(x) + balancing_offset(k, self.eps);
                        w[o + 3] = ((j * j - k * k + self.sigma * self.sigma) / (&two * self.sigma)).into();
                    }
                    w[o + 1] = j.clone().into();
                    w[o + 2] = k.clone().into();
                }
            }
        }
        let x = Point::new(w.clone());
        let partial = |site: usize| -> RadicalSum {
            self.sites[site]
                .fixed()
                .iter()
                .filter(|(c, _)| !self.layout.is_separator(**c))
                .map(|(&c, v)| {
                    let d = &x.0[c] - &RadicalSum::from(v);
                    if l1 {
                        d.abs()
                    } else {
                        d.pow(2)
                    }
                })
                .sum()
        };
        let f0 = partial(self.layout.site(0, 0, ix[0][0]));
        for b in 1..self.blocks.len() {
            let fb = partial(self.layout.site(b, 0, ix[b][0]));
            let t = if l1 {
                (RadicalSum::from(self.sigma) + fb - &f0).scale(&rational(1, 2))
            } else {
                (fb - &f0 + RadicalSum::from(self.sigma * self.sigma)).scale(&(Rational::one() / (&two * self.sigma)))
            };
            w[self.layout.seps[b].expect("later blocks have separators")] = t;
        }
        Point::new(w)
    }

    fn interval_witness(&self, ix: &[Vec<u64>], width: &Rational) -> Result<super::IntervalWitness> {
        let mut fixed = Vec::new();
        let mut tasks = Vec::new();
        let half = rational(1, 2);
        for (b, kind) in self.blocks.iter().enumerate() {
            let o = self.layout.offsets[b];
            let site = |f: usize| self.layout.site(b, f, ix[b][f]);
            let i: Vec<Rational> = ix[b].iter().map(|&v| idx(v)).collect();
            match kind {
                BlockKind::Grid2 | BlockKind::Hypergrid(_) => {
                    let first = if self.perturbed(kind) { i[0].clone() } else { &i[0] + rational(1, 4) };
                    fixed.push((o, first));
                    for f in 1..i.len() {
                        tasks.push(SolveTask {
                            coord: o + f,
                            a: site(0),
                            b: site(f),
                            bracket: Some((i[f].clone(), &i[f] + &half)),
                        });
                    }
                }
                BlockKind::Grid3p => {
                    fixed.push((o, i[0].clone()));
                    fixed.push((o + 1, i[1].clone()));
                    tasks.push(SolveTask { coord: o + 2, a: site(0), b: site(1), bracket: Some((Rational::zero(), self.eps.clone())) });
                }
                BlockKind::Quad4 => {
                    fixed.push((o + 1, i[1].clone()));
                    fixed.push((o + 2, i[2].clone()));
                    tasks.push(SolveTask { coord: o, a: site(0), b: site(1), bracket: Some((i[0].clone(), &i[0] + &half)) });
                    tasks.push(SolveTask { coord: o + 3, a: site(1), b: site(2), bracket: None });
                }
            }
        }
        let rep0 = self.layout.site(0, 0, ix[0][0]);
        for b in 1..self.blocks.len() {
            tasks.push(SolveTask {
                coord: self.layout.seps[b].expect("later blocks have separators"),
                a: rep0,
                b: self.layout.site(b, 0, ix[b][0]),
                bracket: None,
            });
        }
        solve_witness(self.sites, self.dim, fixed, tasks, self.metric, width)
    }
}

/// Block decomposition reaching a target dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub target_dim: usize,
    pub blocks: Vec<BlockKind>,
    /// Coordinates used by the blocks and separators; the rest is slack.
    pub consumed_dim: usize,
    /// Exponent `e` of the `n^e` tuple count.
    pub exponent: u32,
}

/// Chooses blocks for dimension `d ≥ 2`. The exponent is `⌈2d/3⌉`.
pub fn plan_blocks(d: usize) -> Result<Plan> {
    let blocks = match d {
        0 | 1 => return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {d}"))),
        2 => vec![BlockKind::Grid2],
        3 => vec![BlockKind::Grid3p],
        _ => match d % 3 {
            2 => vec![BlockKind::Grid2; (d + 1) / 3],
            0 => vec![BlockKind::Grid2; d / 3],
            _ => {
                let mut v = vec![BlockKind::Quad4];
                v.extend(std::iter::repeat(BlockKind::Grid2).take((d - 4) / 3));
                v
            }
        },
    };
    let exponent = blocks.iter().map(BlockKind::exponent).sum();
    Ok(Plan { target_dim: d, consumed_dim: consumed_dim(&blocks), blocks, exponent })
}

/// Plans dimension `d` and builds the (Euclidean, exact) construction.
pub fn plan(d: usize, n: u64, eps: &Rational) -> Result<(Plan, Construction)> {
    let p = plan_blocks(d)?;
    let mut spec = ChainSpec::new(p.blocks.clone(), n);
    spec.epsilon = Some(eps.clone());
    spec.perturb = true;
    spec.target_dim = Some(d);
    spec.generator = "plan".into();
    if p.blocks.len() == 1 {
        spec.family_names = Some(vec![p.blocks[0].family_names()]);
    }
    let c = build_chain(&spec)?;
    Ok((p, c))
}

/// `c` aggregated copies of the k-flat hypergrid in dimension `c(k+2) - 1`.
/// With `eps` the copies are perturbed into pairwise disjoint flats;
/// without it flats of different families intersect.
pub fn plan_kflat(k: usize, c: usize, n: u64, eps: Option<&Rational>) -> Result<Construction> {
    if k == 0 || c == 0 {
        return Err(Error::InvalidParameter("k and the number of copies must be at least 1".into()));
    }
    let mut spec = ChainSpec::new(vec![BlockKind::Hypergrid(k); c], n);
    spec.epsilon = eps.cloned();
    spec.perturb = eps.is_some();
    spec.generator = "kflat".into();
    build_chain(&spec)
}
