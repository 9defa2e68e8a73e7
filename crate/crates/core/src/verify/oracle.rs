//! Floating-point rediscovery of Voronoi tuples, independent of the witnesses'
//! algebra: sample points, refine towards equidistance, keep what holds up.

use super::VerificationReport;
use crate::constructions::Construction;
use crate::flats::Metric;
use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

const CHUNK: usize = 512;
const MAX_ITER: usize = 60;
const ROUNDS: usize = 4;

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub jobs: Option<usize>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { samples: 10_000, seed: 0, tol: 1e-9, jobs: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveredTuple {
    pub tuple: Vec<usize>,
    pub labels: Vec<String>,
    /// Refined point of the first sample that reached this tuple.
    pub witness: Vec<f64>,
    /// Largest minus smallest distance to the tuple's sites.
    pub spread: f64,
    /// Distance gap to the nearest site outside the tuple.
    pub margin: f64,
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub discovered: Vec<DiscoveredTuple>,
    /// Samples that ended on an accepted tuple.
    pub converged: usize,
    /// Samples whose refinement did not reach tolerance.
    pub unconverged: usize,
}

impl OracleResult {
    pub fn tuples(&self) -> BTreeSet<Vec<usize>> {
        self.discovered.iter().map(|d| d.tuple.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparison {
    /// No tuple was discovered that is not certified.
    pub consistent: bool,
    /// Certified but never discovered.
    pub missing: Vec<Vec<usize>>,
    /// Discovered but not certified.
    pub extra: Vec<Vec<usize>>,
}

pub fn oracle_compare(report: &VerificationReport, o: &OracleResult) -> Comparison {
    let certified = report.passing_tuples();
    let found = o.tuples();
    let missing: Vec<_> = certified.difference(&found).cloned().collect();
    let extra: Vec<_> = found.difference(&certified).cloned().collect();
    Comparison { consistent: extra.is_empty(), missing, extra }
}

struct Sites {
    /// Per site: fixed coordinates and their values.
    fixed: Vec<Vec<(usize, f64)>>,
    metric: Metric,
}

impl Sites {
    fn dist(&self, s: usize, x: &[f64]) -> f64 {
        self.metric.dist_f64(self.fixed[s].iter().map(|&(c, v)| x[c] - v))
    }

    fn all(&self, x: &[f64]) -> Vec<f64> {
        (0..self.fixed.len()).map(|s| self.dist(s, x)).collect()
    }

    fn residuals(&self, set: &[usize], x: &[f64]) -> DVector<f64> {
        let d: Vec<f64> = set.iter().map(|&s| self.dist(s, x)).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        DVector::from_iterator(d.len(), d.iter().map(|v| v - mean))
    }
}

fn nearest(dist: &[f64], m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    order.truncate(m);
    order.sort_unstable();
    order
}

/// Damped Gauss–Newton on the spread of distances to `set`, with forward
/// difference derivatives.
fn refine(sites: &Sites, set: &[usize], x: &mut [f64], tol: f64) {
    let d = x.len();
    let mut lambda = 1e-3;
    let mut r = sites.residuals(set, x);
    let mut cost = r.norm_squared();
    for _ in 0..MAX_ITER {
        if r.amax() < tol * 1e-3 {
            break;
        }
        let mut jac = DMatrix::zeros(set.len(), d);
        for c in 0..d {
            let h = 1e-7 * x[c].abs().max(1.0);
            let old = x[c];
            x[c] = old + h;
            let rh = sites.residuals(set, x);
            x[c] = old;
            jac.set_column(c, &((rh - &r) / h));
        }
        let jt = jac.transpose();
        let g = &jt * &r;
        let jtj = &jt * &jac;
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..d {
                a[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = sites.residuals(set, &trial);
            let ct = rt.norm_squared();
            if ct < cost {
                x.copy_from_slice(&trial);
                r = rt;
                cost = ct;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
}

struct Hit {
    sample: usize,
    tuple: Vec<usize>,
    witness: Vec<f64>,
    spread: f64,
    margin: f64,
}

fn run_sample(sites: &Sites, sizes: &[usize], x0: &[f64], tol: f64, sample: usize) -> Vec<Hit> {
    let mut hits = Vec::new();
    for &m in sizes {
        let mut x = x0.to_vec();
        let mut set = nearest(&sites.all(&x), m);
        for _ in 0..ROUNDS {
            refine(sites, &set, &mut x, tol);
            let dist = sites.all(&x);
            let now = nearest(&dist, m);
            if now == set {
                let inside: Vec<f64> = set.iter().map(|&s| dist[s]).collect();
                let hi = inside.iter().copied().fold(f64::MIN, f64::max);
                let lo = inside.iter().copied().fold(f64::MAX, f64::min);
                let outside = (0..dist.len())
                    .filter(|s| !set.contains(s))
                    .map(|s| dist[s])
                    .fold(f64::INFINITY, f64::min);
                let (spread, margin) = (hi - lo, outside - hi);
                if spread < tol && margin > 10.0 * tol {
                    hits.push(Hit { sample, tuple: set.clone(), witness: x.clone(), spread, margin });
                }
                break;
            }
            set = now;
        }
    }
    hits
}

/// Samples points uniformly in the bounding box of the certificate witnesses
/// and refines each towards a point equidistant from its `m` nearest sites,
/// for every tuple size `m` occurring among the certificates (all sizes from
/// 2 to d + 1 when there are none). Deterministic for a fixed seed: sample
/// chunks draw from separate streams of the seeded generator.
pub fn oracle_discover(c: &Construction, opts: &OracleOptions) -> OracleResult {
    let sites = Sites {
        fixed: c
            .sites
            .iter()
            .map(|s| s.fixed().iter().map(|(&k, v)| (k, v.to_f64().unwrap_or(f64::NAN))).collect())
            .collect(),
        metric: c.metric.clone(),
    };
    let mut sizes: Vec<usize> = c.certificates.iter().map(|cert| cert.tuple.len()).collect::<BTreeSet<_>>().into_iter().collect();
    if sizes.is_empty() {
        sizes = (2..=c.dim + 1).filter(|&m| m <= c.sites.len()).collect();
    }
    let (mut lo, mut hi) = (vec![f64::INFINITY; c.dim], vec![f64::NEG_INFINITY; c.dim]);
    for cert in &c.certificates {
        for (k, v) in cert.witness.to_f64().into_iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    if c.certificates.is_empty() {
        // fall back to the box spanned by the sites' fixed values
        lo.fill(0.0);
        hi.fill(1.0);
        for f in &sites.fixed {
            for &(k, v) in f {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
    }
    let chunks = opts.samples.div_ceil(CHUNK);
    let work = |chunk: usize| -> Vec<Hit> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(chunk as u64);
        let mut out = Vec::new();
        let end = ((chunk + 1) * CHUNK).min(opts.samples);
        for sample in chunk * CHUNK..end {
            let x0: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(&a, &b)| if b > a { rng.random_range(a..=b) } else { a })
                .collect();
            if sites.fixed.is_empty() {
                continue;
            }
            out.extend(run_sample(&sites, &sizes, &x0, opts.tol, sample));
        }
        out
    };
    let run = || (0..chunks).into_par_iter().map(work).collect::<Vec<_>>();
    let per_chunk = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map(|p| p.install(run))
            .unwrap_or_else(|_| run()),
        None => run(),
    };

    let mut found: BTreeMap<Vec<usize>, DiscoveredTuple> = BTreeMap::new();
    let mut hit_samples = BTreeSet::new();
    for hit in per_chunk.into_iter().flatten() {
        hit_samples.insert(hit.sample);
        found
            .entry(hit.tuple.clone())
            .and_modify(|d| d.hits += 1)
            .or_insert_with(|| DiscoveredTuple {
                labels: c.tuple_labels(&hit.tuple).into_iter().map(String::from).collect(),
                tuple: hit.tuple,
                witness: hit.witness,
                spread: hit.spread,
                margin: hit.margin,
                hits: 1,
            });
    }
    OracleResult {
        seed: opts.seed,
        samples: opts.samples,
        tol: opts.tol,
        discovered: found.into_values().collect(),
        converged: hit_samples.len(),
        unconverged: opts.samples - hit_samples.len(),
    }
}
