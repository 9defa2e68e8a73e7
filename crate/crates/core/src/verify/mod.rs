//! Certificate checking, tuple counting and the sampling oracle.

mod oracle;

pub use oracle::{oracle_compare, oracle_discover, Comparison, DiscoveredTuple, OracleOptions, OracleResult};

use crate::constructions::{Certificate, Construction, IntervalWitness, Mode, Witness};
use crate::error::{Error, Result};
use crate::exactnum::{ceil_log2, Interval, RadicalSum, Rational, Sign};
use crate::flats::{box_pth_power_difference, exact_pth_power, flats_intersect, Metric, Point};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    ExactPass,
    IntervalPass,
    Fail(String),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Fail(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::ExactPass => f.write_str("exact-pass"),
            Verdict::IntervalPass => f.write_str("interval-pass"),
            Verdict::Fail(r) => write!(f, "fail: {r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateVerdict {
    pub tuple: Vec<usize>,
    pub labels: Vec<String>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundCheck {
    pub n: u64,
    pub d: usize,
    pub exponent: u32,
    pub required: BigUint,
    pub achieved: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub generator: String,
    pub dim: usize,
    pub metric: Metric,
    pub sites: usize,
    pub verdicts: Vec<CertificateVerdict>,
    /// Pairs of intersecting sites, by label.
    pub intersecting_pairs: Vec<(String, String)>,
    pub claims_non_intersection: bool,
    /// Distinct tuples among passing certificates.
    pub distinct_tuples: usize,
    /// Absent for constructions without sites.
    pub bound: Option<BoundCheck>,
    /// Wall time; not part of the canonical report.
    pub elapsed: Option<Duration>,
}

impl VerificationReport {
    pub fn total(&self) -> usize {
        self.verdicts.len()
    }

    pub fn exact_passed(&self) -> usize {
        self.verdicts.iter().filter(|v| v.verdict == Verdict::ExactPass).count()
    }

    pub fn interval_passed(&self) -> usize {
        self.verdicts.iter().filter(|v| v.verdict == Verdict::IntervalPass).count()
    }

    pub fn passed(&self) -> usize {
        self.exact_passed() + self.interval_passed()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CertificateVerdict> {
        self.verdicts.iter().filter(|v| !v.verdict.passed())
    }

    pub fn all_certificates_pass(&self) -> bool {
        self.passed() == self.total()
    }

    pub fn non_intersecting(&self) -> bool {
        self.intersecting_pairs.is_empty()
    }

    /// Every certificate passes, the bound holds, and the sites are disjoint
    /// if the construction says so.
    pub fn success(&self) -> bool {
        self.all_certificates_pass()
            && self.bound.as_ref().map_or(true, |b| b.pass)
            && (!self.claims_non_intersection || self.non_intersecting())
    }

    pub fn passing_tuples(&self) -> BTreeSet<Vec<usize>> {
        self.verdicts.iter().filter(|v| v.verdict.passed()).map(|v| v.tuple.clone()).collect()
    }

    /// Short summary such as `16/16 exact`.
    pub fn summary(&self) -> String {
        let (e, i, t) = (self.exact_passed(), self.interval_passed(), self.total());
        match (e, i) {
            (_, 0) => format!("{e}/{t} exact"),
            (0, _) => format!("{i}/{t} interval"),
            _ => format!("{}/{t} ({e} exact, {i} interval)", e + i),
        }
    }
}

/// `⌈2d/3⌉`.
pub fn bound_exponent(d: usize) -> u32 {
    (2 * d).div_ceil(3) as u32
}

/// `n^⌈2d/3⌉`, computed exactly.
pub fn required_count(n: u64, d: usize) -> BigUint {
    num_traits::pow(BigUint::from(n), bound_exponent(d) as usize)
}

/// Passes iff `count ≥ n^⌈2d/3⌉`.
pub fn check_bound(count: u64, n: u64, d: usize) -> bool {
    BigUint::from(count) >= required_count(n, d)
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Require every certificate to be in this mode.
    pub mode: Option<Mode>,
}

/// Checks one certificate. Malformed certificates (unknown sites, wrong
/// dimension) are errors; geometric failures are [`Verdict::Fail`].
pub fn verify_certificate(c: &Construction, cert: &Certificate) -> Result<Verdict> {
    c.validate_certificate(cert)?;
    Ok(match &cert.witness {
        Witness::Exact(x) => verify_exact(c, &cert.tuple, x),
        Witness::Interval(w) => verify_interval(c, &cert.tuple, w),
    })
}

fn label(c: &Construction, i: usize) -> &str {
    c.sites[i].label()
}

fn verify_exact(c: &Construction, tuple: &[usize], x: &Point) -> Verdict {
    let Some(p) = c.metric.integer_exponent() else {
        return Verdict::Fail(format!(
            "exact equality is not decidable under {}; an interval witness is needed",
            c.metric
        ));
    };
    let dist: Vec<RadicalSum> = c.sites.iter().map(|s| exact_pth_power(x, s, p)).collect();
    let rep = tuple[0];
    for &t in &tuple[1..] {
        if !(&dist[t] - &dist[rep]).is_zero() {
            return Verdict::Fail(format!(
                "equidistance broken between {} and {} (difference ≈ {:.3e})",
                label(c, rep),
                label(c, t),
                (&dist[t] - &dist[rep]).to_f64()
            ));
        }
    }
    let members: BTreeSet<usize> = tuple.iter().copied().collect();
    for (o, d) in dist.iter().enumerate() {
        if members.contains(&o) {
            continue;
        }
        match (d - &dist[rep]).sign() {
            Sign::Positive => {}
            Sign::Zero => return Verdict::Fail(format!("dominance violated: {} ties with the tuple", label(c, o))),
            Sign::Negative => {
                return Verdict::Fail(format!("dominance violated: {} is closer than the tuple", label(c, o)))
            }
        }
    }
    Verdict::ExactPass
}

/// Precision for enclosing fractional powers over a box.
fn box_bits(bounds: &[Interval]) -> u64 {
    let w = bounds.iter().map(Interval::width).filter(|w| !w.is_zero()).min();
    match w {
        Some(w) => ceil_log2(&(Rational::one() / w)) + 72,
        None => 128,
    }
}

fn verify_interval(c: &Construction, tuple: &[usize], w: &IntervalWitness) -> Verdict {
    match check_interval(c, tuple, w) {
        Ok(()) => Verdict::IntervalPass,
        Err(reason) => Verdict::Fail(reason),
    }
}

fn check_interval(c: &Construction, tuple: &[usize], w: &IntervalWitness) -> std::result::Result<(), String> {
    let members: BTreeSet<usize> = tuple.iter().copied().collect();
    if w.steps.len() + 1 != tuple.len() {
        return Err(format!("{} steps for a tuple of {} sites", w.steps.len(), tuple.len()));
    }
    // the steps must connect the whole tuple along distinct coordinates
    let mut coords = BTreeSet::new();
    let mut comp: Vec<usize> = (0..c.sites.len()).collect();
    fn root(comp: &mut [usize], mut i: usize) -> usize {
        while comp[i] != i {
            comp[i] = comp[comp[i]];
            i = comp[i];
        }
        i
    }
    for s in &w.steps {
        if !members.contains(&s.a) || !members.contains(&s.b) {
            return Err(format!("step {}–{} leaves the tuple", label(c, s.a), label(c, s.b)));
        }
        if !coords.insert(s.coord) {
            return Err(format!("coordinate {} is solved twice", s.coord));
        }
        let (ra, rb) = (root(&mut comp, s.a), root(&mut comp, s.b));
        if ra == rb {
            return Err(format!("step {}–{} closes a cycle", label(c, s.a), label(c, s.b)));
        }
        comp[ra] = rb;
    }
    // each step may depend only on its own and earlier step coordinates
    for (i, s) in w.steps.iter().enumerate() {
        for later in &w.steps[i + 1..] {
            if !c.sites[s.a].agrees_on(&c.sites[s.b], later.coord) {
                return Err(format!(
                    "step {}–{} depends on coordinate {} solved later",
                    label(c, s.a),
                    label(c, s.b),
                    later.coord
                ));
            }
        }
    }
    let bits = box_bits(&w.bounds);
    let diff = |bounds: &[Interval], a: usize, b: usize| {
        box_pth_power_difference(bounds, &c.sites[a], &c.sites[b], &c.metric, bits).map_err(|e| e.to_string())
    };
    for s in &w.steps {
        let mut face = w.bounds.clone();
        let iv = &w.bounds[s.coord];
        face[s.coord] = Interval::point(iv.lower().clone());
        let lo = diff(&face, s.a, s.b)?.sign();
        face[s.coord] = Interval::point(iv.upper().clone());
        let hi = diff(&face, s.a, s.b)?.sign();
        let ok = matches!(
            (lo, hi),
            (Some(Sign::Negative), Some(Sign::Positive)) | (Some(Sign::Positive), Some(Sign::Negative))
        );
        if !ok {
            return Err(format!(
                "no certified sign change between {} and {} along coordinate {}",
                label(c, s.a),
                label(c, s.b),
                s.coord
            ));
        }
    }
    for o in (0..c.sites.len()).filter(|o| !members.contains(o)) {
        let mut dominated = false;
        for &r in tuple {
            if diff(&w.bounds, o, r)?.sign() == Some(Sign::Positive) {
                dominated = true;
                break;
            }
        }
        if !dominated {
            return Err(format!("dominance not certified for {} over the witness box", label(c, o)));
        }
    }
    Ok(())
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn verify_construction(c: &Construction) -> Result<VerificationReport> {
    verify_construction_with(c, &VerifyOptions::default())
}

/// Verifies every certificate and checks all site pairs for intersection.
/// The report does not depend on the number of workers.
pub fn verify_construction_with(c: &Construction, opts: &VerifyOptions) -> Result<VerificationReport> {
    let start = Instant::now();
    c.validate()?;
    let (verdicts, intersecting) = in_pool(opts.jobs, || {
        let verdicts: Vec<Result<CertificateVerdict>> = c
            .certificates
            .par_iter()
            .map(|cert| {
                let verdict = match opts.mode {
                    Some(m) if m != cert.mode() => {
                        Verdict::Fail(format!("certificate is in {} mode, {m} was requested", cert.mode()))
                    }
                    _ => verify_certificate(c, cert)?,
                };
                Ok(CertificateVerdict {
                    tuple: cert.tuple.clone(),
                    labels: c.tuple_labels(&cert.tuple).into_iter().map(String::from).collect(),
                    verdict,
                })
            })
            .collect();
        let n = c.sites.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let intersecting: Vec<Result<Option<(String, String)>>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                Ok(flats_intersect(&c.sites[i], &c.sites[j])?
                    .then(|| (c.sites[i].label().to_string(), c.sites[j].label().to_string())))
            })
            .collect();
        (verdicts, intersecting)
    })?;
    let verdicts = verdicts.into_iter().collect::<Result<Vec<_>>>()?;
    let intersecting_pairs = intersecting.into_iter().filter_map(Result::transpose).collect::<Result<Vec<_>>>()?;
    let distinct: BTreeSet<&Vec<usize>> = verdicts.iter().filter(|v| v.verdict.passed()).map(|v| &v.tuple).collect();
    let distinct_tuples = distinct.len();
    let n = c.params.n;
    let bound = (!c.sites.is_empty() && n >= 1 && c.dim >= 2).then(|| BoundCheck {
        n,
        d: c.dim,
        exponent: bound_exponent(c.dim),
        required: required_count(n, c.dim),
        achieved: distinct_tuples,
        pass: check_bound(distinct_tuples as u64, n, c.dim),
    });
    Ok(VerificationReport {
        generator: c.params.generator.clone(),
        dim: c.dim,
        metric: c.metric.clone(),
        sites: c.sites.len(),
        verdicts,
        intersecting_pairs,
        claims_non_intersection: c.params.claims_non_intersection,
        distinct_tuples,
        bound,
        elapsed: Some(start.elapsed()),
    })
}
