//! The `vlb/1` certificate file and the verification report document.
//!
//! Both are JSON. Rationals are strings `"num/den"`; an exact coordinate is a
//! list of `[radicand, coefficient]` pairs standing for `Σ coefficient·√radicand`
//! (radicand `"1"` is the rational part, the empty list is zero). Interval
//! witnesses store the box as `[lo, hi]` pairs and the steps by site label.
//! Coordinate indices are 0-based. Nothing time-dependent is written, so equal
//! inputs give byte-identical files.

use crate::constructions::{BlockKind, Certificate, Construction, IntervalWitness, Params, Step, Witness};
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational, Interval, RadicalSum};
use crate::flats::{AxisAlignedFlat, Metric, Point};
use crate::verify::{Verdict, VerificationReport};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;

pub const FORMAT: &str = "vlb/1";
pub const REPORT_FORMAT: &str = "vlb-report/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDoc {
    format: String,
    generator: GeneratorDoc,
    dim: usize,
    metric: String,
    sites: Vec<SiteDoc>,
    certificates: Vec<CertDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorDoc {
    name: String,
    n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<String>,
    flat_dim: usize,
    #[serde(default)]
    blocks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    separator: Option<String>,
    claims_non_intersection: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteDoc {
    label: String,
    fixed: Vec<(usize, String)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertDoc {
    tuple: Vec<String>,
    mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<Vec<(String, String)>>>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    bounds: Option<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    steps: Option<Vec<StepDoc>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDoc {
    a: String,
    b: String,
    coord: usize,
}

fn radical_doc(v: &RadicalSum) -> Vec<(String, String)> {
    v.terms().map(|(r, q)| (r.to_string(), format_rational(q))).collect()
}

fn parse_radical(terms: &[(String, String)]) -> Result<RadicalSum> {
    let pairs = terms
        .iter()
        .map(|(r, q)| {
            let r: BigUint = r.trim().parse().map_err(|_| Error::Malformed(format!("bad radicand `{r}`")))?;
            Ok((parse_rational(q)?, r))
        })
        .collect::<Result<Vec<_>>>()?;
    RadicalSum::from_terms(pairs).map_err(|e| Error::Malformed(e.to_string()))
}

/// Serializes a construction as a `vlb/1` document.
pub fn to_json(c: &Construction) -> String {
    let label = |i: usize| c.sites[i].label().to_string();
    let doc = FileDoc {
        format: FORMAT.into(),
        generator: GeneratorDoc {
            name: c.params.generator.clone(),
            n: c.params.n,
            epsilon: c.params.epsilon.as_ref().map(format_rational),
            flat_dim: c.params.flat_dim,
            blocks: c.params.blocks.iter().map(ToString::to_string).collect(),
            separator: c.params.separator.as_ref().map(format_rational),
            claims_non_intersection: c.params.claims_non_intersection,
        },
        dim: c.dim,
        metric: c.metric.to_string(),
        sites: c
            .sites
            .iter()
            .map(|s| SiteDoc {
                label: s.label().into(),
                fixed: s.fixed().iter().map(|(&k, v)| (k, format_rational(v))).collect(),
            })
            .collect(),
        certificates: c
            .certificates
            .iter()
            .map(|cert| {
                let tuple = cert.tuple.iter().map(|&i| label(i)).collect();
                match &cert.witness {
                    Witness::Exact(p) => CertDoc {
                        tuple,
                        mode: "exact".into(),
                        witness: Some(p.0.iter().map(radical_doc).collect()),
                        bounds: None,
                        steps: None,
                    },
                    Witness::Interval(w) => CertDoc {
                        tuple,
                        mode: "interval".into(),
                        witness: None,
                        bounds: Some(
                            w.bounds.iter().map(|i| (format_rational(i.lower()), format_rational(i.upper()))).collect(),
                        ),
                        steps: Some(
                            w.steps.iter().map(|s| StepDoc { a: label(s.a), b: label(s.b), coord: s.coord }).collect(),
                        ),
                    },
                }
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("documents serialize");
    out.push('\n');
    out
}

/// Parses a `vlb/1` document. Any structural problem is [`Error::Malformed`]
/// (or [`Error::UnknownLabel`] for tuples naming missing sites).
pub fn from_json(text: &str) -> Result<Construction> {
    let doc: FileDoc = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    if doc.format != FORMAT {
        return Err(Error::Malformed(format!("unsupported format `{}` (expected {FORMAT})", doc.format)));
    }
    let metric: Metric = doc.metric.parse()?;
    let sites = doc
        .sites
        .iter()
        .map(|s| {
            let fixed = s.fixed.iter().map(|(k, v)| Ok((*k, parse_rational(v)?))).collect::<Result<Vec<_>>>()?;
            AxisAlignedFlat::new(doc.dim, fixed, s.label.clone()).map_err(|e| Error::Malformed(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let index: HashMap<&str, usize> = sites.iter().enumerate().map(|(i, s)| (s.label(), i)).collect();
    let lookup = |l: &str| index.get(l).copied().ok_or_else(|| Error::UnknownLabel(l.to_string()));
    let certificates = doc
        .certificates
        .iter()
        .map(|c| {
            let tuple = c.tuple.iter().map(|l| lookup(l)).collect::<Result<Vec<_>>>()?;
            let witness = match (c.mode.as_str(), &c.witness, &c.bounds, &c.steps) {
                ("exact", Some(w), None, None) => {
                    Witness::Exact(Point::new(w.iter().map(|t| parse_radical(t)).collect::<Result<_>>()?))
                }
                ("interval", None, Some(b), Some(s)) => {
                    let bounds = b
                        .iter()
                        .map(|(lo, hi)| Interval::new(parse_rational(lo)?, parse_rational(hi)?))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| Error::Malformed(e.to_string()))?;
                    let steps = s
                        .iter()
                        .map(|s| Ok(Step { a: lookup(&s.a)?, b: lookup(&s.b)?, coord: s.coord }))
                        .collect::<Result<Vec<_>>>()?;
                    Witness::Interval(IntervalWitness { bounds, steps })
                }
                (m, ..) => return Err(Error::Malformed(format!("certificate in mode `{m}` has the wrong fields"))),
            };
            Ok(Certificate::new(tuple, witness))
        })
        .collect::<Result<Vec<_>>>()?;
    let g = &doc.generator;
    let mut params = Params::new(g.name.clone(), g.n);
    params.epsilon = g.epsilon.as_deref().map(parse_rational).transpose()?;
    params.flat_dim = g.flat_dim;
    params.blocks = g.blocks.iter().map(|b| b.parse::<BlockKind>()).collect::<Result<_>>()?;
    params.separator = g.separator.as_deref().map(parse_rational).transpose()?;
    params.claims_non_intersection = g.claims_non_intersection;
    let c = Construction::new(doc.dim, metric, sites, certificates, params).map_err(|e| match e {
        Error::UnknownLabel(_) => e,
        other => Error::Malformed(other.to_string()),
    })?;
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = c.certificates.iter().find(|x| !seen.insert(&x.tuple)) {
        return Err(Error::Malformed(format!("duplicate certificate for {:?}", c.tuple_labels(&dup.tuple))));
    }
    Ok(c)
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    format: &'static str,
    generator: &'a str,
    dim: usize,
    metric: String,
    sites: usize,
    certificates: usize,
    exact_pass: usize,
    interval_pass: usize,
    distinct_tuples: usize,
    verdicts: Vec<VerdictDoc>,
    claims_non_intersection: bool,
    intersecting_pairs: &'a [(String, String)],
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<BoundDoc>,
    success: bool,
}

#[derive(Serialize)]
struct VerdictDoc {
    tuple: Vec<String>,
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

#[derive(Serialize)]
struct BoundDoc {
    n: u64,
    d: usize,
    exponent: u32,
    required: String,
    achieved: usize,
    pass: bool,
}

/// Machine-readable report; timing is left out so the document is canonical.
pub fn report_to_json(r: &VerificationReport) -> String {
    let doc = ReportDoc {
        format: REPORT_FORMAT,
        generator: &r.generator,
        dim: r.dim,
        metric: r.metric.to_string(),
        sites: r.sites,
        certificates: r.total(),
        exact_pass: r.exact_passed(),
        interval_pass: r.interval_passed(),
        distinct_tuples: r.distinct_tuples,
        verdicts: r
            .verdicts
            .iter()
            .map(|v| {
                let (verdict, reason) = match &v.verdict {
                    Verdict::ExactPass => ("exact-pass", None),
                    Verdict::IntervalPass => ("interval-pass", None),
                    Verdict::Fail(why) => ("fail", Some(why.clone())),
                };
                VerdictDoc { tuple: v.labels.clone(), verdict, reason }
            })
            .collect(),
        claims_non_intersection: r.claims_non_intersection,
        intersecting_pairs: &r.intersecting_pairs,
        bound: r.bound.as_ref().map(|b| BoundDoc {
            n: b.n,
            d: b.d,
            exponent: b.exponent,
            required: b.required.to_string(),
            achieved: b.achieved,
            pass: b.pass,
        }),
        success: r.success(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("reports serialize");
    out.push('\n');
    out
}

/// Human-readable summary: failures, intersections and the bound.
pub fn render_report(r: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "generator   {}", r.generator);
    let _ = writeln!(s, "space       R^{} ({})", r.dim, r.metric);
    let _ = writeln!(s, "sites       {}", r.sites);
    let _ = writeln!(s, "certified   {}", r.summary());
    for f in r.failures() {
        let _ = writeln!(s, "  FAIL {{{}}}: {}", f.labels.join(", "), f.verdict);
    }
    let pairs = r.intersecting_pairs.len();
    let note = if r.claims_non_intersection { "" } else { " (allowed)" };
    let _ = writeln!(s, "intersect   {pairs} pair(s){note}");
    for (a, b) in r.intersecting_pairs.iter().take(if r.claims_non_intersection { 20 } else { 0 }) {
        let _ = writeln!(s, "  {a} meets {b}");
    }
    if let Some(b) = &r.bound {
        let _ = writeln!(
            s,
            "bound       {} distinct ≥ {}^{} = {}: {}",
            b.achieved,
            b.n,
            b.exponent,
            b.required,
            if b.pass { "pass" } else { "FAIL" }
        );
    }
    let _ = writeln!(s, "result      {}", if r.success() { "verified" } else { "FAILED" });
    s
}
