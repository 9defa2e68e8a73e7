//! The aggregation combinator: `P ⊕ Q` lives in `R^(a+b+1)`.

use super::solve::{solve_in_box, SolveTask};
use super::{default_interval_width, Certificate, Construction, IntervalWitness, Params, Witness};
use crate::error::{Error, Result};
use crate::exactnum::{rational, RadicalSum, Rational};
use crate::flats::{AxisAlignedFlat, Metric, Point};
use num_traits::One;
use std::collections::BTreeSet;

/// Places `P` in the first `a` coordinates and `Q` in the next `b`, with a
/// separating last coordinate that is 0 on the sites of `P` and 1 on those
/// of `Q`. Each pair of certified tuples yields a certified union tuple.
///
/// Labels are kept when the two label sets are disjoint and prefixed with
/// `p.` / `q.` otherwise. Both inputs must share the metric and witness mode.
pub fn aggregate(p: &Construction, q: &Construction) -> Result<Construction> {
    if p.metric != q.metric {
        return Err(Error::InvalidParameter(format!("metrics differ: {} and {}", p.metric, q.metric)));
    }
    let (a, b) = (p.dim, q.dim);
    let dim = a + b + 1;
    let t = dim - 1;
    let one = Rational::one();

    let p_labels: BTreeSet<&str> = p.sites.iter().map(|s| s.label()).collect();
    let clash = q.sites.iter().any(|s| p_labels.contains(s.label()));
    let relabel = |s: &AxisAlignedFlat, pre: &str| {
        if clash {
            format!("{pre}{}", s.label())
        } else {
            s.label().to_string()
        }
    };
    let mut sites: Vec<AxisAlignedFlat> = p.sites.iter().map(|s| s.embed(0, b + 1).with_label(relabel(s, "p."))).collect();
    for s in &q.sites {
        let mut e = s.embed(a, 1).with_label(relabel(s, "q."));
        e.set_fixed(t, one.clone());
        sites.push(e);
    }
    let shift = p.sites.len();

    let mut certs = Vec::with_capacity(p.certificates.len() * q.certificates.len());
    for cp in &p.certificates {
        for cq in &q.certificates {
            let mut tuple = cp.tuple.clone();
            tuple.extend(cq.tuple.iter().map(|i| i + shift));
            let (rep_p, rep_q) = (cp.tuple[0], cq.tuple[0] + shift);
            let witness = match (&cp.witness, &cq.witness) {
                (Witness::Exact(x), Witness::Exact(y)) => {
                    Witness::Exact(exact_join(&p.metric, x, y, &sites[rep_p], &sites[rep_q])?)
                }
                (Witness::Interval(x), Witness::Interval(y)) => {
                    Witness::Interval(interval_join(&p.metric, &sites, x, y, shift, a, rep_p, rep_q)?)
                }
                _ => {
                    return Err(Error::Unsupported(
                        "cannot aggregate exact and interval certificates together".into(),
                    ))
                }
            };
            certs.push(Certificate::new(tuple, witness));
        }
    }

    let mut params = Params::new("aggregate", p.params.n.max(q.params.n));
    params.epsilon = p.params.epsilon.clone().or_else(|| q.params.epsilon.clone());
    params.flat_dim = p.params.flat_dim.max(q.params.flat_dim);
    params.blocks = p.params.blocks.iter().chain(&q.params.blocks).copied().collect();
    params.separator = Some(one);
    params.claims_non_intersection = p.params.claims_non_intersection && q.params.claims_non_intersection;
    Construction::new(dim, p.metric.clone(), sites, certs, params)
}

/// Distances to the representatives balance when
/// `t = (d_Q + |x|' + 1 - d_P - |y|') / 2`, with `'` the matching power.
fn exact_join(
    metric: &Metric,
    x: &Point,
    y: &Point,
    rep_p: &AxisAlignedFlat,
    rep_q: &AxisAlignedFlat,
) -> Result<Point> {
    let power = |v: &RadicalSum| match metric {
        Metric::Euclidean => Ok(v.pow(2)),
        Metric::L1 => Ok(v.abs()),
        _ => Err(Error::Unsupported(format!("exact aggregation under {metric}; use interval mode"))),
    };
    let mut coords: Vec<RadicalSum> = x.0.iter().chain(&y.0).cloned().collect();
    coords.push(RadicalSum::zero());
    let z = Point::new(coords.clone());
    // partial distances to each representative, separator excluded
    let partial = |f: &AxisAlignedFlat| -> Result<RadicalSum> {
        f.fixed()
            .iter()
            .filter(|(&c, _)| c + 1 < z.dim())
            .map(|(&c, v)| power(&(&z.0[c] - &RadicalSum::from(v))))
            .sum()
    };
    let (dp, dq) = (partial(rep_p)?, partial(rep_q)?);
    let t = (dq - dp + RadicalSum::one()).scale(&rational(1, 2));
    *coords.last_mut().expect("dim ≥ 1") = t;
    Ok(Point::new(coords))
}

#[allow(clippy::too_many_arguments)]
fn interval_join(
    metric: &Metric,
    sites: &[AxisAlignedFlat],
    x: &IntervalWitness,
    y: &IntervalWitness,
    shift: usize,
    a: usize,
    rep_p: usize,
    rep_q: usize,
) -> Result<IntervalWitness> {
    let mut bounds: Vec<_> = x.bounds.iter().chain(&y.bounds).cloned().collect();
    bounds.push(crate::exactnum::Interval::point(Rational::from_integer(0.into())));
    let mut steps = x.steps.clone();
    steps.extend(y.steps.iter().map(|s| super::Step { a: s.a + shift, b: s.b + shift, coord: s.coord + a }));
    let width = bounds
        .iter()
        .map(|i| i.width())
        .filter(|w| w > &Rational::from_integer(0.into()))
        .max()
        .unwrap_or_else(default_interval_width);
    let task = SolveTask { coord: bounds.len() - 1, a: rep_p, b: rep_q, bracket: None };
    solve_in_box(sites, &mut bounds, &mut steps, &[task], metric, &width)?;
    Ok(IntervalWitness { bounds, steps })
}
