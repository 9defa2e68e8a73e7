//! Interval witnesses: solving for coordinates by certified bisection.

use super::{IntervalWitness, Step};
use crate::error::{Error, Result};
use crate::exactnum::{ceil_log2, Interval, Rational, Sign};
use crate::flats::{box_pth_power_difference, AxisAlignedFlat, Metric};
use num_traits::{One, Zero};

/// Coordinate `coord` is to be chosen so that sites `a` and `b` are equidistant.
#[derive(Debug, Clone)]
pub(crate) struct SolveTask {
    pub coord: usize,
    pub a: usize,
    pub b: usize,
    /// A bracket known to contain the crossing; searched for when absent.
    pub bracket: Option<(Rational, Rational)>,
}

/// Grid exponent for box endpoints: width `w` needs about `log2(1/w)` bits.
pub(crate) fn grid_bits(width: &Rational) -> u64 {
    ceil_log2(&(Rational::one() / width)) + 8
}

/// Precision used for fractional powers, relative to the grid.
pub(crate) fn eval_bits(grid: u64) -> u64 {
    grid + 64
}

fn sign_with(
    boxed: &[Interval],
    sites: &[AxisAlignedFlat],
    task: &SolveTask,
    value: &Rational,
    metric: &Metric,
    bits: u64,
) -> Result<Option<Sign>> {
    let mut probe = boxed.to_vec();
    probe[task.coord] = Interval::point(value.clone());
    Ok(box_pth_power_difference(&probe, &sites[task.a], &sites[task.b], metric, bits)?.sign())
}

fn opposite(a: Option<Sign>, b: Option<Sign>) -> bool {
    matches!(
        (a, b),
        (Some(Sign::Negative), Some(Sign::Positive)) | (Some(Sign::Positive), Some(Sign::Negative))
    )
}

/// Builds a witness box: `fixed` coordinates become point intervals, then each
/// task in order gets an interval of width about `width` across which the
/// corresponding distance difference changes sign for every choice of the
/// coordinates solved before it.
pub(crate) fn solve_witness(
    sites: &[AxisAlignedFlat],
    dim: usize,
    fixed: Vec<(usize, Rational)>,
    tasks: Vec<SolveTask>,
    metric: &Metric,
    width: &Rational,
) -> Result<IntervalWitness> {
    let mut boxed = vec![Interval::point(Rational::zero()); dim];
    for (c, v) in fixed {
        boxed[c] = Interval::point(v);
    }
    let mut steps = Vec::with_capacity(tasks.len());
    solve_in_box(sites, &mut boxed, &mut steps, &tasks, metric, width)?;
    Ok(IntervalWitness { bounds: boxed, steps })
}

/// Runs `tasks` on an existing box, appending the resulting steps.
pub(crate) fn solve_in_box(
    sites: &[AxisAlignedFlat],
    boxed: &mut [Interval],
    steps: &mut Vec<Step>,
    tasks: &[SolveTask],
    metric: &Metric,
    width: &Rational,
) -> Result<()> {
    let grid = grid_bits(width);
    let bits = eval_bits(grid);
    for task in tasks {
        let centers: Vec<Interval> = boxed.iter().map(|i| Interval::point(i.midpoint())).collect();
        let at_center = |v: &Rational| sign_with(&centers, sites, task, v, metric, bits);

        let (mut lo, mut hi) = match &task.bracket {
            Some((lo, hi)) => (lo.clone(), hi.clone()),
            None => search_bracket(&at_center)?,
        };
        let (mut s_lo, s_hi) = (at_center(&lo)?, at_center(&hi)?);
        let root = if s_lo == Some(Sign::Zero) {
            lo.clone()
        } else if s_hi == Some(Sign::Zero) {
            hi.clone()
        } else if !opposite(s_lo, s_hi) {
            return Err(Error::Domain(format!(
                "no sign change for sites {} and {} along coordinate {}",
                sites[task.a].label(),
                sites[task.b].label(),
                task.coord
            )));
        } else {
            let target = width / Rational::from_integer(8.into());
            loop {
                if &hi - &lo <= target {
                    break (&lo + &hi) / Rational::from_integer(2.into());
                }
                let mid = (&lo + &hi) / Rational::from_integer(2.into());
                let s = at_center(&mid)?;
                match s {
                    None | Some(Sign::Zero) => break mid,
                    _ if s == s_lo => {
                        lo = mid;
                        s_lo = s;
                    }
                    _ => hi = mid,
                }
            }
        };

        // widen around the estimate until the sign change holds over the whole box
        let mut half = width / Rational::from_integer(4.into());
        let mut certified = None;
        for _ in 0..80 {
            let cand = Interval::new(&root - &half, &root + &half)?.round_outward(grid);
            let s_lo = sign_with(boxed, sites, task, cand.lower(), metric, bits)?;
            let s_hi = sign_with(boxed, sites, task, cand.upper(), metric, bits)?;
            if opposite(s_lo, s_hi) {
                certified = Some(cand);
                break;
            }
            half *= Rational::from_integer(2.into());
        }
        boxed[task.coord] = certified.ok_or_else(|| {
            Error::Domain(format!(
                "could not certify a crossing for sites {} and {} along coordinate {}",
                sites[task.a].label(),
                sites[task.b].label(),
                task.coord
            ))
        })?;
        steps.push(Step { a: task.a, b: task.b, coord: task.coord });
    }
    Ok(())
}

fn search_bracket(at: &dyn Fn(&Rational) -> Result<Option<Sign>>) -> Result<(Rational, Rational)> {
    let mut lo = -Rational::one();
    let mut hi = Rational::from_integer(2.into());
    for _ in 0..200 {
        let (a, b) = (at(&lo)?, at(&hi)?);
        if opposite(a, b) || a == Some(Sign::Zero) || b == Some(Sign::Zero) {
            return Ok((lo, hi));
        }
        let span = &hi - &lo;
        lo -= &span;
        hi += span;
    }
    Err(Error::Domain("no sign change found while searching for a bracket".into()))
}
