//! The explicit constructions, written out with their closed-form witnesses.

use super::{check_epsilon, check_n, idx, index_tuples, zero, BlockKind, Certificate, Construction, Params, Witness};
use crate::error::{Error, Result};
use crate::exactnum::{rational, RadicalSum, Rational};
use crate::flats::{AxisAlignedFlat, Metric, Point};
use num_bigint::BigInt;

fn quarter() -> Rational {
    rational(1, 4)
}

fn flat(dim: usize, fixed: Vec<(usize, Rational)>, label: String) -> AxisAlignedFlat {
    AxisAlignedFlat::new(dim, fixed, label).expect("generator flats are well formed")
}

/// `√(2·v·ε - ε²)`, the offset that balances a line shifted by ε against an
/// unshifted one at height `v`.
pub(crate) fn balancing_offset(v: &Rational, eps: &Rational) -> RadicalSum {
    RadicalSum::sqrt(&(v * eps * Rational::from_integer(BigInt::from(2)) - eps * eps))
        .expect("2vε - ε² > 0 for v ≥ 1 > ε")
}

/// Planar grid: `H_i` (second coordinate = i) and `V_j` (first coordinate = j).
/// The grid lines cross, so the sites intersect.
pub fn gen_grid2(n: u64) -> Result<Construction> {
    check_n(n)?;
    let mut sites: Vec<_> = (1..=n).map(|i| flat(2, vec![(1, idx(i))], format!("H{i}"))).collect();
    sites.extend((1..=n).map(|j| flat(2, vec![(0, idx(j))], format!("V{j}"))));
    let nn = n as usize;
    let mut certs = Vec::with_capacity(nn * nn);
    for i in 1..=n {
        for j in 1..=n {
            let w = Point::from_rationals([idx(j) + quarter(), idx(i) + quarter()]);
            certs.push(Certificate::new(vec![(i - 1) as usize, nn + (j - 1) as usize], Witness::Exact(w)));
        }
    }
    let mut params = Params::new("grid2", n);
    params.blocks = vec![BlockKind::Grid2];
    Construction::new(2, Metric::Euclidean, sites, certs, params)
}

/// Two perpendicular families in R³ separated by ε in the third coordinate:
/// `A_i = (i, *, 0)`, `B_j = (*, j, ε)`, witness `(i, j, ε/2)`.
pub fn gen_grid3_perturbed(n: u64, eps: &Rational) -> Result<Construction> {
    check_epsilon(n, eps)?;
    let mut sites: Vec<_> = (1..=n).map(|i| flat(3, vec![(0, idx(i)), (2, zero())], format!("A{i}"))).collect();
    sites.extend((1..=n).map(|j| flat(3, vec![(1, idx(j)), (2, eps.clone())], format!("B{j}"))));
    let nn = n as usize;
    let half_eps = eps / Rational::from_integer(BigInt::from(2));
    let mut certs = Vec::with_capacity(nn * nn);
    for i in 1..=n {
        for j in 1..=n {
            let w = Point::from_rationals([idx(i), idx(j), half_eps.clone()]);
            certs.push(Certificate::new(vec![(i - 1) as usize, nn + (j - 1) as usize], Witness::Exact(w)));
        }
    }
    let mut params = Params::new("grid3p", n);
    params.epsilon = Some(eps.clone());
    params.blocks = vec![BlockKind::Grid3p];
    params.claims_non_intersection = true;
    Construction::new(3, Metric::Euclidean, sites, certs, params)
}

/// Three disjoint families in R⁴:
/// `A_i = (i, *, ε, 0)`, `B_j = (*, j, 0, 0)`, `C_k = (*, 0, k, 1)`.
///
/// The witness `(i + √(2εk - ε²), j, k, (j² - k² + 1)/2)` has squared
/// distance `k² + x₄²` to all three.
pub fn gen_quad4(n: u64, eps: &Rational) -> Result<Construction> {
    check_epsilon(n, eps)?;
    let one = Rational::from_integer(BigInt::from(1));
    let mut sites: Vec<_> = (1..=n)
        .map(|i| flat(4, vec![(0, idx(i)), (2, eps.clone()), (3, zero())], format!("A{i}")))
        .collect();
    sites.extend((1..=n).map(|j| flat(4, vec![(1, idx(j)), (2, zero()), (3, zero())], format!("B{j}"))));
    sites.extend((1..=n).map(|k| flat(4, vec![(1, zero()), (2, idx(k)), (3, one.clone())], format!("C{k}"))));
    let nn = n as usize;
    let two = Rational::from_integer(BigInt::from(2));
    let certs = index_tuples(3, n)
        .map(|t| {
            let (i, j, k) = (idx(t[0]), idx(t[1]), idx(t[2]));
            let x1 = RadicalSum::from(&i) + balancing_offset(&k, eps);
            let x4 = (&j * &j - &k * &k + &one) / &two;
            let w = Point::new(vec![x1, j.into(), k.into(), x4.into()]);
            let tuple = vec![(t[0] - 1) as usize, nn + (t[1] - 1) as usize, 2 * nn + (t[2] - 1) as usize];
            Certificate::new(tuple, Witness::Exact(w))
        })
        .collect();
    let mut params = Params::new("quad4", n);
    params.epsilon = Some(eps.clone());
    params.blocks = vec![BlockKind::Quad4];
    params.separator = Some(one);
    params.claims_non_intersection = true;
    Construction::new(4, Metric::Euclidean, sites, certs, params)
}

/// Four disjoint families in R⁵:
/// `A_i = (i,*,0,0,0)`, `B_j = (*,j,ε,0,0)`, `C_k = (0,0,k,*,1)`, `D_l = (ε,0,*,l,1)`.
///
/// The witness lies on the line `E_{i,j,k,l}`:
/// `x₁ = i`, `x₂ = j + √(2kε - ε²)`, `x₃ = k`, `x₄ = l + √(2iε - ε²)`,
/// at `x₅ = (1 + x₁² + x₂² - x₃² - x₄²)/2`.
pub fn gen_quint5(n: u64, eps: &Rational) -> Result<Construction> {
    check_epsilon(n, eps)?;
    let one = Rational::from_integer(BigInt::from(1));
    let z = zero;
    let mut sites: Vec<_> = (1..=n)
        .map(|i| flat(5, vec![(0, idx(i)), (2, z()), (3, z()), (4, z())], format!("A{i}")))
        .collect();
    sites.extend((1..=n).map(|j| flat(5, vec![(1, idx(j)), (2, eps.clone()), (3, z()), (4, z())], format!("B{j}"))));
    sites.extend((1..=n).map(|k| flat(5, vec![(0, z()), (1, z()), (2, idx(k)), (4, one.clone())], format!("C{k}"))));
    sites.extend((1..=n).map(|l| flat(5, vec![(0, eps.clone()), (1, z()), (3, idx(l)), (4, one.clone())], format!("D{l}"))));
    let nn = n as usize;
    let half = rational(1, 2);
    let certs = index_tuples(4, n)
        .map(|t| {
            let (i, j, k, l) = (idx(t[0]), idx(t[1]), idx(t[2]), idx(t[3]));
            let x1 = RadicalSum::from(&i);
            let x2 = RadicalSum::from(&j) + balancing_offset(&k, eps);
            let x3 = RadicalSum::from(&k);
            let x4 = RadicalSum::from(&l) + balancing_offset(&i, eps);
            let x5 = (RadicalSum::from(&one) + x1.pow(2) + x2.pow(2) - x3.pow(2) - x4.pow(2)).scale(&half);
            let tuple = (0..4).map(|f| f * nn + (t[f] - 1) as usize).collect();
            Certificate::new(tuple, Witness::Exact(Point::new(vec![x1, x2, x3, x4, x5])))
        })
        .collect();
    let mut params = Params::new("quint5", n);
    params.epsilon = Some(eps.clone());
    params.blocks = vec![BlockKind::Grid2, BlockKind::Grid2];
    params.separator = Some(one);
    params.claims_non_intersection = true;
    Construction::new(5, Metric::Euclidean, sites, certs, params)
}

/// Grid of axis-parallel hyperplanes in R^(k+1): family `f` member `i` is
/// `x_f = i`, labelled `F{f}_{i}`. Every tuple with one hyperplane per family
/// is witnessed at `(i₁ + 1/4, …, i_{k+1} + 1/4)`. Hyperplanes of different
/// families intersect.
pub fn gen_hypergrid(k: usize, n: u64) -> Result<Construction> {
    check_n(n)?;
    if k == 0 {
        return Err(Error::InvalidParameter("flat dimension k must be at least 1".into()));
    }
    let dim = k + 1;
    let sites: Vec<_> = (0..dim)
        .flat_map(|f| (1..=n).map(move |i| (f, i)))
        .map(|(f, i)| flat(dim, vec![(f, idx(i))], format!("F{}_{}", f + 1, i)))
        .collect();
    let nn = n as usize;
    let certs = index_tuples(dim, n)
        .map(|t| {
            let w = Point::from_rationals(t.iter().map(|&i| idx(i) + quarter()));
            let tuple = (0..dim).map(|f| f * nn + (t[f] - 1) as usize).collect();
            Certificate::new(tuple, Witness::Exact(w))
        })
        .collect();
    let mut params = Params::new("hypergrid", n);
    params.flat_dim = k;
    params.blocks = vec![BlockKind::Hypergrid(k)];
    Construction::new(dim, Metric::Euclidean, sites, certs, params)
}
