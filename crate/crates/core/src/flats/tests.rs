use super::*;
use crate::exactnum::{integer, rational};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn q(v: i64) -> Rational {
    integer(v)
}

fn line(dim: usize, fixed: &[(usize, Rational)], label: &str) -> AxisAlignedFlat {
    AxisAlignedFlat::new(dim, fixed.iter().cloned(), label).unwrap()
}

/// A₁ = (1,*,0,0,0) from the five-dimensional construction.
fn a1() -> AxisAlignedFlat {
    line(5, &[(0, q(1)), (2, q(0)), (3, q(0)), (4, q(0))], "A1")
}

#[test]
fn point_on_line_has_zero_distance() {
    let x = Point::from_rationals([q(1), q(9), q(0), q(0), q(0)]);
    assert!(sq_dist_point_flat(&x, &a1()).unwrap().is_zero());
}

#[test]
fn origin_to_a1() {
    let x = Point::from_rationals(vec![q(0); 5]);
    assert_eq!(sq_dist_point_flat(&x, &a1()).unwrap(), RadicalSum::from_integer(1));
}

#[test]
fn witness_equidistant_from_a1_and_b1() {
    // i = j = k = l = 1, ε = 1/16: x = (1, 1 + √(2ε - ε²), 1, 1 + √(2ε - ε²), ·)
    let eps = rational(1, 16);
    let s = RadicalSum::sqrt(&(&eps * q(2) - &eps * &eps)).unwrap();
    let one = RadicalSum::from_integer(1);
    let x = Point::new(vec![one.clone(), &one + &s, one.clone(), &one + &s, RadicalSum::zero()]);
    let b1 = line(5, &[(1, q(1)), (2, eps.clone()), (3, q(0)), (4, q(0))], "B1");
    let diff = sq_dist_point_flat(&x, &a1()).unwrap() - sq_dist_point_flat(&x, &b1).unwrap();
    assert_eq!(diff.sign(), Sign::Zero);
}

#[test]
fn flat_to_flat_distances() {
    let eps = rational(1, 16);
    let b1 = line(5, &[(1, q(1)), (2, eps), (3, q(0)), (4, q(0))], "B1");
    assert_eq!(sq_dist_flat_flat(&a1(), &b1).unwrap(), RadicalSum::from_rational(rational(1, 256)));
    let a2 = line(5, &[(0, q(2)), (2, q(0)), (3, q(0)), (4, q(0))], "A2");
    assert_eq!(sq_dist_flat_flat(&a1(), &a2).unwrap(), RadicalSum::from_integer(1));
    let h1 = line(2, &[(1, q(1))], "H1");
    let v1 = line(2, &[(0, q(1))], "V1");
    assert!(sq_dist_flat_flat(&h1, &v1).unwrap().is_zero());
    assert!(flats_intersect(&h1, &v1).unwrap());
    assert!(!flats_intersect(&a1(), &a2).unwrap());
}

#[test]
fn lp_examples() {
    let w = rational(1, 1_000_000);
    let x = Point::from_rationals([q(0), q(0)]);
    let f = line(2, &[(0, q(2))], "x1=2");
    let p4 = Metric::lp(q(4)).unwrap();
    assert_eq!(lp_dist_pth_power(&x, &f, &p4, &w).unwrap(), LpPower::Exact(RadicalSum::from_integer(16)));

    let x = Point::from_rationals([rational(1, 2), q(3), q(7)]);
    let f = line(3, &[(1, q(1)), (2, q(1))], "(*,1,1)");
    assert_eq!(
        lp_dist_pth_power(&x, &f, &Metric::L1, &w).unwrap(),
        LpPower::Exact(RadicalSum::from_integer(8))
    );

    let x = Point::new(vec![RadicalSum::sqrt(&q(2)).unwrap(), RadicalSum::from_integer(3), RadicalSum::zero()]);
    let via_lp = lp_dist_pth_power(&x, &f, &Metric::Euclidean, &w).unwrap();
    assert_eq!(via_lp, LpPower::Exact(sq_dist_point_flat(&x, &f).unwrap()));
}

#[test]
fn l1_absolute_values_of_radicals() {
    // |1 - √2| + |3 - 3| = √2 - 1
    let x = Point::new(vec![RadicalSum::sqrt(&q(2)).unwrap(), RadicalSum::from_integer(3)]);
    let f = line(2, &[(0, q(1)), (1, q(3))], "pt");
    let d = lp_dist_pth_power(&x, &f, &Metric::L1, &rational(1, 10)).unwrap();
    assert_eq!(d, LpPower::Exact(RadicalSum::sqrt(&q(2)).unwrap() - RadicalSum::from_integer(1)));
}

#[test]
fn fractional_exponent_gives_tight_enclosure() {
    // |0 - 4|^(3/2) = 8
    let m = Metric::lp(rational(3, 2)).unwrap();
    let x = Point::from_rationals([q(0), q(5)]);
    let f = line(2, &[(0, q(4))], "x1=4");
    let w = rational(1, 1 << 40);
    match lp_dist_pth_power(&x, &f, &m, &w).unwrap() {
        LpPower::Enclosure(i) => {
            assert!(i.contains(&q(8)));
            assert!(i.width() <= w);
        }
        other => panic!("expected an enclosure, got {other:?}"),
    }
}

#[test]
fn metric_parsing() {
    assert_eq!("euclidean".parse::<Metric>().unwrap(), Metric::Euclidean);
    assert_eq!("lp:2".parse::<Metric>().unwrap(), Metric::Euclidean);
    assert_eq!("lp:4".parse::<Metric>().unwrap(), Metric::Lp(q(4)));
    assert_eq!("l1".parse::<Metric>().unwrap(), Metric::L1);
    assert!(matches!("linf".parse::<Metric>(), Err(Error::Unsupported(_))));
    assert!("lp:1/2".parse::<Metric>().is_err());
    assert_eq!(Metric::lp(rational(5, 2)).unwrap().to_string(), "lp:5/2");
}

#[test]
fn dimension_mismatch() {
    let x = Point::from_rationals(vec![q(0); 3]);
    assert!(matches!(
        sq_dist_point_flat(&x, &a1()),
        Err(Error::DimensionMismatch { expected: 5, found: 3 })
    ));
    let h1 = line(2, &[(1, q(1))], "H1");
    assert!(sq_dist_flat_flat(&h1, &a1()).is_err());
}

#[test]
fn invalid_flats() {
    assert!(AxisAlignedFlat::new(2, vec![(2, q(0))], "bad").is_err());
    assert!(AxisAlignedFlat::new(2, Vec::<(usize, Rational)>::new(), "everything").is_err());
    assert!(AxisAlignedFlat::new(2, vec![(0, q(0)), (0, q(1))], "twice").is_err());
}

#[test]
fn embedding_pads_with_zeros() {
    let h1 = line(2, &[(1, q(1))], "H1");
    let e = h1.embed(1, 2);
    assert_eq!(e.dim(), 5);
    assert_eq!(e.to_string(), "H1 = (0, *, 1, 0, 0)");
    assert_eq!(e.flat_dim(), 1);
}

// ---- randomized properties -------------------------------------------------

fn small_rational() -> impl Strategy<Value = Rational> {
    (-40i64..40, 1i64..9).prop_map(|(n, d)| rational(n, d))
}

fn flat_and_point(dim: usize) -> impl Strategy<Value = (AxisAlignedFlat, Vec<Rational>)> {
    (
        prop::collection::vec(any::<bool>(), dim),
        prop::collection::vec(small_rational(), dim),
        prop::collection::vec(small_rational(), dim),
    )
        .prop_filter_map("needs a fixed coordinate", move |(mask, vals, pt)| {
            let fixed: Vec<_> = (0..dim).filter(|&c| mask[c]).map(|c| (c, vals[c].clone())).collect();
            AxisAlignedFlat::new(dim, fixed, "f").ok().map(|f| (f, pt))
        })
}

/// Minimizes the distance numerically over the flat's free parameters by
/// cyclic golden-section search, without assuming the distance splits.
fn numeric_min_distance(f: &AxisAlignedFlat, x: &[f64], m: &Metric) -> f64 {
    let base: Vec<f64> = (0..f.dim())
        .map(|c| f.fixed_value(c).map(|v| v.to_f64().unwrap()).unwrap_or(0.0))
        .collect();
    let free: Vec<usize> = f.free_coords().collect();
    let mut y = base.clone();
    let dist = |y: &[f64]| m.dist_f64(x.iter().zip(y).map(|(a, b)| a - b));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..4 {
        for &c in &free {
            let (mut lo, mut hi) = (-200.0, 200.0);
            for _ in 0..200 {
                let a = hi - phi * (hi - lo);
                let b = lo + phi * (hi - lo);
                let mut ya = y.clone();
                ya[c] = a;
                let mut yb = y.clone();
                yb[c] = b;
                if dist(&ya) < dist(&yb) {
                    hi = b;
                } else {
                    lo = a;
                }
            }
            y[c] = (lo + hi) / 2.0;
        }
    }
    dist(&y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_nonnegative_and_zero_on_flat((f, pt) in flat_and_point(4)) {
        let x = Point::from_rationals(pt.clone());
        let d = sq_dist_point_flat(&x, &f).unwrap();
        prop_assert_ne!(d.sign(), Sign::Negative);
        // project onto the flat: distance must vanish
        let on: Vec<Rational> = (0..4).map(|c| f.fixed_value(c).cloned().unwrap_or_else(|| pt[c].clone())).collect();
        prop_assert!(sq_dist_point_flat(&Point::from_rationals(on), &f).unwrap().is_zero());
        let on_flat = (0..4).all(|c| f.fixed_value(c).map_or(true, |v| v == &pt[c]));
        prop_assert_eq!(d.is_zero(), on_flat);
    }

    #[test]
    fn translation_invariance((f, pt) in flat_and_point(4), shift in prop::collection::vec(small_rational(), 4)) {
        let x = Point::from_rationals(pt.clone());
        let moved = Point::from_rationals(pt.iter().zip(&shift).map(|(a, s)| a + s));
        let g = AxisAlignedFlat::new(4, f.fixed().iter().map(|(c, v)| (*c, v + &shift[*c])), "g").unwrap();
        prop_assert_eq!(sq_dist_point_flat(&x, &f).unwrap(), sq_dist_point_flat(&moved, &g).unwrap());
        let l1 = |p: &Point, fl: &AxisAlignedFlat| lp_dist_pth_power(p, fl, &Metric::L1, &rational(1, 100)).unwrap();
        prop_assert_eq!(l1(&x, &f), l1(&moved, &g));
    }

    #[test]
    fn lp2_matches_squared_euclidean((f, pt) in flat_and_point(5), r in 1u32..30) {
        // put a radical in the first coordinate too
        let mut coords: Vec<RadicalSum> = pt.into_iter().map(RadicalSum::from_rational).collect();
        coords[0] = &coords[0] + &RadicalSum::sqrt(&integer(r as i64)).unwrap();
        let x = Point::new(coords);
        let m = Metric::lp(integer(2)).unwrap();
        let lp = lp_dist_pth_power(&x, &f, &m, &rational(1, 1000)).unwrap();
        prop_assert_eq!(lp, LpPower::Exact(sq_dist_point_flat(&x, &f).unwrap()));
    }

    #[test]
    fn closed_form_matches_numeric_minimization((f, pt) in flat_and_point(3), which in 0usize..3) {
        let m = [Metric::Euclidean, Metric::lp(integer(3)).unwrap(), Metric::L1][which].clone();
        let x = Point::from_rationals(pt);
        let exact = lp_dist_pth_power(&x, &f, &m, &rational(1, 1_000_000_000)).unwrap();
        let closed = exact.exact().unwrap().to_f64().powf(1.0 / m.exponent_f64());
        let numeric = numeric_min_distance(&f, &x.to_f64(), &m);
        prop_assert!((closed - numeric).abs() < 1e-9, "closed {} numeric {}", closed, numeric);
    }
}
