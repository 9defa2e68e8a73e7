use super::*;
use crate::exactnum::{rational, RadicalSum};
use crate::flats::{lp_dist_pth_power, sq_dist_flat_flat, sq_dist_point_flat, LpPower};
use crate::verify::{verify_construction, Verdict};
use std::collections::BTreeSet;

fn q(n: i64, d: i64) -> Rational {
    rational(n, d)
}

fn eps8(n: u64) -> Rational {
    default_epsilon(&Metric::Euclidean, n)
}

fn exact(c: &Certificate) -> &Point {
    match &c.witness {
        Witness::Exact(p) => p,
        Witness::Interval(_) => panic!("expected an exact witness"),
    }
}

fn cert_for<'a>(c: &'a Construction, labels: &[&str]) -> &'a Certificate {
    let mut idx: Vec<usize> = labels.iter().map(|l| c.site_index(l).expect("label")).collect();
    idx.sort_unstable();
    c.certificates.iter().find(|x| x.tuple == idx).expect("certificate")
}

fn all_pass(c: &Construction) -> bool {
    let r = verify_construction(c).unwrap();
    r.failures().for_each(|f| eprintln!("{:?}: {}", f.labels, f.verdict));
    r.all_certificates_pass()
}

#[test]
fn count_laws() {
    for n in 1..=4u64 {
        let e = eps8(n);
        assert_eq!(gen_grid2(n).unwrap().certificates.len() as u64, n * n);
        assert_eq!(gen_grid3_perturbed(n, &e).unwrap().certificates.len() as u64, n * n);
        assert_eq!(gen_quad4(n, &e).unwrap().certificates.len() as u64, n.pow(3));
        assert_eq!(gen_quint5(n, &e).unwrap().certificates.len() as u64, n.pow(4));
        for k in 1..=3 {
            assert_eq!(gen_hypergrid(k, n).unwrap().certificates.len() as u64, n.pow(k as u32 + 1));
        }
    }
    let p = gen_grid2(2).unwrap();
    let r = gen_quad4(2, &eps8(2)).unwrap();
    assert_eq!(aggregate(&p, &r).unwrap().certificates.len(), 4 * 8);
}

#[test]
fn grid2_examples() {
    let c = gen_grid2(1).unwrap();
    assert_eq!(c.sites.len(), 2);
    let w = exact(&c.certificates[0]);
    assert_eq!(w, &Point::from_rationals([q(5, 4), q(5, 4)]));
    for s in &c.sites {
        assert_eq!(sq_dist_point_flat(w, s).unwrap(), RadicalSum::from(q(1, 16)));
    }
    let c = gen_grid2(2).unwrap();
    let w = exact(cert_for(&c, &["H1", "V2"]));
    assert_eq!(w, &Point::from_rationals([q(9, 4), q(5, 4)]));
    for (l, d2) in [("H1", q(1, 16)), ("V2", q(1, 16)), ("H2", q(9, 16)), ("V1", q(25, 16))] {
        assert_eq!(sq_dist_point_flat(w, &c.sites[c.site_index(l).unwrap()]).unwrap(), RadicalSum::from(d2));
    }
    assert!(matches!(gen_grid2(0), Err(Error::InvalidParameter(_))));
}

#[test]
fn grid3p_examples() {
    let e = q(1, 17);
    let c = gen_grid3_perturbed(2, &e).unwrap();
    assert_eq!(c.certificates.len(), 4);
    let (a1, b1) = (&c.sites[c.site_index("A1").unwrap()], &c.sites[c.site_index("B1").unwrap()]);
    assert_eq!(sq_dist_flat_flat(a1, b1).unwrap(), RadicalSum::from(q(1, 289)));
    let w = exact(cert_for(&c, &["A1", "B1"]));
    assert_eq!(w, &Point::from_rationals([q(1, 1), q(1, 1), q(1, 34)]));
    for l in ["A2", "B2"] {
        let d = sq_dist_point_flat(w, &c.sites[c.site_index(l).unwrap()]).unwrap();
        assert!((d - RadicalSum::from(1)).sign() != crate::exactnum::Sign::Negative);
    }
    let c = gen_grid3_perturbed(1, &q(1, 10)).unwrap();
    let w = exact(&c.certificates[0]);
    assert_eq!(w, &Point::from_rationals([q(1, 1), q(1, 1), q(1, 20)]));
}

#[test]
fn quad4_examples() {
    let e = q(1, 17);
    let c = gen_quad4(2, &e).unwrap();
    assert_eq!(c.certificates.len(), 8);
    let w = exact(cert_for(&c, &["A1", "B1", "C1"]));
    assert_eq!(w.0[3], RadicalSum::from(q(1, 2)));
    for l in ["A1", "B1", "C1"] {
        assert_eq!(sq_dist_point_flat(w, &c.sites[c.site_index(l).unwrap()]).unwrap(), RadicalSum::from(q(5, 4)));
    }
    for i in 1..=2 {
        for j in 1..=2 {
            let a = &c.sites[c.site_index(&format!("A{i}")).unwrap()];
            let b = &c.sites[c.site_index(&format!("B{j}")).unwrap()];
            assert_eq!(sq_dist_flat_flat(a, b).unwrap(), RadicalSum::from(&e * &e));
        }
    }
    assert!(matches!(gen_quad4(2, &q(1, 2)), Err(Error::InvalidParameter(m)) if m.contains("1/(8n)")));
}

#[test]
fn quint5_examples() {
    let e = q(1, 17);
    let c = gen_quint5(2, &e).unwrap();
    assert_eq!((c.sites.len(), c.certificates.len()), (8, 16));
    let w = exact(cert_for(&c, &["A1", "B1", "C1", "D1"]));
    assert_eq!(w.0[4], RadicalSum::from(q(1, 2)));
    for cert in &c.certificates {
        let w = exact(cert);
        let d: Vec<_> = cert.tuple.iter().map(|&s| sq_dist_point_flat(w, &c.sites[s]).unwrap()).collect();
        assert!(d.iter().all(|x| x == &d[0]));
    }
}

#[test]
fn hypergrid_examples() {
    let c = gen_hypergrid(2, 2).unwrap();
    assert_eq!((c.dim, c.sites.len(), c.certificates.len()), (3, 6, 8));
    for cert in &c.certificates {
        let w = exact(cert);
        for (s, site) in c.sites.iter().enumerate() {
            let d = sq_dist_point_flat(w, site).unwrap();
            if cert.tuple.contains(&s) {
                assert_eq!(d, RadicalSum::from(q(1, 16)));
            } else {
                assert!((d - RadicalSum::from(q(9, 16))).sign() != crate::exactnum::Sign::Negative);
            }
        }
    }
    // k = 1 is the planar grid up to labels
    let h = gen_hypergrid(1, 3).unwrap();
    let g = gen_grid2(3).unwrap();
    let ws = |c: &Construction| c.certificates.iter().map(|x| exact(x).clone()).collect::<std::collections::HashSet<_>>();
    assert_eq!(ws(&h), ws(&g));
}

#[test]
fn chain_of_two_grids_is_quint5() {
    for n in 1..=3 {
        let e = eps8(n);
        let (_, planned) = plan(5, n, &e).unwrap();
        let quint = gen_quint5(n, &e).unwrap();
        assert_eq!(planned.sites.len(), quint.sites.len());
        for (a, b) in planned.sites.iter().zip(&quint.sites) {
            assert_eq!(a.fixed(), b.fixed());
        }
        let wa: Vec<_> = planned.certificates.iter().map(|c| (c.tuple.clone(), exact(c).clone())).collect();
        let wb: Vec<_> = quint.certificates.iter().map(|c| (c.tuple.clone(), exact(c).clone())).collect();
        assert_eq!(wa, wb);
    }
}

#[test]
fn fold_of_aggregates_matches_unperturbed_chain() {
    let e = q(1, 25);
    let blocks = [BlockKind::Grid2, BlockKind::Quad4, BlockKind::Grid3p];
    let parts = [gen_grid2(2).unwrap(), gen_quad4(2, &e).unwrap(), gen_grid3_perturbed(2, &e).unwrap()];
    let folded = aggregate(&aggregate(&parts[0], &parts[1]).unwrap(), &parts[2]).unwrap();
    let mut spec = ChainSpec::new(blocks.to_vec(), 2);
    spec.epsilon = Some(e);
    let chained = build_chain(&spec).unwrap();
    assert_eq!(folded.dim, chained.dim);
    // chains order grid2 families V, H; the generator orders H, V
    let key = |c: &Construction| c.sites.iter().map(|s| s.fixed().clone()).collect::<BTreeSet<_>>();
    assert_eq!(key(&folded), key(&chained));
    let ws = |c: &Construction| c.certificates.iter().map(|x| exact(x).clone()).collect::<std::collections::HashSet<_>>();
    assert_eq!(ws(&folded), ws(&chained));
    assert!(all_pass(&folded));
}

#[test]
fn aggregate_identity_and_labels() {
    let one = gen_grid2(1).unwrap();
    let p = gen_quad4(2, &q(1, 17)).unwrap();
    let a = aggregate(&p, &one).unwrap();
    assert_eq!(a.certificates.len(), p.certificates.len());
    assert_eq!(a.dim, 4 + 2 + 1);
    assert!(a.site_index("A1").is_some() && a.site_index("H1").is_some());
    let b = aggregate(&p, &p).unwrap();
    assert!(b.site_index("p.A1").is_some() && b.site_index("q.A1").is_some());
    assert!(all_pass(&a) && all_pass(&b));
    let l1 = apply_metric(Template::Grid2, 1, None, &Metric::L1, &MetricOptions::default()).unwrap();
    assert!(matches!(aggregate(&p, &l1), Err(Error::InvalidParameter(_))));
}

#[test]
fn plan_exponent_law() {
    for d in 2..=30 {
        let p = plan_blocks(d).unwrap();
        assert_eq!(p.exponent, ((2 * d + 2) / 3) as u32, "d = {d}");
        assert!(p.consumed_dim <= d && p.consumed_dim + 1 >= d, "d = {d}");
    }
    assert_eq!(plan_blocks(5).unwrap().blocks, vec![BlockKind::Grid2; 2]);
    assert_eq!(plan_blocks(7).unwrap().blocks, vec![BlockKind::Quad4, BlockKind::Grid2]);
    assert_eq!(plan_blocks(3).unwrap().blocks, vec![BlockKind::Grid3p]);
    assert!(plan_blocks(1).is_err());
}

#[test]
fn plans_verify_and_are_disjoint() {
    for d in 2..=9 {
        let (p, c) = plan(d, 2, &eps8(2)).unwrap();
        assert_eq!(c.dim, d);
        assert_eq!(c.certificates.len(), 1 << p.exponent);
        let r = verify_construction(&c).unwrap();
        assert!(r.all_certificates_pass(), "d = {d}");
        assert_eq!(r.non_intersecting(), d >= 3, "d = {d}");
        assert!(r.success(), "d = {d}");
    }
}

#[test]
fn kflat_variants() {
    let plain = plan_kflat(2, 2, 2, None).unwrap();
    assert_eq!((plain.dim, plain.certificates.len()), (7, 64));
    let r = verify_construction(&plain).unwrap();
    assert!(r.all_certificates_pass() && !r.non_intersecting());
    let pert = plan_kflat(2, 2, 2, Some(&eps8(2))).unwrap();
    let r = verify_construction(&pert).unwrap();
    assert!(r.success() && r.non_intersecting());
    // k = 1, c = 2 has the line count of the five-dimensional construction
    assert_eq!(plan_kflat(1, 2, 3, Some(&eps8(3))).unwrap().certificates.len(), 81);
    let c3 = plan_kflat(1, 3, 2, Some(&eps8(2))).unwrap();
    assert!(verify_construction(&c3).unwrap().success());
}

#[test]
fn non_intersection_with_epsilon() {
    for n in 1..=3 {
        for e in [eps8(n), Rational::new(1.into(), (16 * n).into())] {
            for c in [gen_grid3_perturbed(n, &e), gen_quad4(n, &e), gen_quint5(n, &e)] {
                let c = c.unwrap();
                for (i, a) in c.sites.iter().enumerate() {
                    for b in &c.sites[i + 1..] {
                        assert!(sq_dist_flat_flat(a, b).unwrap().sign() == crate::exactnum::Sign::Positive);
                    }
                }
            }
        }
    }
}

#[test]
fn tuples_are_distinct() {
    let e = eps8(3);
    for c in [gen_grid2(3), gen_quad4(3, &e), gen_quint5(3, &e), gen_hypergrid(2, 3), plan(8, 2, &eps8(2)).map(|x| x.1)] {
        let c = c.unwrap();
        let set: BTreeSet<_> = c.certificates.iter().map(|x| x.tuple.clone()).collect();
        assert_eq!(set.len(), c.certificates.len());
        assert!(c.certificates.windows(2).all(|w| w[0].tuple < w[1].tuple));
    }
}

#[test]
fn epsilon_validation() {
    assert!(gen_quint5(2, &q(1, 16)).is_err());
    assert!(gen_quint5(2, &q(0, 1)).is_err());
    assert!(gen_quint5(2, &q(-1, 17)).is_err());
    assert!(gen_quint5(2, &q(1, 17)).is_ok());
    assert_eq!(default_epsilon(&Metric::Euclidean, 3), q(1, 25));
    let l4 = Metric::lp(Rational::from_integer(4.into())).unwrap();
    assert_eq!(default_epsilon(&l4, 3), q(1, 1729));
}

#[test]
fn lp_quad4_in_interval_mode() {
    let m = Metric::lp(Rational::from_integer(4.into())).unwrap();
    let eps = default_epsilon(&m, 2);
    let c = apply_metric(Template::Quad4, 2, Some(&eps), &m, &MetricOptions::interval()).unwrap();
    assert_eq!(c.certificates.len(), 8);
    let r = verify_construction(&c).unwrap();
    assert_eq!(r.interval_passed(), 8);
    assert!(r.success());
    for cert in &c.certificates {
        let Witness::Interval(w) = &cert.witness else { panic!() };
        assert!(w.bounds.iter().all(|i| i.width() <= crate::exactnum::parse_number("1e-20").unwrap()));
    }
    assert!(matches!(apply_metric(Template::Quad4, 2, Some(&eps), &m, &MetricOptions::default()), Err(Error::Unsupported(_))));
}

#[test]
fn lp_offset_matches_resubstitution() {
    // the within-block offset δ solves δ⁴ = k⁴ - (k-ε)⁴; (k, ε) = (1, 1/17)
    // is outside the L⁴ range for building a whole construction, so solve
    // the A-B crossing directly
    let m = Metric::lp(Rational::from_integer(4.into())).unwrap();
    let eps = q(1, 17);
    let a = AxisAlignedFlat::new(4, [(0, q(1, 1)), (2, eps.clone()), (3, q(0, 1))], "A1").unwrap();
    let b = AxisAlignedFlat::new(4, [(1, q(1, 1)), (2, q(0, 1)), (3, q(0, 1))], "B1").unwrap();
    let width = crate::exactnum::parse_number("1e-20").unwrap();
    let task = solve::SolveTask { coord: 0, a: 0, b: 1, bracket: Some((q(1, 1), q(2, 1))) };
    let w = solve::solve_witness(&[a, b], 4, vec![(1, q(1, 1)), (2, q(1, 1))], vec![task], &m, &width).unwrap();
    let delta = &w.bounds[0] - &Interval::point(q(1, 1));
    let target = q(1, 1) - (q(16, 17) * q(16, 17) * q(16, 17) * q(16, 17));
    assert!(delta.powi(4).contains(&target));
    assert!(delta.width() <= width);
}

#[test]
fn l1_quad4_uses_large_separator() {
    let eps = eps8(3);
    let c = apply_metric(Template::Quad4, 3, Some(&eps), &Metric::L1, &MetricOptions::default()).unwrap();
    assert_eq!(c.params.separator, Some(Rational::from_integer(13.into())));
    let r = verify_construction(&c).unwrap();
    assert_eq!(r.exact_passed(), 27);
    let ci = apply_metric(Template::Quad4, 3, Some(&eps), &Metric::L1, &MetricOptions::interval()).unwrap();
    assert_eq!(verify_construction(&ci).unwrap().interval_passed(), 27);
    // with σ = 1 the middle coordinate leaves [0, σ] and the construction breaks
    let small = MetricOptions { separator: Some(Rational::one()), ..Default::default() };
    let bad = apply_metric(Template::Quad4, 3, Some(&eps), &Metric::L1, &small).unwrap();
    assert!(!verify_construction(&bad).unwrap().all_certificates_pass());
}

#[test]
fn euclidean_template_matches_generators() {
    let e = q(1, 17);
    let t = apply_metric(Template::Quint5, 2, Some(&e), &Metric::Euclidean, &MetricOptions::default()).unwrap();
    let g = gen_quint5(2, &e).unwrap();
    assert_eq!(t.sites, g.sites);
    assert_eq!(t.certificates, g.certificates);
    let t = apply_metric(Template::Quad4, 2, Some(&e), &Metric::Euclidean, &MetricOptions::default()).unwrap();
    let g = gen_quad4(2, &e).unwrap();
    assert_eq!(t.sites, g.sites);
    assert_eq!(t.certificates, g.certificates);
    assert!("linf".parse::<Metric>().is_err());
}

#[test]
fn lp_distance_of_witness_is_consistent() {
    let m = Metric::lp(q(5, 2)).unwrap();
    let e = default_epsilon(&m, 2);
    let c = apply_metric(Template::Grid3p, 2, Some(&e), &m, &MetricOptions::interval()).unwrap();
    assert!(verify_construction(&c).unwrap().success());
    let w = Point::from_rationals([q(1, 1), q(1, 1), &e / Rational::from_integer(2.into())]);
    let width = q(1, 1_000_000);
    let da = lp_dist_pth_power(&w, &c.sites[0], &m, &width).unwrap();
    assert!(matches!(da, LpPower::Enclosure(_)));
}

#[test]
fn removing_a_certificate() {
    let mut c = gen_quad4(2, &q(1, 17)).unwrap();
    assert!(c.remove_certificate(&["A1", "B2", "C1"]).is_some());
    assert_eq!(c.certificates.len(), 7);
    assert!(c.remove_certificate(&["A1", "B2", "C1"]).is_none());
}

#[test]
fn all_families_verify_for_small_n() {
    for n in 1..=2 {
        let e = eps8(n);
        for c in [gen_grid2(n), gen_grid3_perturbed(n, &e), gen_quad4(n, &e), gen_quint5(n, &e), gen_hypergrid(2, n)] {
            let c = c.unwrap();
            assert!(all_pass(&c), "{}", c.params.generator);
            assert!(verify_construction(&c).unwrap().verdicts.iter().all(|v| v.verdict == Verdict::ExactPass));
        }
    }
}
