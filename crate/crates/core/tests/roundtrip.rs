use vlb_core::constructions::{
    aggregate, apply_metric, gen_grid2, gen_quad4, gen_quint5, plan, MetricOptions, Template,
};
use vlb_core::exactnum::rational;
use vlb_core::flats::Metric;
use vlb_core::format::{from_json, to_json};
use vlb_core::verify::verify_construction;

fn assert_roundtrip_verifies(c: &vlb_core::constructions::Construction) {
    let text = to_json(c);
    let back = from_json(&text).expect("parse");
    assert_eq!(to_json(&back), text);
    let r = verify_construction(&back).expect("verify");
    assert!(r.success(), "{}", r.summary());
}

#[test]
fn generated_files_survive_a_roundtrip() {
    let eps = rational(1, 17);
    assert_roundtrip_verifies(&gen_quad4(2, &eps).unwrap());
    assert_roundtrip_verifies(&gen_quint5(2, &eps).unwrap());
    assert_roundtrip_verifies(&plan(7, 2, &rational(1, 64)).unwrap().1);
}

#[test]
fn interval_certificates_survive_a_roundtrip() {
    let m = Metric::lp(rational(3, 1)).unwrap();
    let c = apply_metric(Template::Grid2, 2, None, &m, &MetricOptions::interval()).unwrap();
    assert_roundtrip_verifies(&c);
}

#[test]
fn aggregated_grids_verify_after_serialization() {
    let g = gen_grid2(2).unwrap();
    let c = aggregate(&g, &g).unwrap();
    assert_eq!(c.certificates.len(), 16);
    assert_roundtrip_verifies(&c);
}
