use proptest::prelude::*;

use super::*;
use crate::orbits::enum_gl;
use crate::polymap::parse_map;

fn f(p: u32) -> Arc<FieldCtx> {
    FieldCtx::new(p, 1).unwrap()
}

fn caps() -> LfpeCaps {
    LfpeCaps::default()
}

fn lf(text: &str, p: u32) -> (u64, String) {
    let map = parse_map(text, &f(p)).unwrap();
    match is_locally_finite(&map, &caps()).unwrap() {
        LfpeVerdict::LocallyFinite { order, min_poly } => (order, min_poly.to_text("T")),
        v => panic!("{text}: {v:?}"),
    }
}

#[test]
fn small_orders() {
    let f2 = f(2);
    let id = parse_map("(x,y,z)", &f2).unwrap();
    assert_eq!(order_of(&id, &caps()).unwrap(), Order::Finite(1));
    let e = parse_map("(x+y^2,y,z)", &f2).unwrap();
    assert_eq!(order_of(&e, &caps()).unwrap(), Order::Finite(2));
    assert_eq!(lf("(x,y,z)", 2), (1, "T+1".into()));
    assert_eq!(lf("(x, y+x^2, z)", 2), (2, "T^2+1".into()));
    assert_eq!(lf("(x+1, y, z)", 3), (3, "T^2+T+1".into()));
}

#[test]
fn published_examples_over_f3() {
    assert_eq!(
        lf("(2x^2+xy+xz+2x+y^2+z^2, 2x^2+xy+xz+y^2+2y+z^2, 2x^2+xy+xz+y^2+z^2+2z)", 3),
        (2, "T^2+2".into())
    );
    assert_eq!(lf("(x^2+xy+2x+y^2, x^2+xy+y^2+2y, 2x^2+2y^2+2z)", 3), (6, "T^3+T^2+2T+2".into()));
}

#[test]
fn order_matches_direct_iteration() {
    let map = parse_map("(x^2+xy+2x+y^2, x^2+xy+y^2+2y, 2x^2+2y^2+2z)", &f(3)).unwrap();
    assert_eq!(order_of(&map, &caps()).unwrap(), Order::Finite(6));
}

#[test]
fn henon_type_map_hits_the_degree_cap() {
    let map = parse_map("(y, z, x+y^2)", &f(3)).unwrap();
    assert!(map.is_automorphism().unwrap());
    assert!(matches!(is_locally_finite(&map, &caps()).unwrap(), LfpeVerdict::Undecided(CapHit::Degree { .. })));
    assert!(matches!(order_of(&map, &caps()).unwrap(), Order::CapHit(_)));
}

#[test]
fn non_automorphisms_are_rejected() {
    let map = parse_map("(x^2, y, z)", &f(3)).unwrap();
    assert_eq!(is_locally_finite(&map, &caps()).unwrap(), LfpeVerdict::NotLocallyFinite);
    let mock = parse_map("(x+x^2+x^4, y, z)", &f(2)).unwrap();
    assert_eq!(is_locally_finite(&mock, &caps()).unwrap(), LfpeVerdict::NotLocallyFinite);
}

#[test]
fn exact_route_agrees_with_line_route() {
    for (text, p) in [
        ("(x^2+xy+2x+y^2, x^2+xy+y^2+2y, 2x^2+2y^2+2z)", 3),
        ("(y+2z^2+z+1, x^2+2xz+x+z^2+1, x+z+1)", 3),
        ("(x+y^2, y+z^2, z+1)", 2),
    ] {
        let map = parse_map(text, &f(p)).unwrap();
        let line = restricted_relation(&map, &caps(), 0).unwrap();
        assert_eq!(exact_relation(&map, &caps()).unwrap(), line, "{text}");
        assert!(is_zero_map(&eval_relation(&map, &line, 64).unwrap()));
    }
}

#[test]
fn non_prime_fields_use_exact_search() {
    let f4 = FieldCtx::new(2, 2).unwrap();
    let map = parse_map("(x+y^2, y, z)", &f4).unwrap();
    match is_locally_finite(&map, &caps()).unwrap() {
        LfpeVerdict::LocallyFinite { order, min_poly } => {
            assert_eq!(order, 2);
            assert_eq!(min_poly.to_text("T"), "T^2+1");
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn f2_census_matches_table() {
    let census = lfpe_census(&f(2), 2, &caps(), CensusCount::Classes).unwrap();
    assert_eq!(census.conjugacy_classes, Some(262));
    assert_eq!(census.total(), 262);
    assert_eq!(census.locally_finite, 744);
    let mut hist: Vec<(String, u64, u64)> =
        census.rows.iter().map(|r| (r.min_poly_text(), r.class_count(CensusCount::Classes), r.order)).collect();
    hist.sort();
    let mut expected: Vec<(String, u64, u64)> = [
        ("T^5+T^4+T+1", 16, 8),
        ("T^4+T^3+T^2+1", 8, 7),
        ("T^4+T^3+T+1", 26, 6),
        ("T^4+1", 12, 4),
        ("T^4+T^2+T+1", 8, 7),
        ("T^3+T^2+T+1", 139, 4),
        ("T^3+T^2+1", 2, 7),
        ("T^3+T+1", 2, 7),
        ("T^3+1", 14, 3),
        ("T^2+1", 34, 2),
        ("T+1", 1, 1),
    ]
    .iter()
    .map(|&(s, c, t)| (s.to_string(), c, t))
    .collect();
    expected.sort();
    assert_eq!(hist, expected);
    for r in &census.rows {
        assert!(r.min_poly.order_of_t(&census.field, 1000) == Some(r.order));
        assert_eq!(is_locally_finite(&r.example, &caps()).unwrap(), LfpeVerdict::LocallyFinite { order: r.order, min_poly: r.min_poly.clone() });
    }
}

fn random_gl(p: u32, seed: usize) -> LinearMap {
    let gl = enum_gl(&f(p), 3);
    gl[seed % gl.len()]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn min_poly_is_conjugation_invariant(g in 0usize..100_000, which in 0usize..4) {
        let (text, p) = [
            ("(x^2+xy+2x+y^2, x^2+xy+y^2+2y, 2x^2+2y^2+2z)", 3),
            ("(2x^2+2xy+x+2y^2+1, 2x^2+2xy+2y^2+y+1, 2x^2+xy+2x+2y^2+z+1)", 3),
            ("(x+y^2, y+z^2, z+1)", 2),
            ("(y, z, x)", 2),
        ][which];
        let fld = f(p);
        let map = parse_map(text, &fld).unwrap();
        let l = random_gl(p, g);
        let ring = map.ring().clone();
        let lp = l.to_polymap(&ring);
        let linv = l.inverse(&fld).unwrap().to_polymap(&ring);
        let conj = linv.compose(&map.compose(&lp, 64).unwrap(), 64).unwrap();
        prop_assert_eq!(minimum_polynomial(&conj, &caps()).unwrap(), minimum_polynomial(&map, &caps()).unwrap());
    }
}
