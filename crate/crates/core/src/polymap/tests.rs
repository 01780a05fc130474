use proptest::prelude::*;

use super::*;

fn f(p: u32) -> Arc<FieldCtx> {
    FieldCtx::new(p, 1).unwrap()
}

fn m(text: &str, p: u32) -> PolyMap {
    parse_map(text, &f(p)).unwrap()
}

#[test]
fn composition_identity_chain() {
    let c = m("(x+y^2, y+z^2, z)", 2);
    let b = m("(x^8+x^4+x, y, z)", 2);
    let a = m("(x, y+x^4+x^2, z+x^2)", 2);
    let cba = c.compose(&b.compose(&a, 64).unwrap(), 64).unwrap();
    assert_eq!(cba, m("(x+y^2, y+x^2+z^2, z+x^2)", 2));
    // Associativity on the same triple.
    assert_eq!(c.compose(&b, 64).unwrap().compose(&a, 64).unwrap(), cba);

    let id = PolyMap::identity(c.ring());
    assert_eq!(c.compose(&id, 64).unwrap(), c);
    let e = m("(x+y^2, y, z)", 2);
    assert!(e.compose(&e, 64).unwrap().is_identity());
    assert!(matches!(b.compose(&b, 32), Err(MapError::Poly(PolyError::CapExceeded { degree: 64, cap: 32 }))));
}

#[test]
fn jacobian_examples() {
    let ex = m("(x, y+xz, z+2xy)", 3);
    assert_eq!(ex.jacobian_det().unwrap(), m("(1+x^2, 0, 0)", 3).comp(0).clone());
    assert_eq!(ex.det_classify().unwrap(), DetClass::NowhereZeroNonconstant);
    let id = m("(x, y, z)", 3);
    assert_eq!(id.jacobian_det().unwrap(), id.ring().one());
    assert_eq!(id.det_classify().unwrap(), DetClass::ConstantNonzero(1));
    assert_eq!(m("(x+y^2, y+z^2, z)", 2).jacobian_det().unwrap(), id.ring().one());
    let sq = m("(x^2, y, z)", 3);
    assert_eq!(sq.jacobian_det().unwrap(), m("(2x, 0, 0)", 3).comp(0).clone());
    assert_eq!(sq.det_classify().unwrap(), DetClass::VanishesSomewhere);
}

#[test]
fn bijection_examples() {
    let l = m("(x^4+x^2+x, y, z)", 2);
    assert!(l.is_bijection(1).unwrap());
    assert!(!l.is_bijection(3).unwrap());
    let id = m("(x, y, z)", 2);
    for r in 1..=4 {
        assert!(id.is_bijection(r).unwrap());
    }
    assert!(m("(x, y+xz, z+2xy)", 3).is_bijection(1).unwrap());
    let f4 = FieldCtx::new(2, 2).unwrap();
    let over_f4 = parse_map("(x, y, z)", &f4).unwrap();
    assert!(matches!(over_f4.is_bijection(2), Err(MapError::Poly(PolyError::Field(FieldError::EmbeddingUnsupported)))));
}

#[test]
fn signatures() {
    let class2 = m("(x, y+x^3+xz^2, z+xy^2+xz^2)", 2);
    assert_eq!(class2.extension_signature(5).unwrap(), 0b11011);
    assert_eq!(m("(x, y, z)", 2).extension_signature(5).unwrap(), 0b11111);
    assert_eq!(m("(x^8+x^4+x, y, z)", 2).extension_signature(5).unwrap(), 0b11111);
}

#[test]
fn affine_decomposition_examples() {
    let g = m("(x+y^2, y, z)", 2);
    let d = g.affine_decompose().unwrap();
    assert!(d.alpha.is_identity());
    assert_eq!(d.fprime, g);

    let g = m("(y+x^2, x, z)", 2);
    let d = g.affine_decompose().unwrap();
    assert_eq!(d.alpha, m("(y, x, z)", 2));
    assert_eq!(d.fprime, m("(x, y+x^2, z)", 2));
    assert!(d.fprime.has_identity_affine_part());
    assert_eq!(d.alpha.compose(&d.fprime, 64).unwrap(), g);

    let t = m("(x+1, y, z)", 2);
    let d = t.affine_decompose().unwrap();
    assert_eq!(d.alpha, t);
    assert!(d.fprime.is_identity());

    assert_eq!(m("(x+y, x+y, z)", 3).affine_decompose(), Err(MapError::SingularAffine));
}

#[test]
fn inverse_examples() {
    let g = m("(x+y^2, y+z^2, z)", 2);
    let Inversion::Inverse(inv) = g.formal_inverse().unwrap() else { panic!("expected an inverse") };
    assert_eq!(inv, m("(x+y^2+z^4, y+z^2, z)", 2));
    assert!(g.compose(&inv, 64).unwrap().is_identity());
    let id = m("(x, y, z)", 2);
    assert_eq!(id.formal_inverse().unwrap(), Inversion::Inverse(id.clone()));
    assert_eq!(m("(x^4+x^2+x, y, z)", 2).formal_inverse().unwrap(), Inversion::NotInvertible);
    assert_eq!(m("(x+1, y, z)", 2).formal_inverse(), Err(MapError::NonIdentityAffine));
}

#[test]
fn predicate_examples() {
    let c3 = m("(x^8+x^2+x, y, z)", 2);
    assert!(c3.is_mock().unwrap());
    assert!(!c3.is_automorphism().unwrap());
    let c4 = m("(x^8+x^4+x, y, z)", 2);
    assert_eq!(c4.formal_inverse().unwrap(), Inversion::NotInvertible);
    let id = m("(x, y, z)", 2);
    assert!(id.is_mock().unwrap() && id.is_automorphism().unwrap());
    let ex = m("(x, y+xz, z+2xy)", 3);
    assert!(!ex.is_mock().unwrap());
    assert!(!ex.is_automorphism().unwrap());
}

#[test]
fn dependence_examples() {
    assert!(m("(x, y+x^2z+z^3, z+xy^2)", 2).satisfies_dependence().unwrap());
    assert!(!m("(x+y^2z, y+x^2z+y^2z, z+x^3+xy^2+y^3)", 2).satisfies_dependence().unwrap());
    assert!(m("(x+x^2, y+x^2, z+x^2)", 2).satisfies_dependence().unwrap());
    assert_eq!(m("(y, x, z)", 2).satisfies_dependence(), Err(MapError::NonIdentityAffine));
}

#[test]
fn stabilisation_examples() {
    let id3 = m("(x, y, z)", 2);
    let id4 = id3.stabilize(1).unwrap();
    assert_eq!(id4.n(), 4);
    assert!(id4.is_identity());
    let two = m("(x^8+x^4+x, y)", 2);
    let three = two.stabilize(1).unwrap();
    assert_eq!(format_map(&three), "(x+x^4+x^8, y, z)");
    assert_eq!(three.degree(), 8);
    assert_eq!(m("(1, 0, y)", 2).stabilize(2).unwrap().degree(), 1);
}

#[test]
fn text_examples() {
    let g = m("(x+y^2, y+x^2+z^2, z+x^2)", 2);
    assert_eq!(format_map(&g), "(x+y^2, y+x^2+z^2, z+x^2)");
    assert!(m("(x, y, z)", 2).is_identity());
    assert_eq!(format_map(&m("(x + 2*x, y, z)", 3)), "(0, y, z)");
    assert_eq!(format_map(&m("(2x^2+xy+xz+2x+y^2+z^2, -y, 4)", 3)), "(2x+2x^2+xy+xz+y^2+z^2, 2y, 1)");
    let four = parse_map("(x1+x2*x4^2, x2, x3, x4)", &f(2)).unwrap();
    assert_eq!(format_map(&four), "(x1+x2*x4^2, x2, x3, x4)");
    assert!(matches!(parse_map("(x, w, z)", &f(2)), Err(MapError::UnknownVariable { pos: 4, .. })));
    assert!(matches!(parse_map("(x, y, z+x4)", &f(2)), Err(MapError::UnknownVariable { .. })));
    assert!(matches!(parse_map("(x, y+, z)", &f(2)), Err(MapError::Syntax { .. })));
    assert!(matches!(parse_map("(x, y, z", &f(2)), Err(MapError::Syntax { .. })));
    let f4 = FieldCtx::new(2, 2).unwrap();
    assert_eq!(format_map(&parse_map("(3x, 2y, z)", &f4).unwrap()), "(3x, 2y, z)");
    assert!(matches!(parse_map("(4x, y, z)", &f4), Err(MapError::CoefficientOutOfRange { value: 4, pos: 1 })));
}

fn arb_map(p: u32, deg: u32) -> impl Strategy<Value = PolyMap> {
    let ring = PolyRing::new(f(p), 3);
    let len = ring.basis().size_upto(deg);
    proptest::collection::vec(proptest::collection::vec(0..p as u8, len), 3).prop_map(move |cs| {
        PolyMap::new(ring.clone(), cs.into_iter().map(MultiPoly::from_coeffs).collect()).unwrap()
    })
}

fn arb_identity_affine(p: u32) -> impl Strategy<Value = PolyMap> {
    arb_map(p, 2).prop_map(|g| {
        let id = PolyMap::identity(g.ring());
        PolyMap::new(g.ring().clone(), g.nonlinear_parts()).unwrap().add(&id)
    })
}

fn arb_gl(p: u32) -> impl Strategy<Value = PolyMap> {
    (proptest::collection::vec(0..p as u8, 9), proptest::collection::vec(0..p as u8, 3)).prop_filter_map(
        "singular",
        move |(e, t)| {
            let fld = f(p);
            let mat: Vec<Vec<Elem>> = e.chunks(3).map(|r| r.to_vec()).collect();
            crate::linalg::invert(&mat, &fld)?;
            Some(PolyMap::affine(&PolyRing::new(fld, 3), &mat, &t))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative(a in arb_map(3, 2), b in arb_map(3, 2), c in arb_map(3, 2)) {
        let left = a.compose(&b, 64).unwrap().compose(&c, 64).unwrap();
        let right = a.compose(&b.compose(&c, 64).unwrap(), 64).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn jacobian_chain_rule(a in arb_map(2, 2), b in arb_map(2, 2)) {
        let ring = a.ring().clone();
        let lhs = a.compose(&b, 64).unwrap().jacobian_det().unwrap();
        let ja = a.jacobian_det().unwrap();
        let ja_b = ring.subst(&ja, b.comps(), 64).unwrap();
        let rhs = ring.mul(&b.jacobian_det().unwrap(), &ja_b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn text_round_trip(a in arb_map(5, 3)) {
        let text = format_map(&a);
        prop_assert_eq!(parse_map(&text, a.field()).unwrap(), a);
    }

    #[test]
    fn automorphisms_have_constant_jacobian(g in arb_identity_affine(2)) {
        if g.is_automorphism().unwrap() {
            prop_assert!(g.det_classify().unwrap().is_constant());
            let Inversion::Inverse(inv) = g.formal_inverse().unwrap() else { panic!("inverse expected") };
            prop_assert!(g.compose(&inv, 64).unwrap().is_identity());
            prop_assert!(inv.compose(&g, 64).unwrap().is_identity());
            prop_assert!(inv.degree() <= 4);
        }
    }

    #[test]
    fn flags_are_affine_invariant(g in arb_identity_affine(3), l in arb_gl(3), r in arb_gl(3)) {
        let lg = l.compose(&g, 64).unwrap().compose(&r, 64).unwrap();
        prop_assert_eq!(lg.is_mock().unwrap(), g.is_mock().unwrap());
        prop_assert_eq!(lg.is_automorphism().unwrap(), g.is_automorphism().unwrap());
        // Right translations feed nonlinear terms into the linear part, which
        // may then be singular; for automorphisms it is det J(0) != 0.
        match lg.affine_decompose() {
            Ok(d) => {
                prop_assert_eq!(d.alpha.compose(&d.fprime, 64).unwrap(), lg.clone());
                prop_assert_eq!(d.fprime.is_automorphism().unwrap(), g.is_automorphism().unwrap());
                prop_assert_eq!(d.fprime.is_mock().unwrap(), g.is_mock().unwrap());
            }
            Err(e) => {
                prop_assert_eq!(e, MapError::SingularAffine);
                prop_assert!(!g.is_automorphism().unwrap() && !g.is_mock().unwrap());
            }
        }
    }

    #[test]
    fn det_class_matches_evaluation(g in arb_map(3, 2)) {
        let det = g.jacobian_det().unwrap();
        let ring = g.ring();
        let values: Vec<Elem> = (0..27)
            .map(|i| ring.eval(&det, &[i / 9, i / 3 % 3, i % 3], ring.field()).unwrap())
            .collect();
        match g.det_classify().unwrap() {
            DetClass::ConstantNonzero(c) => prop_assert!(values.iter().all(|&v| v == c)),
            DetClass::NowhereZeroNonconstant => prop_assert!(values.iter().all(|&v| v != 0)),
            DetClass::VanishesSomewhere => prop_assert!(values.contains(&0)),
        }
    }

    #[test]
    fn bijection_matches_image_count(g in arb_identity_affine(2)) {
        let ev = Evaluator::shared(g.field(), 2, 3).unwrap();
        let mut img = ev.image(&g);
        img.sort_unstable();
        img.dedup();
        prop_assert_eq!(img.len() == 64, g.is_bijection(2).unwrap());
    }
}
