use proptest::prelude::*;

use super::*;
use crate::polymap::parse_map;

fn f(p: u32, r: u32) -> Arc<FieldCtx> {
    FieldCtx::new(p, r).unwrap()
}

fn m(text: &str, p: u32) -> PolyMap {
    parse_map(text, &f(p, 1)).unwrap()
}

#[test]
fn group_orders() {
    let f2 = f(2, 1);
    assert_eq!(enum_gl(&f2, 3).len(), 168);
    assert_eq!(enum_affine(&f2, 3).len(), 1344);
    let f3 = f(3, 1);
    assert_eq!(enum_gl(&f3, 3).len(), 11232);
    assert_eq!(enum_affine(&f3, 3).len(), 303264);
    assert_eq!(count_groups(2, 3), (168, 1344));
    assert_eq!(count_groups(3, 3), (11232, 303264));
    assert_eq!(count_groups(4, 3), (181440, 11612160));
    assert_eq!(count_groups(5, 3), (1488000, 186000000));
}

#[test]
fn enumeration_matches_closed_form_for_small_cases() {
    for (p, r, n) in [(2, 1, 1), (2, 1, 2), (3, 1, 2), (2, 2, 2), (5, 1, 2)] {
        let fld = f(p, r);
        let q = fld.q() as u64;
        let (gl, aff) = count_groups(q, n as u32);
        let g = enum_gl(&fld, n);
        assert_eq!(g.len() as u128, gl);
        assert_eq!(enum_affine(&fld, n).len() as u128, aff);
        let enc: Vec<_> = g.iter().map(|l| l.encode()).collect();
        assert!(enc.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn linear_map_algebra() {
    let f3 = f(3, 1);
    let gl = enum_gl(&f3, 2);
    let id = LinearMap::identity(2);
    for a in gl.iter().step_by(7) {
        let ai = a.inverse(&f3).unwrap();
        assert_eq!(a.compose(&ai, &f3), id);
        let t = a.with_translation(&[1, 2]);
        let ti = t.inverse(&f3).unwrap();
        assert_eq!(t.compose(&ti, &f3), id);
        assert_eq!(ti.compose(&t, &f3), id);
        let x = [2, 1];
        assert_eq!(ti.apply(&t.apply(&x, &f3), &f3), x.to_vec());
    }
    let ring = PolyRing::new(f3.clone(), 2);
    let a = gl[5].with_translation(&[2, 0]);
    let b = gl[17];
    let pa = a.to_polymap(&ring);
    let pb = b.to_polymap(&ring);
    assert_eq!(LinearMap::from_polymap(&pa.compose(&pb, 4).unwrap()), Some(a.compose(&b, &f3)));
}

#[test]
fn conjugation_orbit_sizes() {
    let a = m("(x, y, z+x^2y+xy^2)", 2);
    let b = m("(x, y, z+x^2y)", 2);
    let c = Conjugator::new(a.ring(), 3);
    assert_eq!(c.orbit_size(&a), 7);
    assert_eq!(c.orbit_size(&b), 42);
    let id = PolyMap::identity(a.ring());
    assert_eq!(c.orbit_size(&id), 1);
    assert_eq!(conj_canonical(&id), id.encode(1));
}

#[test]
fn canonical_key_is_orbit_invariant() {
    let a = m("(x+y^2, y+x^2+z^2, z+x^2)", 2);
    let c = Conjugator::new(a.ring(), 2);
    let key = c.canonical(&a);
    for g in (0..168).step_by(5) {
        assert_eq!(c.canonical(&c.conjugate(&a, g)), key);
    }
    let other = m("(x+y^2, y+z^2, z)", 2);
    assert_ne!(c.canonical(&other), key);
}

/// Burnside: the number of orbits is the average number of fixed points.
fn burnside_affine_orbits(fld: &FieldCtx, n: usize) -> usize {
    let gl = enum_gl(fld, n);
    let aff = enum_affine(fld, n);
    let mut fixed = 0usize;
    for l in &gl {
        let li = l.inverse(fld).unwrap();
        fixed += aff.iter().filter(|a| a.conjugate(l, &li, fld) == **a).count();
    }
    assert_eq!(fixed % gl.len(), 0);
    fixed / gl.len()
}

#[test]
fn affine_orbits_f2_agree_with_burnside() {
    let f2 = f(2, 1);
    let reps = affine_conjugacy_orbits(&f2, 3);
    assert_eq!(reps.len(), burnside_affine_orbits(&f2, 3));
    assert!(reps.contains(&LinearMap::identity(3)));
}

#[test]
fn affine_orbits_f3() {
    let f3 = f(3, 1);
    let reps = affine_conjugacy_orbits(&f3, 3);
    assert_eq!(reps.len(), 80);
    assert!(reps.contains(&LinearMap::identity(3)));
    assert!(reps.windows(2).all(|w| w[0].encode() < w[1].encode()));
}

#[test]
fn affine_orbits_small_burnside() {
    for (p, n) in [(2, 2), (3, 2), (5, 1), (5, 2)] {
        let fld = f(p, 1);
        assert_eq!(affine_conjugacy_orbits(&fld, n).len(), burnside_affine_orbits(&fld, n), "p={p} n={n}");
    }
}

#[test]
fn generator_counts() {
    let ring = PolyRing::new(f(2, 1), 3);
    let g3 = tame_generators(&ring, 3);
    // Monomials of degree 2..=3 in two variables: 3 + 4.
    assert_eq!(g3.len(), 1344 + 3 * 7);
    let g2 = tame_generators(&ring, 2);
    assert!(g2.contains(&m("(x+y^2, y, z)", 2)));
    assert!(g2.iter().all(|g| g.is_automorphism().unwrap()));
    let ring3 = PolyRing::new(f(3, 1), 3);
    let e3 = elementary_maps(&ring3, 2, 3);
    assert_eq!(e3.len(), 3 * 7 * 2);
    for e in e3 {
        assert!(e.compose(&e, 9).unwrap().compose(&e, 27).unwrap().is_identity());
    }
}

#[test]
fn orbit_sizes_divide_group_order() {
    let ring = PolyRing::new(f(2, 1), 3);
    let c = Conjugator::new(&ring, 2);
    let start = ring.basis().size_upto(1);
    for bits in 0u32..(1 << 9) {
        let mut comps: Vec<MultiPoly> = (0..3).map(|i| ring.var(i)).collect();
        for b in 0..9 {
            if bits >> b & 1 == 1 {
                comps[b / 3].set(start + b % 3 * 2, 1);
            }
        }
        let map = PolyMap::new(ring.clone(), comps).unwrap();
        assert_eq!(168 % c.orbit_size(&map), 0);
    }
}

#[test]
fn closure_joins_elementary_chain() {
    let id = m("(x, y, z)", 2);
    let targets = vec![m("(x+y^2, y+z^2, z)", 2), m("(x+yz+z^2, y+z^2, z)", 2), m("(x, y+x^2, z+xy)", 2)];
    let params = ClosureParams { gen_degree: 2, d_max: 4, target_depth: 2, seed_depth: 2, budget: 200_000, sig_rmax: 3, probes: 1 };
    let part = tame_closure(&[id], &targets, &params).unwrap();
    assert!(part.complete);
    assert_eq!(part.classes.len(), 1);
    assert_eq!(part.classes[0].seed, Some(0));
    assert_eq!(part.classes[0].members, vec![0, 1, 2]);
    assert!(part.classes[0].invariants.automorphism);
    assert_eq!(part.seed_class, vec![Some(0)]);
}

#[test]
fn closure_keeps_invariant_classes_apart() {
    let targets = vec![
        m("(x, y, z)", 2),
        m("(x^8+x^4+x, y, z)", 2),
        m("(x, y+x^3+xz^2, z+xy^2+xz^2)", 2),
        m("(x+x^2, y, z)", 2),
    ];
    let params = ClosureParams { gen_degree: 2, d_max: 8, target_depth: 1, seed_depth: 1, budget: 100_000, sig_rmax: 3, probes: 1 };
    let part = tame_closure(&[], &targets, &params).unwrap();
    assert_eq!(part.classes.len(), 4);
    assert!(part.classes[0].invariants.automorphism);
    let sigs: Vec<u32> = part.classes.iter().map(|c| c.invariants.signature).collect();
    assert!(sigs.contains(&0b111));
    assert!(sigs.contains(&0b011));
    assert!(sigs.contains(&0));
    let csv = part.to_csv(3);
    assert!(csv.starts_with(
        "class_id,representative,size,is_automorphism,signature_r1,signature_r2,signature_r3,det_class,dependence,seed\n"
    ));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn closure_rejects_bad_params() {
    let t = vec![m("(x, y, z)", 2)];
    let params = ClosureParams { d_max: 65, ..ClosureParams::default() };
    assert!(matches!(tame_closure(&[], &t, &params), Err(ClosureError::Params(_))));
    assert!(matches!(tame_closure(&[], &[], &ClosureParams::default()), Err(ClosureError::Params(_))));
}

#[test]
fn closure_is_deterministic_and_budgeted() {
    let targets = vec![m("(x+y^2, y, z)", 3), m("(x, y+2xz, z)", 3), m("(x+z^2, y+x^2, z)", 3)];
    let params = ClosureParams { gen_degree: 2, d_max: 4, target_depth: 2, seed_depth: 0, budget: 500, sig_rmax: 1, probes: 1 };
    let a = tame_closure(&[], &targets, &params).unwrap();
    let b = tame_closure(&[], &targets, &params).unwrap();
    assert!(!a.complete);
    assert!(a.states <= 500);
    assert_eq!(a.class_of, b.class_of);
    assert_eq!(a.to_csv(1), b.to_csv(1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn canonical_constant_on_orbit(bits in 0u32..(1 << 12), g in 0usize..168) {
        let ring = PolyRing::new(f(2, 1), 3);
        let lo = ring.basis().size_upto(1);
        let hi = ring.basis().size_upto(2);
        let mut comps: Vec<MultiPoly> = (0..3).map(|i| ring.var(i)).collect();
        for b in 0..12 {
            if bits >> b & 1 == 1 {
                comps[b / 4].set(lo + b % (hi - lo), 1);
            }
        }
        let map = PolyMap::new(ring.clone(), comps).unwrap();
        let c = Conjugator::new(&ring, 2);
        prop_assert_eq!(c.canonical(&c.conjugate(&map, g)), c.canonical(&map));
    }

    #[test]
    fn conjugation_is_a_group_action(i in 0usize..168, j in 0usize..168) {
        let f2 = f(2, 1);
        let ring = PolyRing::new(f2.clone(), 3);
        let map = m("(x+y^2, y+x^2+z^2, z+x^2)", 2);
        let c = Conjugator::new(&ring, 2);
        let (li, _) = c.group()[i];
        let (lj, _) = c.group()[j];
        let lij = li.compose(&lj, &f2);
        let k = c.group().iter().position(|(l, _)| *l == lij).unwrap();
        prop_assert_eq!(c.conjugate(&c.conjugate(&map, i), j), c.conjugate(&map, k));
    }
}
