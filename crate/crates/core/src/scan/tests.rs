use proptest::prelude::*;

use super::*;
use crate::polymap::DetClass;

fn space(shape: Shape, p: u32, r: u32) -> ShapeSpace {
    ShapeSpace::new(shape, FieldCtx::new(p, r).unwrap())
}

#[test]
fn space_sizes() {
    assert_eq!(space(Shape::IdentityAffineDeg2, 2, 1).candidate_count(), 1 << 18);
    assert_eq!(space(Shape::IdentityAffineDeg2, 3, 1).candidate_count(), 3u128.pow(18));
    assert_eq!(space(Shape::HomogeneousCubic, 2, 1).candidate_count(), 1 << 30);
    assert_eq!(space(Shape::DependenceDeg2, 2, 2).candidate_count(), 4u128.pow(12));
    assert_eq!(space(Shape::DependenceDeg2, 5, 1).candidate_count(), 5u128.pow(12));
}

#[test]
fn pruned_index_sizes() {
    let k = |shape, p, r| {
        let s = space(shape, p, r);
        IndexSpace::kernel(&s, &s.trace_constraints()).unwrap().len()
    };
    assert_eq!(k(Shape::IdentityAffineDeg2, 3, 1), 3u128.pow(15));
    assert_eq!(k(Shape::HomogeneousCubic, 2, 1), 1 << 24);
    assert_eq!(k(Shape::DependenceDeg2, 5, 1), 5u128.pow(9));
}

#[test]
fn kernel_points_satisfy_constraints() {
    for (shape, p, r) in [(Shape::IdentityAffineDeg2, 3, 1), (Shape::DependenceDeg2, 2, 2), (Shape::HomogeneousCubic, 2, 1)] {
        let s = space(shape, p, r);
        let f = s.field().clone();
        let cons = s.trace_constraints();
        let idx = IndexSpace::kernel(&s, &cons).unwrap();
        let mut buf = vec![0; s.slot_count()];
        let mut seen = std::collections::HashSet::new();
        for i in (0..idx.len() as u64).step_by(997) {
            idx.decode(i, &f, &mut buf);
            for row in &cons {
                let v = row.iter().zip(&buf).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
                assert_eq!(v, 0);
            }
            assert!(seen.insert(buf.clone()));
            let map = s.map_from_coeffs(&buf);
            assert_eq!(s.coeffs_of(&map), Some(buf.clone()));
        }
    }
}

fn filters_agree(shape: Shape, p: u32, r: u32, seed: &[u8]) {
    let s = space(shape, p, r);
    let q = s.field().q() as u8;
    let coeffs: Vec<Elem> = (0..s.slot_count()).map(|i| seed[i % seed.len()].wrapping_mul(i as u8 + 1) % q).collect();
    let map = s.map_from_coeffs(&coeffs);
    let filter = FastFilter::new(&s);
    let constant = matches!(map.det_classify().unwrap(), DetClass::ConstantNonzero(_));
    assert_eq!(filter.jacobian_constant(&coeffs), constant, "{map}");
    assert_eq!(filter.bijective(&coeffs), map.is_bijection(1).unwrap(), "{map}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_filters_match_general_predicates(seed in proptest::collection::vec(any::<u8>(), 1..30), which in 0usize..6) {
        let (shape, p, r) = [
            (Shape::IdentityAffineDeg2, 2, 1),
            (Shape::IdentityAffineDeg2, 3, 1),
            (Shape::HomogeneousCubic, 2, 1),
            (Shape::HomogeneousCubic, 3, 1),
            (Shape::DependenceDeg2, 2, 2),
            (Shape::DependenceDeg2, 5, 1),
        ][which];
        filters_agree(shape, p, r, &seed);
    }
}

#[test]
fn fast_filters_on_sparse_candidates() {
    // Random candidates are rarely hits; walk the traceless subspace too.
    for (shape, p, r) in [(Shape::IdentityAffineDeg2, 2, 1), (Shape::IdentityAffineDeg2, 3, 1), (Shape::DependenceDeg2, 2, 2)] {
        let s = space(shape, p, r);
        let f = s.field().clone();
        let idx = IndexSpace::kernel(&s, &s.trace_constraints()).unwrap();
        let filter = FastFilter::new(&s);
        let mut buf = vec![0; s.slot_count()];
        let mut hits = 0;
        for i in (0..idx.len() as u64).step_by(61) {
            idx.decode(i, &f, &mut buf);
            let map = s.map_from_coeffs(&buf);
            let constant = matches!(map.det_classify().unwrap(), DetClass::ConstantNonzero(_));
            assert_eq!(filter.jacobian_constant(&buf), constant, "{map}");
            hits += usize::from(constant);
        }
        assert!(hits > 0);
    }
}

#[test]
fn f2_quadratic_scan() {
    let cfg = ScanConfig::new(Shape::IdentityAffineDeg2, 2, 1, Predicate::Mock);
    let (s, recs) = scan(&cfg).unwrap();
    assert_eq!(recs.len(), 336);
    assert_eq!(recs.iter().filter(|r| r.is_automorphism()).count(), 176);
    assert!(recs.windows(2).all(|w| w[0] < w[1]));
    // The unpruned route finds the same records.
    let (_, full) = scan(&cfg.clone().with_prune(false)).unwrap();
    assert_eq!(full, recs);
    for r in recs.iter().step_by(7) {
        assert_eq!(flags_of(&s.map_from_coeffs(&r.coeffs)).unwrap(), r.flags);
    }
}

#[test]
fn automorphism_predicate_matches_flag() {
    let (_, mocks) = scan(&ScanConfig::new(Shape::IdentityAffineDeg2, 2, 1, Predicate::Mock)).unwrap();
    let (_, autos) = scan(&ScanConfig::new(Shape::IdentityAffineDeg2, 2, 1, Predicate::Automorphism)).unwrap();
    let expected: Vec<Record> = mocks.into_iter().filter(|r| r.is_automorphism()).collect();
    assert_eq!(autos, expected);
}

#[test]
fn shard_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for shards in [1, 4, 16] {
        let cfg = ScanConfig::new(Shape::IdentityAffineDeg2, 2, 1, Predicate::Mock).with_shards(shards);
        let out = dir.path().join(format!("s{shards}.pmrc"));
        let sum = scan_to_file(&cfg, &out, &ScanOptions::default()).unwrap();
        assert!(sum.complete);
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let file = RecordFile::from_bytes(&outputs[0]).unwrap();
    assert_eq!(file.header.records, 336);
    assert_eq!(&outputs[0][..4], b"PMRC");
    assert_eq!(outputs[0][4..10], [1, 2, 1, 3, 2, 0]);
    assert_eq!(u16::from_le_bytes([outputs[0][10], outputs[0][11]]), 18);
    assert_eq!(outputs[0].len(), 20 + 336 * 20);
}

#[test]
fn resume_reproduces_uninterrupted_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScanConfig::new(Shape::IdentityAffineDeg2, 2, 1, Predicate::Bijection).with_shards(3);
    let straight = dir.path().join("straight.pmrc");
    scan_to_file(&cfg, &straight, &ScanOptions::default()).unwrap();

    let out = dir.path().join("resumed.pmrc");
    let ckpt = dir.path().join("scan.ckpt");
    let first = ScanOptions { checkpoint: Some(ckpt.clone()), resume: false, stop_after_chunks: Some(2) };
    let sum = scan_to_file(&cfg, &out, &first).unwrap();
    assert!(!sum.complete);
    assert!(!out.exists());
    let text = fs::read_to_string(&ckpt).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.ends_with(&format!("config={}", cfg.hash()))));

    let again = ScanOptions { checkpoint: Some(ckpt.clone()), resume: true, stop_after_chunks: Some(1) };
    assert!(!scan_to_file(&cfg, &out, &again).unwrap().complete);
    let rest = ScanOptions { checkpoint: Some(ckpt.clone()), resume: true, stop_after_chunks: None };
    assert!(scan_to_file(&cfg, &out, &rest).unwrap().complete);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&straight).unwrap());

    let other = cfg.clone().with_shards(2);
    let err = scan_to_file(&other, &out, &rest).unwrap_err();
    assert!(matches!(err, ScanError::CheckpointMismatch { .. }));
}

#[test]
fn checkpoint_lines() {
    let c = Checkpoint { shard: 3, next: 65536, hits: 12, config: "00ff".into() };
    assert_eq!(c.line(), "shard=3 next=65536 hits=12 config=00ff");
    assert_eq!(Checkpoint::parse(&c.line()).unwrap(), c);
    for bad in ["shard=1 next=2 hits=3", "shard=x next=2 hits=3 config=ab", "next=2 shard=1 hits=3 config=ab", "shard=1 next=2 hits=3 config=zz"] {
        assert!(Checkpoint::parse(bad).is_err(), "{bad}");
    }
}

#[test]
fn record_file_rejects_damage() {
    let f = RecordFile {
        header: RecordHeader { p: 2, r: 1, n: 3, deg: 2, shape: Shape::IdentityAffineDeg2, monomials: 2, records: 1 },
        records: vec![Record { coeffs: vec![1, 0], flags: 0x1b }],
    };
    let bytes = f.to_bytes();
    assert_eq!(RecordFile::from_bytes(&bytes).unwrap(), f);
    assert!(RecordFile::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    let mut wrong = bytes.clone();
    wrong[0] = b'X';
    assert!(RecordFile::from_bytes(&wrong).is_err());
}

#[test]
fn group_counts_reexported() {
    assert_eq!(count_groups(4, 3), (181440, 11612160));
}

#[test]
fn dependence_expansion_over_f4() {
    let (space, recs) = scan_dependence(4, 4).unwrap();
    assert_eq!(recs.len(), 2176);
    let (target, all) = expand_dependence(&space, &recs).unwrap();
    assert_eq!(all.len(), 40384);
    assert!(all.windows(2).all(|w| w[0] < w[1]));
    for r in all.iter().step_by(1009) {
        let map = target.map_from_coeffs(&r.coeffs);
        assert!(map.satisfies_dependence().unwrap());
        assert_eq!(flags_of(&map).unwrap(), r.flags, "{map}");
    }
}
