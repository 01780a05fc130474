//! Exhaustive scans of coefficient spaces.
//!
//! A scan enumerates every map of a [`Shape`] over a field, keeps the
//! hits of a [`Predicate`] and stores them with their flags in a record
//! file sorted by coefficients. For the Jacobian-based predicates only the
//! subspace where the Jacobian of the nonlinear part is traceless is
//! enumerated: `det(I + DH)` splits into homogeneous parts of distinct
//! degrees, the lowest being the trace, so every other candidate fails.
//!
//! The index space is cut into contiguous shards that run in parallel and
//! can be checkpointed and resumed.

mod file;
mod space;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

pub use file::{Checkpoint, RecordFile, RecordHeader};
pub use space::{IndexSpace, Shape, ShapeSpace};

use crate::ff::{Elem, FieldCtx};
use crate::par::*;
use crate::polymap::{MapError, PolyMap};
use space::FastFilter;

pub use crate::orbits::count_groups;

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("checkpoint belongs to a different scan (config {found}, expected {expected})")]
    CheckpointMismatch { expected: String, found: String },
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("unsupported scan: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    Mock,
    Automorphism,
    Bijection,
}

impl Predicate {
    pub fn name(self) -> &'static str {
        match self {
            Predicate::Mock => "mock",
            Predicate::Automorphism => "auto",
            Predicate::Bijection => "bijection",
        }
    }
}

impl std::str::FromStr for Predicate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mock" => Ok(Predicate::Mock),
            "auto" | "automorphism" => Ok(Predicate::Automorphism),
            "bijection" => Ok(Predicate::Bijection),
            _ => Err(format!("unknown predicate `{s}`")),
        }
    }
}

pub mod flags {
    pub const MOCK: u16 = 1;
    pub const AUTOMORPHISM: u16 = 1 << 1;
    pub const DEPENDENCE: u16 = 1 << 2;
    /// Bit `SIGNATURE_SHIFT + r - 1` is bijectivity over `F_{q^r}`.
    pub const SIGNATURE_SHIFT: u32 = 3;
    pub const SIGNATURE_MAX_R: u32 = 5;
}

/// Extension signatures are evaluated only while `q^(3r)` stays below
/// this; higher bits are left clear. Automorphisms skip evaluation since
/// they are bijective over every extension.
pub const SIGNATURE_POINT_LIMIT: u64 = 1 << 21;

/// Candidates per checkpoint step.
pub const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanConfig {
    pub shape: Shape,
    pub p: u32,
    pub r: u32,
    pub predicate: Predicate,
    pub shards: usize,
    /// Restrict Jacobian-based predicates to the traceless subspace.
    pub prune: bool,
}

impl ScanConfig {
    pub fn new(shape: Shape, p: u32, r: u32, predicate: Predicate) -> Self {
        Self { shape, p, r, predicate, shards: 1, prune: true }
    }

    pub fn with_shards(mut self, shards: usize) -> Self {
        self.shards = shards;
        self
    }

    pub fn with_prune(mut self, prune: bool) -> Self {
        self.prune = prune;
        self
    }

    /// Whether the trace-kernel restriction actually applies.
    pub fn pruned(&self) -> bool {
        self.prune && self.predicate != Predicate::Bijection
    }

    pub fn describe(&self) -> String {
        format!(
            "shape={} p={} r={} n=3 predicate={} shards={} prune={} version={}",
            self.shape,
            self.p,
            self.r,
            self.predicate.name(),
            self.shards,
            self.pruned(),
            file::VERSION
        )
    }

    /// Hash identifying the scan a checkpoint belongs to.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.describe().as_bytes());
        hex::encode(&digest[..8])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Record {
    pub coeffs: Vec<Elem>,
    pub flags: u16,
}

impl Record {
    pub fn is_mock(&self) -> bool {
        self.flags & flags::MOCK != 0
    }

    pub fn is_automorphism(&self) -> bool {
        self.flags & flags::AUTOMORPHISM != 0
    }

    pub fn dependence(&self) -> bool {
        self.flags & flags::DEPENDENCE != 0
    }

    /// Bit `r - 1` for bijectivity over `F_{q^r}`.
    pub fn signature(&self) -> u32 {
        (self.flags >> flags::SIGNATURE_SHIFT) as u32
    }
}

/// Number of leading signature bits a record carries for a
/// non-automorphism over `f`; automorphisms carry all of them.
pub fn signature_depth(f: &FieldCtx, n: usize) -> u32 {
    if !f.is_prime_field() {
        return 1;
    }
    (1..=flags::SIGNATURE_MAX_R).take_while(|&r| r == 1 || (f.q() as u64).pow(r * n as u32) <= SIGNATURE_POINT_LIMIT).count() as u32
}

/// Flags of a map computed with the general predicates.
pub fn flags_of(map: &PolyMap) -> Result<u16, MapError> {
    let mock = map.is_mock()?;
    flags_with(map, mock)
}

fn flags_with(map: &PolyMap, mock: bool) -> Result<u16, MapError> {
    let f = map.field();
    let mut out = 0;
    if mock {
        out |= flags::MOCK;
    }
    let auto = map.is_automorphism()?;
    if auto {
        out |= flags::AUTOMORPHISM;
    }
    if map.has_identity_affine_part() && map.satisfies_dependence()? {
        out |= flags::DEPENDENCE;
    }
    for r in 1..=flags::SIGNATURE_MAX_R {
        let bit = if auto {
            true
        } else if r == 1 {
            map.is_bijection(1)?
        } else if f.is_prime_field() && (f.q() as u64).pow(r * map.n() as u32) <= SIGNATURE_POINT_LIMIT {
            map.is_bijection(r)?
        } else {
            false
        };
        if bit {
            out |= 1 << (flags::SIGNATURE_SHIFT + r - 1);
        }
    }
    Ok(out)
}

/// Resolved scan: the space, its index set and the precomputed filters.
pub struct Scanner {
    config: ScanConfig,
    space: ShapeSpace,
    index: IndexSpace,
    filter: FastFilter,
}

impl Scanner {
    pub fn new(config: ScanConfig) -> Result<Self, ScanError> {
        if config.shards == 0 {
            return Err(ScanError::Unsupported("shard count must be at least 1".into()));
        }
        let field = FieldCtx::new(config.p, config.r).map_err(|e| ScanError::Unsupported(e.to_string()))?;
        if field.q() > 7 {
            return Err(ScanError::Unsupported(format!("fields larger than 7 elements (q = {})", field.q())));
        }
        let space = ShapeSpace::new(config.shape, field);
        let index = if config.pruned() {
            IndexSpace::kernel(&space, &space.trace_constraints())?
        } else {
            IndexSpace::full(&space)
        };
        if index.len() > u64::MAX as u128 {
            return Err(ScanError::Unsupported("index space too large".into()));
        }
        let filter = FastFilter::new(&space);
        Ok(Self { config, space, index, filter })
    }

    pub fn config(&self) -> &ScanConfig {
        &self.config
    }

    pub fn space(&self) -> &ShapeSpace {
        &self.space
    }

    pub fn index(&self) -> &IndexSpace {
        &self.index
    }

    pub fn total(&self) -> u64 {
        self.index.len() as u64
    }

    pub fn header(&self, records: u64) -> RecordHeader {
        let f = self.space.field();
        RecordHeader {
            p: f.p() as u8,
            r: f.r() as u8,
            n: 3,
            deg: self.space.degree() as u8,
            shape: self.config.shape,
            monomials: self.space.slot_count() as u16,
            records,
        }
    }

    /// Candidate range of shard `i`.
    pub fn shard_range(&self, i: usize) -> (u64, u64) {
        let total = self.total();
        let k = self.config.shards as u64;
        let i = i as u64;
        (total * i / k, total * (i + 1) / k)
    }

    /// Filters one candidate; returns its record if it is a hit.
    pub fn check(&self, coeffs: &[Elem]) -> Result<Option<Record>, MapError> {
        let q2 = self.space.field().q() == 2;
        let (hit, mock) = match self.config.predicate {
            Predicate::Mock => {
                let ok = if q2 {
                    self.filter.bijective(coeffs) && self.filter.jacobian_constant(coeffs)
                } else {
                    self.filter.jacobian_constant(coeffs) && self.filter.bijective(coeffs)
                };
                (ok, ok)
            }
            Predicate::Automorphism => {
                if !self.filter.jacobian_constant(coeffs) {
                    return Ok(None);
                }
                let map = self.space.map_from_coeffs(coeffs);
                (map.is_automorphism()?, self.filter.bijective(coeffs))
            }
            Predicate::Bijection => {
                let b = self.filter.bijective(coeffs);
                (b, b && self.filter.jacobian_constant(coeffs))
            }
        };
        if !hit {
            return Ok(None);
        }
        let map = self.space.map_from_coeffs(coeffs);
        Ok(Some(Record { coeffs: coeffs.to_vec(), flags: flags_with(&map, mock)? }))
    }

    /// Hits among candidates `lo..hi`, in index order.
    pub fn scan_range(&self, lo: u64, hi: u64) -> Result<Vec<Record>, MapError> {
        let f = self.space.field();
        let mut buf = vec![0 as Elem; self.space.slot_count()];
        let mut out = Vec::new();
        for idx in lo..hi {
            self.index.decode(idx, f, &mut buf);
            if let Some(rec) = self.check(&buf)? {
                out.push(rec);
            }
        }
        Ok(out)
    }

    /// All hits, sorted by coefficients; shards run in parallel.
    pub fn run(&self) -> Result<Vec<Record>, MapError> {
        let parts: Vec<Vec<Record>> = (0..self.config.shards)
            .into_par_iter()
            .map(|i| {
                let (lo, hi) = self.shard_range(i);
                self.scan_range(lo, hi)
            })
            .collect::<Result<_, _>>()?;
        let mut all: Vec<Record> = parts.into_iter().flatten().collect();
        all.sort();
        Ok(all)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    /// Progress file; hits found so far sit next to it, one file per shard.
    pub checkpoint: Option<PathBuf>,
    /// Continue from an existing checkpoint.
    pub resume: bool,
    /// Stop after this many chunks in total (for testing interruption).
    pub stop_after_chunks: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanSummary {
    pub complete: bool,
    pub candidates: u64,
    pub records: u64,
    pub automorphisms: u64,
    pub config_hash: String,
}

fn part_path(checkpoint: &Path, shard: usize) -> PathBuf {
    let mut s = checkpoint.as_os_str().to_owned();
    s.push(format!(".shard{shard}"));
    PathBuf::from(s)
}

/// Runs a scan to a record file, optionally checkpointing every
/// [`CHUNK`] candidates per shard.
pub fn scan_to_file(config: &ScanConfig, out: &Path, opts: &ScanOptions) -> Result<ScanSummary, ScanError> {
    let scanner = Scanner::new(config.clone())?;
    let hash = config.hash();
    let shards = config.shards;
    let rec_len = scanner.space.slot_count() + 2;

    let Some(ckpt_path) = opts.checkpoint.clone() else {
        let records = scanner.run()?;
        return finish(&scanner, out, records, hash);
    };

    let mut state: Vec<Checkpoint> = (0..shards)
        .map(|i| Checkpoint { shard: i, next: scanner.shard_range(i).0, hits: 0, config: hash.clone() })
        .collect();
    if opts.resume {
        let text = fs::read_to_string(&ckpt_path)?;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let c = Checkpoint::parse(line)?;
            if c.config != hash {
                return Err(ScanError::CheckpointMismatch { expected: hash, found: c.config });
            }
            if c.shard >= shards {
                return Err(ScanError::Format(format!("shard {} out of range", c.shard)));
            }
            let shard = c.shard;
            state[shard] = c;
        }
        for c in &state {
            let part = part_path(&ckpt_path, c.shard);
            let file = fs::OpenOptions::new().write(true).create(true).truncate(false).open(&part)?;
            file.set_len(c.hits * rec_len as u64)?;
        }
    } else {
        for i in 0..shards {
            fs::write(part_path(&ckpt_path, i), [])?;
        }
        Checkpoint::write_all(&ckpt_path, &state)?;
    }

    let shared = Mutex::new(state);
    let chunks_done = AtomicU64::new(0);
    let interrupted = std::sync::atomic::AtomicBool::new(false);
    (0..shards).into_par_iter().try_for_each(|i| -> Result<(), ScanError> {
        let (_, hi) = scanner.shard_range(i);
        let mut next = shared.lock().unwrap()[i].next;
        while next < hi {
            if let Some(limit) = opts.stop_after_chunks {
                if chunks_done.fetch_add(1, Ordering::SeqCst) >= limit {
                    interrupted.store(true, Ordering::SeqCst);
                    return Ok(());
                }
            }
            let end = (next + CHUNK).min(hi);
            let hits = scanner.scan_range(next, end)?;
            let mut bytes = Vec::with_capacity(hits.len() * rec_len);
            for h in &hits {
                file::encode_record(h, &mut bytes);
            }
            let mut part = fs::OpenOptions::new().append(true).open(part_path(&ckpt_path, i))?;
            io::Write::write_all(&mut part, &bytes)?;
            part.sync_data()?;
            next = end;
            let mut st = shared.lock().unwrap();
            st[i].next = next;
            st[i].hits += hits.len() as u64;
            Checkpoint::write_all(&ckpt_path, &st)?;
        }
        Ok(())
    })?;

    let state = shared.into_inner().unwrap();
    if interrupted.load(Ordering::SeqCst) {
        return Ok(ScanSummary {
            complete: false,
            candidates: scanner.total(),
            records: state.iter().map(|c| c.hits).sum(),
            automorphisms: 0,
            config_hash: hash,
        });
    }
    let mut records = Vec::new();
    for i in 0..shards {
        let bytes = fs::read(part_path(&ckpt_path, i))?;
        for chunk in bytes.chunks(rec_len) {
            records.push(file::decode_record(chunk, rec_len - 2)?);
        }
    }
    records.sort();
    let summary = finish(&scanner, out, records, hash)?;
    for i in 0..shards {
        fs::remove_file(part_path(&ckpt_path, i))?;
    }
    Ok(summary)
}

fn finish(scanner: &Scanner, out: &Path, records: Vec<Record>, hash: String) -> Result<ScanSummary, ScanError> {
    let file = RecordFile { header: scanner.header(records.len() as u64), records };
    file.write(out)?;
    Ok(ScanSummary {
        complete: true,
        candidates: scanner.total(),
        records: file.records.len() as u64,
        automorphisms: file.records.iter().filter(|r| r.is_automorphism()).count() as u64,
        config_hash: hash,
    })
}

/// In-memory scan.
pub fn scan(config: &ScanConfig) -> Result<(ShapeSpace, Vec<Record>), ScanError> {
    let scanner = Scanner::new(config.clone())?;
    let records = scanner.run()?;
    Ok((scanner.space, records))
}

/// Mock automorphisms of the form `(x + H_1, y + H_2, z)` over `F_q`.
pub fn scan_dependence(q: u32, shards: usize) -> Result<(ShapeSpace, Vec<Record>), ScanError> {
    let (p, r) = match q {
        4 => (2, 2),
        5 => (5, 1),
        _ => {
            let f = FieldCtx::new(q, 1).map_err(|_| ScanError::Unsupported(format!("q = {q}")))?;
            (f.p(), 1)
        }
    };
    scan(&ScanConfig::new(Shape::DependenceDeg2, p, r, Predicate::Mock).with_shards(shards))
}

/// All `GL_3(F_q)`-conjugates of dependence-shape records, as identity-affine
/// records: the maps satisfying the dependence criterion in any basis.
/// Flags carry over since every flag is a conjugation invariant.
pub fn expand_dependence(space: &ShapeSpace, records: &[Record]) -> Result<(ShapeSpace, Vec<Record>), ScanError> {
    if space.shape() != Shape::DependenceDeg2 {
        return Err(ScanError::Unsupported(format!("expansion of {} records", space.shape())));
    }
    let target = ShapeSpace::new(Shape::IdentityAffineDeg2, space.field().clone());
    let conj = crate::orbits::Conjugator::new(space.ring(), 2);
    let mut seen: std::collections::BTreeMap<Vec<Elem>, u16> = Default::default();
    for rec in records {
        let map = space.map_from_coeffs(&rec.coeffs);
        let own = target.coeffs_of(&map).expect("dependence shape is identity-affine");
        if seen.contains_key(&own) {
            continue;
        }
        // Orbits partition the maps, so a record already seen has its whole orbit in.
        let orbit: Vec<Vec<Elem>> = (0..conj.group().len())
            .into_par_iter()
            .map(|g| target.coeffs_of(&conj.conjugate(&map, g)).expect("conjugate keeps the identity affine part"))
            .collect();
        for c in orbit {
            seen.insert(c, rec.flags);
        }
    }
    let out: Vec<Record> = seen.into_iter().map(|(coeffs, flags)| Record { coeffs, flags }).collect();
    Ok((target, out))
}

/// Decodes the maps of a record file.
pub fn maps_of(file: &RecordFile) -> Result<(ShapeSpace, Vec<PolyMap>), ScanError> {
    let h = &file.header;
    let field: Arc<FieldCtx> =
        FieldCtx::new(h.p as u32, h.r as u32).map_err(|e| ScanError::Format(e.to_string()))?;
    let space = ShapeSpace::new(h.shape, field);
    let maps = file.records.iter().map(|r| space.map_from_coeffs(&r.coeffs)).collect();
    Ok((space, maps))
}

#[cfg(test)]
mod tests;
