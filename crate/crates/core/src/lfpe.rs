//! Locally finite polynomial automorphisms: order, minimal polynomial and
//! the census over affine-orbit representatives.
//!
//! Vanishing polynomials are searched on the iterates restricted to a line
//! `t ↦ P + tV` over an extension field. Restriction commutes with every
//! operation in a vanishing relation, so the minimal relation of the
//! restricted iterates divides the true minimal polynomial; once that
//! relation is verified on the full maps the two coincide. The restricted
//! degree never exceeds the true degree, which makes degree caps cheap to
//! detect.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ff::{Elem, FieldCtx, UniPoly};
use crate::linalg::IncrementalSpan;
use crate::mpoly::MultiPoly;
use crate::orbits::{Conjugator, LinearMap};
use crate::par::*;
use crate::polymap::{MapError, PolyMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LfpeCaps {
    /// Largest number of iterates examined.
    pub k_max: u32,
    /// Largest iterate degree allowed.
    pub deg_cap: u32,
}

impl Default for LfpeCaps {
    fn default() -> Self {
        Self { k_max: 512, deg_cap: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapHit {
    Iterations(u32),
    Degree { iterate: u32, degree: u32 },
}

impl fmt::Display for CapHit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CapHit::Iterations(k) => write!(f, "no relation within {k} iterates"),
            CapHit::Degree { iterate, degree } => write!(f, "iterate {iterate} has degree at least {degree}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LfpeVerdict {
    LocallyFinite { order: u64, min_poly: UniPoly },
    NotLocallyFinite,
    Undecided(CapHit),
}

impl LfpeVerdict {
    pub fn is_locally_finite(&self) -> bool {
        matches!(self, LfpeVerdict::LocallyFinite { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Finite(u64),
    CapHit(CapHit),
}

#[derive(Debug, thiserror::Error)]
pub enum LfpeError {
    #[error("not an automorphism")]
    NotAutomorphism,
    #[error("order not finite within caps: {0}")]
    OrderNotFinite(String),
    #[error("census of degree {0} is not supported")]
    UnsupportedDegree(u32),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Scan(#[from] crate::scan::ScanError),
}

/// Smallest `t >= 1` with `F^t = I`, by exact composition.
pub fn order_of(map: &PolyMap, caps: &LfpeCaps) -> Result<Order, LfpeError> {
    if !map.is_automorphism()? {
        return Err(LfpeError::NotAutomorphism);
    }
    let mut it = map.clone();
    for t in 1..=caps.k_max {
        if it.is_identity() {
            return Ok(Order::Finite(t as u64));
        }
        it = match compose_capped(map, &it, caps.deg_cap) {
            Some(next) => next,
            None => return Ok(Order::CapHit(CapHit::Degree { iterate: t + 1, degree: caps.deg_cap + 1 })),
        };
    }
    Ok(Order::CapHit(CapHit::Iterations(caps.k_max)))
}

/// Decides local finiteness; non-automorphisms are never locally finite.
pub fn is_locally_finite(map: &PolyMap, caps: &LfpeCaps) -> Result<LfpeVerdict, LfpeError> {
    if !map.is_bijection(1)? || !map.is_automorphism()? {
        return Ok(LfpeVerdict::NotLocallyFinite);
    }
    Ok(analyze_automorphism(map, caps))
}

/// Minimal polynomial of a locally finite automorphism.
pub fn minimum_polynomial(map: &PolyMap, caps: &LfpeCaps) -> Result<UniPoly, LfpeError> {
    match is_locally_finite(map, caps)? {
        LfpeVerdict::LocallyFinite { min_poly, .. } => Ok(min_poly),
        LfpeVerdict::NotLocallyFinite => Err(LfpeError::NotAutomorphism),
        LfpeVerdict::Undecided(c) => Err(LfpeError::OrderNotFinite(c.to_string())),
    }
}

/// `Σ c_i F^i` evaluated as a map, `F^0 = I`.
pub fn eval_relation(map: &PolyMap, poly: &UniPoly, deg_cap: u32) -> Option<PolyMap> {
    let ring = map.ring();
    let mut acc = PolyMap::identity(ring).scale(poly.coeff(0));
    let mut it = PolyMap::identity(ring);
    for k in 1..poly.coeffs().len() {
        it = compose_capped(map, &it, deg_cap)?;
        acc = acc.add(&it.scale(poly.coeff(k)));
    }
    Some(acc)
}

fn is_zero_map(m: &PolyMap) -> bool {
    m.comps().iter().all(MultiPoly::is_zero)
}

/// `F ∘ G` if it stays within the ring and `deg_cap`.
fn compose_capped(f: &PolyMap, g: &PolyMap, deg_cap: u32) -> Option<PolyMap> {
    if f.degree() as u64 * g.degree() as u64 > f.ring().cap() as u64 {
        // The product may still cancel below the cap; compute with truncation
        // only to learn whether anything was dropped.
        let (out, dropped) = f.compose_truncated(g, f.ring().cap());
        return (!dropped && out.degree() <= deg_cap).then_some(out);
    }
    f.compose(g, deg_cap).ok()
}

/// Verdict for a map already known to be an automorphism.
pub fn analyze_automorphism(map: &PolyMap, caps: &LfpeCaps) -> LfpeVerdict {
    let f = map.field();
    let relation = if f.is_prime_field() {
        let mut found = None;
        for line in 0..LINE_TRIES {
            match restricted_relation(map, caps, line) {
                Err(hit) => return LfpeVerdict::Undecided(hit),
                Ok(rel) => {
                    if eval_relation(map, &rel, caps.deg_cap).is_some_and(|m| is_zero_map(&m)) {
                        found = Some(rel);
                        break;
                    }
                }
            }
        }
        match found {
            Some(rel) => Ok(rel),
            None => exact_relation(map, caps),
        }
    } else {
        exact_relation(map, caps)
    };
    match relation {
        Err(hit) => LfpeVerdict::Undecided(hit),
        Ok(min_poly) => {
            // F^t = I exactly when the minimal polynomial divides T^t - 1.
            match min_poly.order_of_t(f, caps.k_max as u64 * caps.k_max as u64) {
                Some(order) => LfpeVerdict::LocallyFinite { order, min_poly },
                None => LfpeVerdict::Undecided(CapHit::Iterations(caps.k_max)),
            }
        }
    }
}

const LINE_TRIES: u32 = 3;

/// Extension degree used for the restriction lines.
fn line_extension(p: u32) -> u32 {
    match p {
        2 => 8,
        3 => 5,
        5 => 3,
        _ => 2,
    }
}

/// Deterministic line coordinates `(P, V)` for attempt `seed`, outside the
/// prime subfield so the direction is generic.
fn line_points(ext: &FieldCtx, n: usize, seed: u32) -> (Vec<Elem>, Vec<Elem>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let lo = ext.p() as usize;
    let mut draw = || -> Vec<Elem> { (0..n).map(|_| rng.gen_range(lo..ext.q()) as Elem).collect() };
    let p = draw();
    (p, draw())
}

/// Minimal vanishing relation of the iterates restricted to a line.
fn restricted_relation(map: &PolyMap, caps: &LfpeCaps, seed: u32) -> Result<UniPoly, CapHit> {
    let base = map.field();
    let n = map.n();
    let s = line_extension(base.p());
    let ext = FieldCtx::shared(base.p(), s).expect("supported extension");
    let (pt, dir) = line_points(&ext, n, seed);
    let mut cur: Vec<UniPoly> = (0..n).map(|i| UniPoly::new(vec![pt[i], dir[i]])).collect();
    let width = caps.deg_cap as usize + 1;
    let digits = |u: &[UniPoly]| -> Vec<Elem> {
        let mut v = vec![0 as Elem; n * width * s as usize];
        for (i, poly) in u.iter().enumerate() {
            for (j, &c) in poly.coeffs().iter().enumerate() {
                let mut c = c as u32;
                for d in 0..s as usize {
                    v[(i * width + j) * s as usize + d] = (c % base.p()) as Elem;
                    c /= base.p();
                }
            }
        }
        v
    };
    let mut span = IncrementalSpan::new();
    span.insert(&digits(&cur), base);
    for k in 1..=caps.k_max {
        cur = apply_restricted(map, &cur, &ext, caps.deg_cap).ok_or(CapHit::Degree { iterate: k, degree: caps.deg_cap + 1 })?;
        if let Some(c) = span.insert(&digits(&cur), base) {
            let mut coeffs: Vec<Elem> = c.iter().map(|&x| base.neg(x)).collect();
            coeffs.push(1);
            return Ok(UniPoly::new(coeffs));
        }
    }
    Err(CapHit::Iterations(caps.k_max))
}

/// Components of `F` evaluated on univariate polynomials over `ext`;
/// `None` once a degree passes `deg_cap`.
fn apply_restricted(map: &PolyMap, u: &[UniPoly], ext: &FieldCtx, deg_cap: u32) -> Option<Vec<UniPoly>> {
    let ring = map.ring();
    let basis = ring.basis();
    let len = map.comps().iter().map(|c| c.coeffs().len()).max().unwrap_or(0);
    let mut needed = vec![false; len];
    for c in map.comps() {
        for (k, _) in c.support() {
            needed[k] = true;
        }
    }
    for k in (1..len).rev() {
        if needed[k] {
            needed[basis.parent(k).1] = true;
        }
    }
    let mut values: Vec<Option<UniPoly>> = vec![None; len];
    if len > 0 {
        values[0] = Some(UniPoly::one());
    }
    for k in 1..len {
        if needed[k] {
            let (v, parent) = basis.parent(k);
            values[k] = Some(values[parent].as_ref().unwrap().mul(&u[v], ext));
        }
    }
    let mut out = Vec::with_capacity(map.n());
    for c in map.comps() {
        let mut acc = UniPoly::zero();
        for (k, a) in c.support() {
            acc = acc.add(&values[k].as_ref().unwrap().scale(a, ext), ext);
        }
        if acc.degree().unwrap_or(0) > deg_cap as usize {
            return None;
        }
        out.push(acc);
    }
    Some(out)
}

/// Krylov search on the full coefficient vectors of the iterates.
fn exact_relation(map: &PolyMap, caps: &LfpeCaps) -> Result<UniPoly, CapHit> {
    let ring = map.ring();
    let f = map.field();
    let len = ring.basis().size_upto(caps.deg_cap.min(ring.cap()));
    let vector = |m: &PolyMap| -> Vec<Elem> {
        let mut v = vec![0 as Elem; m.n() * len];
        for (i, c) in m.comps().iter().enumerate() {
            for (k, a) in c.support() {
                v[i * len + k] = a;
            }
        }
        v
    };
    let mut span = IncrementalSpan::new();
    let mut it = PolyMap::identity(ring);
    span.insert(&vector(&it), f);
    for k in 1..=caps.k_max {
        it = compose_capped(map, &it, caps.deg_cap).ok_or(CapHit::Degree { iterate: k, degree: caps.deg_cap + 1 })?;
        if let Some(c) = span.insert(&vector(&it), f) {
            let mut coeffs: Vec<Elem> = c.iter().map(|&x| f.neg(x)).collect();
            coeffs.push(1);
            return Ok(UniPoly::new(coeffs));
        }
    }
    Err(CapHit::Iterations(caps.k_max))
}

/// Which count a census reports per minimal polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensusCount {
    /// Locally finite `(α, F)` pairs.
    Pairs,
    /// Distinct linear-conjugation classes met by those pairs.
    Classes,
}

impl CensusCount {
    /// The convention of the published table for `F_q`: classes over `F_2`,
    /// pairs otherwise.
    pub fn published(q: u64) -> Self {
        if q == 2 {
            CensusCount::Classes
        } else {
            CensusCount::Pairs
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CensusCount::Pairs => "pairs",
            CensusCount::Classes => "classes",
        }
    }
}

impl std::str::FromStr for CensusCount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pairs" => Ok(CensusCount::Pairs),
            "classes" => Ok(CensusCount::Classes),
            _ => Err(format!("unknown census count `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub min_poly: UniPoly,
    pub order: u64,
    /// Locally finite `(α, F)` pairs with this minimal polynomial.
    pub pairs: u64,
    /// Distinct linear-conjugation classes among those pairs, when counted.
    pub conjugacy_classes: Option<u64>,
    /// First locally finite pair in (representative, automorphism) order.
    pub example: PolyMap,
}

impl CensusRow {
    pub fn min_poly_text(&self) -> String {
        self.min_poly.to_text("T")
    }

    pub fn class_count(&self, count: CensusCount) -> u64 {
        match count {
            CensusCount::Pairs => self.pairs,
            CensusCount::Classes => self.conjugacy_classes.expect("classes were counted"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Census {
    pub field: Arc<FieldCtx>,
    pub degree: u32,
    pub count: CensusCount,
    pub representatives: usize,
    pub automorphisms: usize,
    /// Locally finite pairs.
    pub locally_finite: u64,
    /// Distinct linear-conjugation classes of locally finite maps.
    pub conjugacy_classes: Option<u64>,
    pub undecided: u64,
    pub rows: Vec<CensusRow>,
}

impl Census {
    pub fn candidates(&self) -> u64 {
        (self.representatives * self.automorphisms) as u64
    }

    pub fn max_min_poly_degree(&self) -> usize {
        self.rows.iter().filter_map(|r| r.min_poly.degree()).max().unwrap_or(0)
    }

    pub fn row(&self, min_poly: &UniPoly) -> Option<&CensusRow> {
        self.rows.iter().find(|r| &r.min_poly == min_poly)
    }

    /// Total of the reported count.
    pub fn total(&self) -> u64 {
        match self.count {
            CensusCount::Pairs => self.locally_finite,
            CensusCount::Classes => self.conjugacy_classes.expect("classes were counted"),
        }
    }
}

fn min_poly_cmp(a: &UniPoly, b: &UniPoly) -> Ordering {
    a.table_cmp(b)
}

/// Classifies `α ∘ F` for every representative `α` and automorphism `F`,
/// counting pairs, and with [`CensusCount::Classes`] also the conjugacy
/// classes they meet.
pub fn census_of(reps: &[LinearMap], autos: &[PolyMap], caps: &LfpeCaps, count: CensusCount) -> Result<Census, LfpeError> {
    let Some(first) = autos.first() else {
        return Err(LfpeError::UnsupportedDegree(0));
    };
    let ring = first.ring().clone();
    let field = ring.field().clone();
    let degree = autos.iter().map(PolyMap::degree).max().unwrap_or(1);
    let alphas: Vec<PolyMap> = reps.iter().map(|a| a.to_polymap(&ring)).collect();
    let pairs: Vec<(usize, usize)> = (0..alphas.len()).flat_map(|a| (0..autos.len()).map(move |f| (a, f))).collect();
    let verdicts: Vec<(usize, LfpeVerdict)> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(a, f))| {
            let g = alphas[a].compose(&autos[f], ring.cap()).expect("affine composition keeps the degree");
            (idx, analyze_automorphism(&g, caps))
        })
        .collect();
    let compose = |idx: usize| {
        let (a, f) = pairs[idx];
        alphas[a].compose(&autos[f], ring.cap()).expect("affine composition keeps the degree")
    };
    let lf: Vec<(usize, u64, UniPoly)> = verdicts
        .iter()
        .filter_map(|(idx, v)| match v {
            LfpeVerdict::LocallyFinite { order, min_poly } => Some((*idx, *order, min_poly.clone())),
            _ => None,
        })
        .collect();
    let undecided = verdicts.iter().filter(|(_, v)| matches!(v, LfpeVerdict::Undecided(_))).count() as u64;
    // Every conjugacy class of locally finite maps meets some α ∘ F, so
    // canonical keys of the pairs enumerate the classes.
    let keys: Vec<Option<Vec<u8>>> = match count {
        CensusCount::Pairs => vec![None; lf.len()],
        CensusCount::Classes => {
            let conj = Conjugator::new(&ring, degree);
            lf.par_iter().map(|(idx, _, _)| Some(conj.canonical(&compose(*idx)))).collect()
        }
    };
    let mut rows: BTreeMap<Vec<Elem>, (UniPoly, u64, u64, usize, BTreeSet<Vec<u8>>)> = BTreeMap::new();
    for ((idx, order, min_poly), key) in lf.iter().zip(keys) {
        let e = rows.entry(min_poly.coeffs().to_vec()).or_insert_with(|| (min_poly.clone(), *order, 0, *idx, BTreeSet::new()));
        e.2 += 1;
        e.3 = e.3.min(*idx);
        e.4.extend(key);
    }
    let classes = count == CensusCount::Classes;
    let mut all_keys = BTreeSet::new();
    let mut rows: Vec<CensusRow> = rows
        .into_values()
        .map(|(min_poly, order, pairs, idx, keys)| {
            let conjugacy_classes = classes.then_some(keys.len() as u64);
            all_keys.extend(keys);
            CensusRow { min_poly, order, pairs, conjugacy_classes, example: compose(idx) }
        })
        .collect();
    rows.sort_by(|a, b| min_poly_cmp(&a.min_poly, &b.min_poly));
    Ok(Census {
        field,
        degree,
        count,
        representatives: reps.len(),
        automorphisms: autos.len(),
        locally_finite: lf.len() as u64,
        conjugacy_classes: classes.then_some(all_keys.len() as u64),
        undecided,
        rows,
    })
}

/// Census over the degree-2 identity-affine automorphisms of `F_q^3`.
pub fn lfpe_census(field: &Arc<FieldCtx>, degree: u32, caps: &LfpeCaps, count: CensusCount) -> Result<Census, LfpeError> {
    use crate::scan::{scan, Predicate, ScanConfig, Shape};
    if degree != 2 {
        return Err(LfpeError::UnsupportedDegree(degree));
    }
    let cfg = ScanConfig::new(Shape::IdentityAffineDeg2, field.p(), field.r(), Predicate::Automorphism);
    let (space, recs) = scan(&cfg)?;
    let autos: Vec<PolyMap> = recs.iter().map(|r| space.map_from_coeffs(&r.coeffs)).collect();
    let reps = crate::orbits::affine_conjugacy_orbits(field, 3);
    census_of(&reps, &autos, caps, count)
}

#[cfg(test)]
mod tests;
