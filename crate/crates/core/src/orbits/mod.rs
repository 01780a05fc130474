//! `GL_n` and `Aff_n` over small fields, canonical forms under linear
//! conjugation, and tame-equivalence closure.

mod closure;
mod sparse;
mod unionfind;

use std::collections::HashSet;
use std::sync::Arc;

pub use closure::{
    tame_closure, tame_closure_staged, ClassInfo, ClassPartition, ClosureError, ClosureParams, DetClassKind, Invariants, Move, MoveSide,
};
pub use unionfind::UnionFind;

use crate::ff::{Elem, FieldCtx};
use crate::linalg;
use crate::mpoly::{MultiPoly, PolyRing};
use crate::par::*;
use crate::polymap::PolyMap;

/// Largest dimension handled by [`LinearMap`].
pub const MAX_DIM: usize = 4;

/// `x ↦ M x + t`; `t = 0` for elements of `GL_n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearMap {
    n: u8,
    m: [Elem; MAX_DIM * MAX_DIM],
    t: [Elem; MAX_DIM],
}

impl std::fmt::Debug for LinearMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LinearMap({:?}, {:?})", self.rows(), self.translation())
    }
}

impl LinearMap {
    pub fn from_rows(rows: &[Vec<Elem>], t: &[Elem]) -> Self {
        let n = rows.len();
        assert!(n <= MAX_DIM);
        let mut m = [0; MAX_DIM * MAX_DIM];
        for (i, r) in rows.iter().enumerate() {
            m[i * n..(i + 1) * n].copy_from_slice(&r[..n]);
        }
        let mut tt = [0; MAX_DIM];
        tt[..t.len()].copy_from_slice(t);
        Self { n: n as u8, m, t: tt }
    }

    pub fn identity(n: usize) -> Self {
        let rows: Vec<Vec<Elem>> = (0..n).map(|i| (0..n).map(|j| Elem::from(i == j)).collect()).collect();
        Self::from_rows(&rows, &[])
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn entry(&self, i: usize, j: usize) -> Elem {
        self.m[i * self.n() + j]
    }

    pub fn rows(&self) -> Vec<Vec<Elem>> {
        let n = self.n();
        (0..n).map(|i| self.m[i * n..(i + 1) * n].to_vec()).collect()
    }

    pub fn translation(&self) -> &[Elem] {
        &self.t[..self.n()]
    }

    pub fn linear_part(&self) -> Self {
        Self { t: [0; MAX_DIM], ..*self }
    }

    pub fn with_translation(&self, t: &[Elem]) -> Self {
        let mut out = *self;
        out.t = [0; MAX_DIM];
        out.t[..t.len()].copy_from_slice(t);
        out
    }

    pub fn apply(&self, x: &[Elem], f: &FieldCtx) -> Vec<Elem> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).fold(self.t[i], |acc, j| f.add(acc, f.mul(self.entry(i, j), x[j]))))
            .collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self, f: &FieldCtx) -> Self {
        let n = self.n();
        let mut out = Self { n: self.n, m: [0; MAX_DIM * MAX_DIM], t: [0; MAX_DIM] };
        for i in 0..n {
            for j in 0..n {
                out.m[i * n + j] = (0..n).fold(0, |acc, k| f.add(acc, f.mul(self.entry(i, k), other.entry(k, j))));
            }
            out.t[i] = (0..n).fold(self.t[i], |acc, k| f.add(acc, f.mul(self.entry(i, k), other.t[k])));
        }
        out
    }

    pub fn inverse(&self, f: &FieldCtx) -> Option<Self> {
        let inv = linalg::invert(&self.rows(), f)?;
        let lin = Self::from_rows(&inv, &[]);
        let shift: Vec<Elem> = lin.apply(self.translation(), f).into_iter().map(|v| f.neg(v)).collect();
        Some(lin.with_translation(&shift))
    }

    pub fn is_invertible(&self, f: &FieldCtx) -> bool {
        linalg::det(&self.rows(), f) != 0
    }

    /// `L⁻¹ ∘ self ∘ L` for `L` in `GL_n` given with its inverse.
    pub fn conjugate(&self, l: &Self, l_inv: &Self, f: &FieldCtx) -> Self {
        l_inv.compose(&self.compose(l, f), f)
    }

    pub fn to_polymap(&self, ring: &PolyRing) -> PolyMap {
        PolyMap::affine(ring, &self.rows(), self.translation())
    }

    pub fn from_polymap(map: &PolyMap) -> Option<Self> {
        if map.degree() > 1 || map.n() > MAX_DIM {
            return None;
        }
        Some(Self::from_rows(&map.linear_matrix(), &map.translation()))
    }

    /// Bytes in map-encoding order: per component the constant, then the
    /// linear coefficients.
    pub fn encode(&self) -> Vec<u8> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n + 1));
        for i in 0..n {
            out.push(self.t[i]);
            out.extend_from_slice(&self.m[i * n..(i + 1) * n]);
        }
        out
    }
}

/// Closed-form `(|GL_n(F_q)|, |Aff_n(F_q)|)`.
pub fn count_groups(q: u64, n: u32) -> (u128, u128) {
    let qn = (q as u128).pow(n);
    let lin = (0..n).fold(1u128, |acc, k| acc * (qn - (q as u128).pow(k)));
    (lin, lin * qn)
}

/// Every invertible matrix once, entries read row-major as base-`q`
/// digits in ascending order.
pub fn enum_gl(f: &FieldCtx, n: usize) -> Vec<LinearMap> {
    let q = f.q();
    let cells = n * n;
    let total = q.pow(cells as u32);
    let mut out = Vec::new();
    let mut digits = vec![0 as Elem; cells];
    for idx in 0..total {
        let mut v = idx;
        for d in digits.iter_mut().rev() {
            *d = (v % q) as Elem;
            v /= q;
        }
        let rows: Vec<Vec<Elem>> = digits.chunks(n).map(|r| r.to_vec()).collect();
        if linalg::det(&rows, f) != 0 {
            out.push(LinearMap::from_rows(&rows, &[]));
        }
    }
    out
}

/// All `(M, t)` with `M` invertible: matrices in [`enum_gl`] order, each
/// followed by every translation in base-`q` order.
pub fn enum_affine(f: &FieldCtx, n: usize) -> Vec<LinearMap> {
    let gl = enum_gl(f, n);
    let q = f.q();
    let shifts: Vec<Vec<Elem>> = (0..q.pow(n as u32))
        .map(|mut v| {
            let mut t = vec![0; n];
            for d in t.iter_mut().rev() {
                *d = (v % q) as Elem;
                v /= q;
            }
            t
        })
        .collect();
    gl.iter().flat_map(|l| shifts.iter().map(move |t| l.with_translation(t))).collect()
}

/// Precomputed linear substitutions `m ↦ m ∘ L` for every `L` in a group,
/// on all monomials up to a degree.
pub struct Conjugator {
    ring: PolyRing,
    deg: u32,
    group: Vec<(LinearMap, LinearMap)>,
    /// `images[g][k]`: sparse coefficients of monomial `k` composed with `L_g`.
    images: Vec<Vec<Vec<(u16, Elem)>>>,
}

impl Conjugator {
    pub fn new(ring: &PolyRing, deg: u32) -> Self {
        let f = ring.field().clone();
        let gl = enum_gl(&f, ring.n());
        Self::with_group(ring, deg, gl)
    }

    pub fn with_group(ring: &PolyRing, deg: u32, group: Vec<LinearMap>) -> Self {
        let f = ring.field().clone();
        let len = ring.basis().size_upto(deg);
        let monos: Vec<MultiPoly> = (0..len)
            .map(|k| {
                let mut p = MultiPoly::zero();
                p.set(k, 1);
                p
            })
            .collect();
        let group: Vec<(LinearMap, LinearMap)> =
            group.into_iter().map(|l| (l, l.inverse(&f).expect("group element"))).collect();
        let images = group
            .par_iter()
            .map(|(l, _)| {
                let lp = l.to_polymap(ring);
                let (vals, _) = ring.subst_many(&monos, lp.comps(), None).expect("degree preserved");
                vals.into_iter()
                    .map(|v| v.support().map(|(k, c)| (k as u16, c)).collect())
                    .collect()
            })
            .collect();
        Self { ring: ring.clone(), deg, group, images }
    }

    pub fn group(&self) -> &[(LinearMap, LinearMap)] {
        &self.group
    }

    pub fn deg(&self) -> u32 {
        self.deg
    }

    /// Encoding of `L_g⁻¹ ∘ F ∘ L_g` at this conjugator's degree.
    pub fn conjugate_encoded(&self, map: &PolyMap, g: usize, out: &mut Vec<u8>) {
        let f = self.ring.field();
        let n = self.ring.n();
        let len = self.ring.basis().size_upto(self.deg);
        let (_, linv) = &self.group[g];
        let imgs = &self.images[g];
        let mut composed = vec![0 as Elem; n * len];
        for (j, c) in map.comps().iter().enumerate() {
            let row = &mut composed[j * len..(j + 1) * len];
            for (k, a) in c.support() {
                for &(t, b) in &imgs[k] {
                    row[t as usize] = f.add(row[t as usize], f.mul(a, b));
                }
            }
        }
        out.clear();
        out.resize(n * len, 0);
        for i in 0..n {
            for j in 0..n {
                let a = linv.entry(i, j);
                if a == 0 {
                    continue;
                }
                for k in 0..len {
                    let v = composed[j * len + k];
                    if v != 0 {
                        out[i * len + k] = f.add(out[i * len + k], f.mul(a, v));
                    }
                }
            }
        }
    }

    pub fn conjugate(&self, map: &PolyMap, g: usize) -> PolyMap {
        let mut buf = Vec::new();
        self.conjugate_encoded(map, g, &mut buf);
        PolyMap::decode(&self.ring, self.deg, &buf)
    }

    /// Lexicographically least encoding over the conjugation orbit.
    pub fn canonical(&self, map: &PolyMap) -> Vec<u8> {
        assert!(map.degree() <= self.deg);
        let mut best = map.encode(self.deg);
        let mut buf = Vec::new();
        for g in 0..self.group.len() {
            self.conjugate_encoded(map, g, &mut buf);
            if buf < best {
                std::mem::swap(&mut best, &mut buf);
            }
        }
        best
    }

    pub fn canonical_map(&self, map: &PolyMap) -> PolyMap {
        PolyMap::decode(&self.ring, self.deg, &self.canonical(map))
    }

    pub fn orbit_size(&self, map: &PolyMap) -> usize {
        let mut seen = HashSet::new();
        let mut buf = Vec::new();
        for g in 0..self.group.len() {
            self.conjugate_encoded(map, g, &mut buf);
            seen.insert(buf.clone());
        }
        seen.len()
    }
}

/// Canonical key of `map` under `GL_n(F_q)`-conjugation.
pub fn conj_canonical(map: &PolyMap) -> Vec<u8> {
    Conjugator::new(map.ring(), map.degree().max(1)).canonical(map)
}

/// One representative per orbit of `Aff_n(F_q)` under `GL_n(F_q)`
/// conjugation: the orbit element with the least encoding, listed in
/// ascending encoding order.
pub fn affine_conjugacy_orbits(f: &Arc<FieldCtx>, n: usize) -> Vec<LinearMap> {
    let q = f.q();
    let gl: Vec<(LinearMap, LinearMap)> = enum_gl(f, n).into_iter().map(|l| (l, l.inverse(f).unwrap())).collect();
    let index = |a: &LinearMap| a.encode().iter().fold(0usize, |acc, &d| acc * q + d as usize);
    let total = q.pow((n * (n + 1)) as u32);
    let mut seen = vec![false; total];
    let mut reps = Vec::new();
    for a in enum_affine(f, n) {
        if seen[index(&a)] {
            continue;
        }
        let mut best = a;
        for (l, li) in &gl {
            let c = a.conjugate(l, li, f);
            let k = index(&c);
            if !seen[k] {
                seen[k] = true;
                if c.encode() < best.encode() {
                    best = c;
                }
            }
        }
        reps.push(best);
    }
    reps.sort_by_key(|a| a.encode());
    reps
}

/// Affine maps together with the elementary maps `x_i ↦ x_i + c·m` for
/// every monomial `m` of degree `2..=d` in the other variables and `c ≠ 0`.
/// Elementary maps of degree at most one are affine and appear once.
pub fn tame_generators(ring: &PolyRing, d: u32) -> Vec<PolyMap> {
    let f = ring.field().clone();
    let mut out: Vec<PolyMap> = enum_affine(&f, ring.n()).iter().map(|a| a.to_polymap(ring)).collect();
    out.extend(elementary_maps(ring, 2, d));
    out
}

/// Elementary maps `x_i ↦ x_i + c·m` with `lo <= deg m <= hi`.
pub fn elementary_maps(ring: &PolyRing, lo: u32, hi: u32) -> Vec<PolyMap> {
    let f = ring.field().clone();
    let n = ring.n();
    let basis = ring.basis();
    let mut out = Vec::new();
    for i in 0..n {
        for g in lo..=hi {
            for k in basis.grade_range(g) {
                if basis.exps(k)[i] != 0 {
                    continue;
                }
                for c in f.nonzero() {
                    let mut comps: Vec<MultiPoly> = (0..n).map(|v| ring.var(v)).collect();
                    comps[i].set(k, c);
                    out.push(PolyMap::new(ring.clone(), comps).expect("within cap"));
                }
            }
        }
    }
    out
}

/// One orbit of a map list under linear conjugation.
#[derive(Clone, Debug)]
pub struct LinearClass {
    pub key: Vec<u8>,
    pub representative: PolyMap,
    /// Indices into the input list, ascending.
    pub members: Vec<usize>,
}

impl LinearClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Groups `maps` by [`Conjugator::canonical`]; classes come in ascending
/// key order and the representative is the canonical form.
pub fn linear_classes(maps: &[PolyMap]) -> Vec<LinearClass> {
    let Some(first) = maps.first() else {
        return Vec::new();
    };
    let deg = maps.iter().map(PolyMap::degree).max().unwrap_or(1).max(1);
    let conj = Conjugator::new(first.ring(), deg);
    let keys: Vec<Vec<u8>> = maps.par_iter().map(|m| conj.canonical(m)).collect();
    let mut groups: std::collections::BTreeMap<Vec<u8>, Vec<usize>> = Default::default();
    for (i, k) in keys.into_iter().enumerate() {
        groups.entry(k).or_default().push(i);
    }
    groups
        .into_iter()
        .map(|(key, members)| LinearClass { representative: PolyMap::decode(first.ring(), deg, &key), key, members })
        .collect()
}

#[cfg(test)]
mod tests;
