//! Formal multivariate polynomials over `F_q` on a dense graded monomial basis.
//!
//! Monomials in `n` variables are indexed grade by grade (total degree
//! ascending); inside one grade, exponent tuples are ordered lexicographically
//! with the first variable most significant and larger exponents first, so
//! for `n = 3` the basis starts `1, x, y, z, x^2, xy, xz, y^2, yz, z^2, x^3, ...`.
//! Because grades come first, the monomials of degree `<= d` are a prefix of
//! the basis for every `d`, and a polynomial is stored as that prefix with
//! trailing zeros trimmed.
//!
//! Polynomials are formal objects: `x` and `x^q` are different polynomials
//! even though they induce the same function on `F_q`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::ff::{Elem, FieldCtx, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("degree {degree} exceeds the cap {cap}")]
    CapExceeded { degree: u32, cap: u32 },
    #[error("variable index {index} out of range for {n} variables")]
    VariableOutOfRange { index: usize, n: usize },
    #[error("expected {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

const NONE: u32 = u32::MAX;

/// Index table for all monomials of total degree `<= cap` in `n` variables.
#[derive(Debug)]
pub struct MonomialBasis {
    n: usize,
    cap: u32,
    exps: Vec<u8>,
    grades: Vec<u8>,
    grade_start: Vec<usize>,
    keys: Vec<u32>,
    by_key: Vec<u32>,
    radix: u32,
    /// For index `k > 0`: the first variable with a positive exponent and the
    /// index of the monomial divided by that variable.
    parent: Vec<(u8, u32)>,
}

impl MonomialBasis {
    fn build(n: usize, cap: u32) -> Self {
        assert!(n >= 1 && n <= 8, "unsupported variable count {n}");
        let radix = cap + 1;
        let mut exps = Vec::new();
        let mut grades = Vec::new();
        let mut grade_start = Vec::with_capacity(cap as usize + 2);
        for g in 0..=cap {
            grade_start.push(grades.len());
            let mut cur = vec![0u8; n];
            push_grade(&mut cur, 0, g, &mut exps, &mut grades);
        }
        grade_start.push(grades.len());

        let size = grades.len();
        let mut keys = Vec::with_capacity(size);
        let mut by_key = vec![NONE; (radix as usize).pow(n as u32)];
        for k in 0..size {
            let key = exps[k * n..(k + 1) * n].iter().fold(0u32, |acc, &e| acc * radix + e as u32);
            keys.push(key);
            by_key[key as usize] = k as u32;
        }
        let mut parent = vec![(0u8, 0u32); size];
        for (k, slot) in parent.iter_mut().enumerate().skip(1) {
            let e = &exps[k * n..(k + 1) * n];
            let v = e.iter().position(|&x| x > 0).unwrap();
            let pkey = keys[k] - radix.pow((n - 1 - v) as u32);
            *slot = (v as u8, by_key[pkey as usize]);
        }
        Self { n, cap, exps, grades, grade_start, keys, by_key, radix, parent }
    }

    /// Shared basis for `(n, cap)`; built once per process.
    pub fn shared(n: usize, cap: u32) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<MonomialBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap();
        guard.entry((n, cap)).or_insert_with(|| Arc::new(Self::build(n, cap))).clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.grades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }

    /// Number of monomials of degree `<= d`.
    pub fn size_upto(&self, d: u32) -> usize {
        self.grade_start[d.min(self.cap) as usize + 1]
    }

    /// Index range of the monomials of exact degree `g`.
    pub fn grade_range(&self, g: u32) -> std::ops::Range<usize> {
        self.grade_start[g as usize]..self.grade_start[g as usize + 1]
    }

    pub fn exps(&self, k: usize) -> &[u8] {
        &self.exps[k * self.n..(k + 1) * self.n]
    }

    pub fn grade(&self, k: usize) -> u32 {
        self.grades[k] as u32
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        if exps.len() != self.n || exps.iter().map(|&e| e as u32).sum::<u32>() > self.cap {
            return None;
        }
        let key = exps.iter().fold(0u32, |acc, &e| acc * self.radix + e as u32);
        Some(self.by_key[key as usize] as usize)
    }

    /// Index of the product of monomials `a` and `b`; the caller guarantees
    /// `grade(a) + grade(b) <= cap`.
    #[inline]
    pub fn product_index(&self, a: usize, b: usize) -> usize {
        self.by_key[(self.keys[a] + self.keys[b]) as usize] as usize
    }

    pub(crate) fn parent(&self, k: usize) -> (usize, usize) {
        let (v, p) = self.parent[k];
        (v as usize, p as usize)
    }
}

fn push_grade(cur: &mut Vec<u8>, var: usize, left: u32, exps: &mut Vec<u8>, grades: &mut Vec<u8>) {
    let n = cur.len();
    if var == n - 1 {
        cur[var] = left as u8;
        exps.extend_from_slice(cur);
        grades.push(cur.iter().map(|&e| e as u32).sum::<u32>() as u8);
        return;
    }
    for e in (0..=left).rev() {
        cur[var] = e as u8;
        push_grade(cur, var + 1, left - e, exps, grades);
    }
    cur[var] = 0;
}

/// A formal polynomial: dense coefficients on a [`MonomialBasis`] prefix.
///
/// Carries no context; arithmetic goes through a [`PolyRing`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiPoly {
    coeffs: Vec<Elem>,
}

impl MultiPoly {
    pub fn from_coeffs(mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Elem {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Nonzero `(index, coefficient)` pairs.
    pub fn support(&self) -> impl Iterator<Item = (usize, Elem)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(k, &c)| (k, c))
    }

    pub fn set(&mut self, k: usize, c: Elem) {
        if k >= self.coeffs.len() {
            if c == 0 {
                return;
            }
            self.coeffs.resize(k + 1, 0);
        }
        self.coeffs[k] = c;
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }
}

/// Polynomial ring `F_q[x_1..x_n]` restricted to degree `<= cap`.
#[derive(Debug, Clone)]
pub struct PolyRing {
    field: Arc<FieldCtx>,
    basis: Arc<MonomialBasis>,
}

/// Default basis caps: large enough for every composition the tools perform.
pub fn default_cap(n: usize) -> u32 {
    match n {
        0..=3 => 64,
        4 => 24,
        _ => 12,
    }
}

impl PolyRing {
    pub fn new(field: Arc<FieldCtx>, n: usize) -> Self {
        Self::with_cap(field, n, default_cap(n))
    }

    pub fn with_cap(field: Arc<FieldCtx>, n: usize, cap: u32) -> Self {
        Self { field, basis: MonomialBasis::shared(n, cap) }
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        &self.field
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.basis.n
    }

    pub fn cap(&self) -> u32 {
        self.basis.cap
    }

    pub fn one(&self) -> MultiPoly {
        MultiPoly::from_coeffs(vec![1])
    }

    pub fn constant(&self, c: Elem) -> MultiPoly {
        MultiPoly::from_coeffs(vec![c])
    }

    /// The coordinate function `x_i` (0-based).
    pub fn var(&self, i: usize) -> MultiPoly {
        let mut v = vec![0; 1 + self.n()];
        v[1 + i] = 1;
        MultiPoly::from_coeffs(v)
    }

    pub fn monomial(&self, c: Elem, exps: &[u8]) -> Result<MultiPoly, PolyError> {
        let degree = exps.iter().map(|&e| e as u32).sum();
        let k = self.basis.index_of(exps).ok_or(PolyError::CapExceeded { degree, cap: self.cap() })?;
        let mut p = MultiPoly::zero();
        p.set(k, c);
        Ok(p)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self, a: &MultiPoly) -> Option<u32> {
        a.coeffs.len().checked_sub(1).map(|k| self.basis.grade(k))
    }

    pub fn add(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        let f = &*self.field;
        let (long, short) = if a.coeffs.len() >= b.coeffs.len() { (a, b) } else { (b, a) };
        let mut out = long.coeffs.clone();
        for (o, &s) in out.iter_mut().zip(&short.coeffs) {
            *o = f.add(*o, s);
        }
        MultiPoly::from_coeffs(out)
    }

    pub fn neg(&self, a: &MultiPoly) -> MultiPoly {
        MultiPoly { coeffs: a.coeffs.iter().map(|&c| self.field.neg(c)).collect() }
    }

    pub fn sub(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &MultiPoly, c: Elem) -> MultiPoly {
        MultiPoly::from_coeffs(a.coeffs.iter().map(|&x| self.field.mul(x, c)).collect())
    }

    /// Keeps only the terms of degree `<= d`.
    pub fn truncate(&self, a: &MultiPoly, d: u32) -> MultiPoly {
        let len = self.basis.size_upto(d).min(a.coeffs.len());
        MultiPoly::from_coeffs(a.coeffs[..len].to_vec())
    }

    /// Homogeneous component of degree `g`.
    pub fn homogeneous_part(&self, a: &MultiPoly, g: u32) -> MultiPoly {
        if g > self.cap() {
            return MultiPoly::zero();
        }
        let range = self.basis.grade_range(g);
        let mut out = vec![0; range.end.min(a.coeffs.len())];
        for k in range {
            if k < a.coeffs.len() {
                out[k] = a.coeffs[k];
            }
        }
        MultiPoly::from_coeffs(out)
    }

    /// Exact product; fails when the degree would exceed the ring cap.
    pub fn mul(&self, a: &MultiPoly, b: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.mul_inner(a, b, None).map(|(p, _)| p)
    }

    /// Product with every term of degree `> cap` dropped; the flag reports
    /// whether anything was dropped.
    pub fn mul_truncated(&self, a: &MultiPoly, b: &MultiPoly, cap: u32) -> (MultiPoly, bool) {
        self.mul_inner(a, b, Some(cap)).expect("truncated products cannot overflow")
    }

    fn mul_inner(&self, a: &MultiPoly, b: &MultiPoly, trunc: Option<u32>) -> Result<(MultiPoly, bool), PolyError> {
        let (Some(da), Some(db)) = (self.degree(a), self.degree(b)) else {
            return Ok((MultiPoly::zero(), false));
        };
        let limit = match trunc {
            Some(t) => t.min(self.cap()),
            None => {
                if da + db > self.cap() {
                    return Err(PolyError::CapExceeded { degree: da + db, cap: self.cap() });
                }
                self.cap()
            }
        };
        let basis = &*self.basis;
        let out_deg = (da + db).min(limit);
        let len = basis.size_upto(out_deg);
        let mut truncated = false;
        let tb: Vec<(usize, u32, Elem)> = b.support().map(|(k, c)| (k, basis.grade(k), c)).collect();
        let f = &*self.field;
        let coeffs = if f.is_prime_field() {
            let p = f.p();
            let mut acc = vec![0u32; len];
            for (ka, ca) in a.support() {
                let ga = basis.grade(ka);
                for &(kb, gb, cb) in &tb {
                    if ga + gb > limit {
                        truncated = true;
                        continue;
                    }
                    acc[basis.product_index(ka, kb)] += ca as u32 * cb as u32;
                }
            }
            acc.into_iter().map(|v| (v % p) as Elem).collect()
        } else {
            let mut acc = vec![0 as Elem; len];
            for (ka, ca) in a.support() {
                let ga = basis.grade(ka);
                for &(kb, gb, cb) in &tb {
                    if ga + gb > limit {
                        truncated = true;
                        continue;
                    }
                    let k = basis.product_index(ka, kb);
                    acc[k] = f.add(acc[k], f.mul(ca, cb));
                }
            }
            acc
        };
        Ok((MultiPoly::from_coeffs(coeffs), truncated))
    }

    pub fn pow(&self, a: &MultiPoly, e: u32) -> Result<MultiPoly, PolyError> {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, a)?;
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to `x_i` (0-based).
    pub fn partial(&self, a: &MultiPoly, i: usize) -> Result<MultiPoly, PolyError> {
        let n = self.n();
        if i >= n {
            return Err(PolyError::VariableOutOfRange { index: i, n });
        }
        let f = &*self.field;
        let mut out = MultiPoly::zero();
        let mut e = vec![0u8; n];
        for (k, c) in a.support() {
            e.copy_from_slice(self.basis.exps(k));
            if e[i] == 0 {
                continue;
            }
            let mult = f.from_int(e[i] as i64);
            if mult == 0 {
                continue;
            }
            e[i] -= 1;
            let idx = self.basis.index_of(&e).unwrap();
            let cur = out.coeff(idx);
            out.set(idx, f.add(cur, f.mul(c, mult)));
        }
        Ok(out)
    }

    /// Formal substitution `a(maps_1, ..., maps_n)`, exact. Fails with
    /// `CapExceeded` if the result or any intermediate term exceeds `cap`
    /// (and the ring cap).
    pub fn subst(&self, a: &MultiPoly, maps: &[MultiPoly], cap: u32) -> Result<MultiPoly, PolyError> {
        let out = self.subst_inner(a, maps, None)?.0;
        if let Some(d) = self.degree(&out) {
            if d > cap {
                return Err(PolyError::CapExceeded { degree: d, cap });
            }
        }
        Ok(out)
    }

    /// Substitution with every term of degree `> cap` dropped.
    pub fn subst_truncated(&self, a: &MultiPoly, maps: &[MultiPoly], cap: u32) -> (MultiPoly, bool) {
        self.subst_inner(a, maps, Some(cap)).expect("truncated substitution cannot overflow")
    }

    fn subst_inner(
        &self,
        a: &MultiPoly,
        maps: &[MultiPoly],
        trunc: Option<u32>,
    ) -> Result<(MultiPoly, bool), PolyError> {
        self.subst_many(std::slice::from_ref(a), maps, trunc).map(|(mut v, t)| (v.pop().unwrap(), t))
    }

    /// Substitutes the same maps into several polynomials, sharing the
    /// monomial values.
    pub(crate) fn subst_many(
        &self,
        polys: &[MultiPoly],
        maps: &[MultiPoly],
        trunc: Option<u32>,
    ) -> Result<(Vec<MultiPoly>, bool), PolyError> {
        let n = self.n();
        if maps.len() != n {
            return Err(PolyError::ArityMismatch { expected: n, got: maps.len() });
        }
        let basis = &*self.basis;
        let len = polys.iter().map(|p| p.coeffs.len()).max().unwrap_or(0);
        if len == 0 {
            return Ok((vec![MultiPoly::zero(); polys.len()], false));
        }
        let mut needed = vec![false; len];
        for p in polys {
            for (k, _) in p.support() {
                needed[k] = true;
            }
        }
        for k in (1..len).rev() {
            if needed[k] {
                let (_, parent) = basis.parent(k);
                needed[parent] = true;
            }
        }
        let mut truncated = false;
        let mut values: Vec<Option<MultiPoly>> = vec![None; len];
        values[0] = Some(self.one());
        for k in 1..len {
            if !needed[k] {
                continue;
            }
            let (v, parent) = basis.parent(k);
            let base = values[parent].as_ref().unwrap();
            let prod = match trunc {
                Some(t) => {
                    let (p, tr) = self.mul_truncated(base, &maps[v], t);
                    truncated |= tr;
                    p
                }
                None => self.mul(base, &maps[v])?,
            };
            values[k] = Some(prod);
        }
        let f = &*self.field;
        let mut outs = Vec::with_capacity(polys.len());
        for p in polys {
            let out_len = p
                .support()
                .map(|(k, _)| values[k].as_ref().unwrap().coeffs.len())
                .max()
                .unwrap_or(0);
            let mut acc = vec![0 as Elem; out_len];
            for (k, c) in p.support() {
                for (slot, &v) in acc.iter_mut().zip(&values[k].as_ref().unwrap().coeffs) {
                    if v != 0 {
                        *slot = f.add(*slot, f.mul(c, v));
                    }
                }
            }
            outs.push(MultiPoly::from_coeffs(acc));
        }
        Ok((outs, truncated))
    }

    /// Value at a point whose coordinates live in `ext`, which is either the
    /// ring's own field or an extension of a prime base field.
    pub fn eval(&self, a: &MultiPoly, point: &[Elem], ext: &FieldCtx) -> Result<Elem, PolyError> {
        let n = self.n();
        if point.len() != n {
            return Err(PolyError::ArityMismatch { expected: n, got: point.len() });
        }
        if *ext != *self.field {
            if ext.p() != self.field.p() {
                return Err(FieldError::CharacteristicMismatch(self.field.p(), ext.p()).into());
            }
            if !self.field.is_prime_field() {
                return Err(FieldError::EmbeddingUnsupported.into());
            }
        }
        for &x in point {
            ext.check(x)?;
        }
        let deg = self.degree(a).unwrap_or(0) as u64;
        let powers: Vec<Vec<Elem>> = point
            .iter()
            .map(|&x| (0..=deg).map(|e| ext.pow(x, e)).collect())
            .collect();
        let mut acc = 0;
        for (k, c) in a.support() {
            let mut term = FieldCtx::embed_prime(&self.field, ext, c).unwrap_or(c);
            for (v, &e) in self.basis.exps(k).iter().enumerate() {
                term = ext.mul(term, powers[v][e as usize]);
            }
            acc = ext.add(acc, term);
        }
        Ok(acc)
    }

    /// `(exponents, coefficient)` for every nonzero term, basis order.
    pub fn terms<'a>(&'a self, a: &'a MultiPoly) -> impl Iterator<Item = (&'a [u8], Elem)> + 'a {
        a.support().map(move |(k, c)| (self.basis.exps(k), c))
    }

    /// Re-embeds a polynomial into a ring with more variables, the new
    /// variables placed after the existing ones.
    pub fn lift_to(&self, a: &MultiPoly, target: &PolyRing) -> Result<MultiPoly, PolyError> {
        let mut out = MultiPoly::zero();
        let mut e = vec![0u8; target.n()];
        for (exps, c) in self.terms(a) {
            e.fill(0);
            e[..exps.len()].copy_from_slice(exps);
            let degree = exps.iter().map(|&x| x as u32).sum();
            let k = target
                .basis
                .index_of(&e)
                .ok_or(PolyError::CapExceeded { degree, cap: target.cap() })?;
            out.set(k, c);
        }
        Ok(out)
    }
}
