use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{MapError, PolyMap};
use crate::ff::{Elem, FieldCtx, FieldError};
use crate::mpoly::{MultiPoly, PolyRing};

/// Point-by-point evaluation of maps with coefficients in a base field over
/// `(F_{q^ext_r})^n`. Points are indexed in base `Q = q^ext_r`, first
/// coordinate most significant.
#[derive(Debug)]
pub struct Evaluator {
    ext: Arc<FieldCtx>,
    n: usize,
    points: usize,
}

impl Evaluator {
    pub fn new(base: &Arc<FieldCtx>, ext_r: u32, n: usize) -> Result<Self, MapError> {
        let ext = if ext_r == 1 {
            base.clone()
        } else if !base.is_prime_field() {
            return Err(FieldError::EmbeddingUnsupported.into());
        } else {
            FieldCtx::new(base.p(), ext_r)?
        };
        let points = ext.q().checked_pow(n as u32).expect("point count overflow");
        Ok(Self { ext, n, points })
    }

    /// Cached evaluator for `(base, ext_r, n)`.
    pub fn shared(base: &Arc<FieldCtx>, ext_r: u32, n: usize) -> Result<Arc<Self>, MapError> {
        type Key = (u32, Vec<u32>, u32, usize);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Evaluator>>>> = OnceLock::new();
        let key = (base.p(), base.modulus().to_vec(), ext_r, n);
        let cache = CACHE.get_or_init(Default::default);
        if let Some(ev) = cache.lock().unwrap().get(&key) {
            return Ok(ev.clone());
        }
        let ev = Arc::new(Self::new(base, ext_r, n)?);
        cache.lock().unwrap().insert(key, ev.clone());
        Ok(ev)
    }

    pub fn ext(&self) -> &Arc<FieldCtx> {
        &self.ext
    }

    pub fn point_count(&self) -> usize {
        self.points
    }

    pub fn point(&self, mut idx: usize) -> Vec<Elem> {
        let q = self.ext.q();
        let mut pt = vec![0; self.n];
        for slot in pt.iter_mut().rev() {
            *slot = (idx % q) as Elem;
            idx /= q;
        }
        pt
    }

    pub fn index(&self, pt: &[Elem]) -> usize {
        pt.iter().fold(0, |acc, &x| acc * self.ext.q() + x as usize)
    }

    /// Values of the first `len` basis monomials at `pt`.
    fn monomial_values(&self, ring: &PolyRing, pt: &[Elem], len: usize, out: &mut Vec<Elem>) {
        let basis = ring.basis();
        out.clear();
        out.reserve(len);
        if len == 0 {
            return;
        }
        out.push(1);
        for k in 1..len {
            let (v, parent) = basis.parent(k);
            out.push(self.ext.mul(out[parent], pt[v]));
        }
    }

    fn dot(&self, p: &MultiPoly, vals: &[Elem]) -> Elem {
        let f = &*self.ext;
        p.coeffs().iter().zip(vals).fold(0, |acc, (&c, &v)| if c == 0 { acc } else { f.add(acc, f.mul(c, v)) })
    }

    pub fn eval_point(&self, map: &PolyMap, pt: &[Elem]) -> Vec<Elem> {
        let len = map.comps().iter().map(|c| c.coeffs().len()).max().unwrap_or(0);
        let mut vals = Vec::new();
        self.monomial_values(map.ring(), pt, len, &mut vals);
        map.comps().iter().map(|c| self.dot(c, &vals)).collect()
    }

    /// Image of every point, as point indices.
    pub fn image(&self, map: &PolyMap) -> Vec<u32> {
        assert_eq!(map.n(), self.n);
        let len = map.comps().iter().map(|c| c.coeffs().len()).max().unwrap_or(0);
        let q = self.ext.q();
        let mut vals = Vec::new();
        let mut out = Vec::with_capacity(self.points);
        for idx in 0..self.points {
            let pt = self.point(idx);
            self.monomial_values(map.ring(), &pt, len, &mut vals);
            let img = map.comps().iter().fold(0usize, |acc, c| acc * q + self.dot(c, &vals) as usize);
            out.push(img as u32);
        }
        out
    }

    /// Injectivity on the finite point set, stopping at the first collision.
    pub fn is_bijection(&self, map: &PolyMap) -> bool {
        assert_eq!(map.n(), self.n);
        let len = map.comps().iter().map(|c| c.coeffs().len()).max().unwrap_or(0);
        let q = self.ext.q();
        let mut seen = vec![0u64; self.points.div_ceil(64)];
        let mut vals = Vec::new();
        let mut pt = vec![0 as Elem; self.n];
        for _ in 0..self.points {
            self.monomial_values(map.ring(), &pt, len, &mut vals);
            let img = map.comps().iter().fold(0usize, |acc, c| acc * q + self.dot(c, &vals) as usize);
            let (w, b) = (img / 64, img % 64);
            if seen[w] >> b & 1 == 1 {
                return false;
            }
            seen[w] |= 1 << b;
            for slot in pt.iter_mut().rev() {
                *slot += 1;
                if (*slot as usize) < q {
                    break;
                }
                *slot = 0;
            }
        }
        true
    }

    /// Whether `p` vanishes at some point.
    pub fn has_zero(&self, p: &MultiPoly, ring: &PolyRing) -> bool {
        let len = p.coeffs().len();
        let mut vals = Vec::new();
        (0..self.points).any(|idx| {
            let pt = self.point(idx);
            self.monomial_values(ring, &pt, len, &mut vals);
            self.dot(p, &vals) == 0
        })
    }
}
