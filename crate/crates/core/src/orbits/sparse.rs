//! Sparse polynomial maps for the closure search, where states reach
//! degree 8 and dense composition at the matching cap is far too slow.
//! Exponents are packed one byte per variable.

use crate::ff::{Elem, FieldCtx};
use crate::linalg;
use crate::polymap::PolyMap;

pub(crate) type Mono = u32;

fn exp(m: Mono, i: usize) -> u32 {
    m >> (8 * i) & 0xff
}

pub(crate) fn mono_degree(m: Mono) -> u32 {
    (m & 0xff) + (m >> 8 & 0xff) + (m >> 16 & 0xff) + (m >> 24)
}

pub(crate) fn mono_from_exps(e: &[u8]) -> Mono {
    e.iter().enumerate().fold(0, |acc, (i, &x)| acc | (x as u32) << (8 * i))
}

pub(crate) fn unit(i: usize) -> Mono {
    1 << (8 * i)
}

type Poly = Vec<(Mono, Elem)>;

/// Sorts by monomial and sums duplicates, dropping zeros.
fn canonicalize(mut terms: Poly, f: &FieldCtx) -> Poly {
    terms.sort_unstable_by_key(|t| t.0);
    let mut out: Poly = Vec::with_capacity(terms.len());
    for (m, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == m => last.1 = f.add(last.1, c),
            _ => out.push((m, c)),
        }
        if out.last().is_some_and(|t| t.1 == 0) {
            out.pop();
        }
    }
    out
}

fn degree(p: &Poly) -> u32 {
    p.iter().map(|t| mono_degree(t.0)).max().unwrap_or(0)
}

fn mul(a: &Poly, b: &Poly, f: &FieldCtx) -> Poly {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &(ma, ca) in a {
        for &(mb, cb) in b {
            out.push((ma + mb, f.mul(ca, cb)));
        }
    }
    canonicalize(out, f)
}

/// Binomial coefficients mod `p`.
pub(crate) struct Binomials {
    rows: Vec<Vec<Elem>>,
}

impl Binomials {
    pub(crate) fn new(f: &FieldCtx, max: usize) -> Self {
        let mut rows: Vec<Vec<Elem>> = vec![vec![1]];
        for k in 1..=max {
            let prev = &rows[k - 1];
            let mut row = vec![1 as Elem; k + 1];
            for j in 1..k {
                row[j] = f.add(prev[j - 1], prev[j]);
            }
            rows.push(row);
        }
        Self { rows }
    }

    fn get(&self, k: u32, j: u32) -> Elem {
        self.rows[k as usize][j as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct SMap {
    pub(crate) comps: Vec<Poly>,
}

impl SMap {
    pub(crate) fn from_polymap(map: &PolyMap) -> Self {
        let ring = map.ring();
        let comps = map
            .comps()
            .iter()
            .map(|c| {
                let mut t: Poly = ring.terms(c).map(|(e, v)| (mono_from_exps(e), v)).collect();
                t.sort_unstable_by_key(|t| t.0);
                t
            })
            .collect();
        Self { comps }
    }

    #[cfg(test)]
    pub(crate) fn to_polymap(&self, ring: &crate::mpoly::PolyRing) -> PolyMap {
        let n = ring.n();
        let comps = self
            .comps
            .iter()
            .map(|c| {
                let mut p = crate::mpoly::MultiPoly::zero();
                for &(m, v) in c {
                    let e: Vec<u8> = (0..n).map(|i| exp(m, i) as u8).collect();
                    p.set(ring.basis().index_of(&e).expect("within cap"), v);
                }
                p
            })
            .collect();
        PolyMap::new(ring.clone(), comps).expect("arity")
    }

    pub(crate) fn degree(&self) -> u32 {
        self.comps.iter().map(degree).max().unwrap_or(0)
    }

    /// Terms of degree at least two, as `(component, exponents, coefficient)`.
    pub(crate) fn key(&self, n: usize) -> Vec<u8> {
        let mut key = Vec::new();
        for (i, c) in self.comps.iter().enumerate() {
            for &(m, v) in c.iter().filter(|t| mono_degree(t.0) >= 2) {
                key.push(i as u8);
                key.extend_from_slice(&m.to_le_bytes()[..n]);
                key.push(v);
            }
        }
        key
    }

    /// `self ∘ (x_i ↦ x_i + c·m)`, or `None` above degree `d_max`.
    pub(crate) fn right_shift(&self, i: usize, c: Elem, m: Mono, d_max: u32, f: &FieldCtx, bin: &Binomials) -> Option<Self> {
        let dm = mono_degree(m);
        let mut comps = Vec::with_capacity(self.comps.len());
        for comp in &self.comps {
            let mut out = Vec::with_capacity(comp.len() * 2);
            for &(e, a) in comp {
                let k = exp(e, i);
                let rest = e - (k << (8 * i));
                let mut cj = 1 as Elem;
                for j in 0..=k {
                    let b = bin.get(k, j);
                    if b != 0 {
                        let mono = rest + ((k - j) << (8 * i)) + j * m;
                        out.push((mono, f.mul(a, f.mul(b, cj))));
                    }
                    cj = f.mul(cj, c);
                }
            }
            let out = canonicalize(out, f);
            if dm >= 2 && degree(&out) > d_max {
                return None;
            }
            comps.push(out);
        }
        Some(Self { comps })
    }

    /// `self ∘ (x_i ↦ c·x_i)`.
    pub(crate) fn right_scale(&self, i: usize, c: Elem, f: &FieldCtx) -> Self {
        let comps = self
            .comps
            .iter()
            .map(|comp| comp.iter().map(|&(e, a)| (e, f.mul(a, f.pow(c, exp(e, i) as u64)))).collect())
            .collect();
        Self { comps }
    }

    /// `(x_i ↦ x_i + c·m) ∘ self`, or `None` above degree `d_max`.
    pub(crate) fn left_shift(&self, i: usize, c: Elem, m: Mono, d_max: u32, f: &FieldCtx) -> Option<Self> {
        let n = self.comps.len();
        let degs: Vec<u32> = self.comps.iter().map(degree).collect();
        let top: u32 = (0..n).map(|j| exp(m, j) * degs[j]).sum();
        if top > d_max {
            return None;
        }
        let mut prod: Poly = vec![(0, c)];
        for j in 0..n {
            for _ in 0..exp(m, j) {
                prod = mul(&prod, &self.comps[j], f);
            }
        }
        let mut comps = self.comps.clone();
        comps[i].extend(prod);
        comps[i] = canonicalize(std::mem::take(&mut comps[i]), f);
        Some(Self { comps })
    }

    /// `α⁻¹ ∘ self` for the affine part `α`, or `None` if `α` is singular.
    pub(crate) fn normalize(&self, f: &FieldCtx) -> Option<Self> {
        let n = self.comps.len();
        let coeff = |c: &Poly, m: Mono| c.binary_search_by_key(&m, |t| t.0).map(|k| c[k].1).unwrap_or(0);
        let lin: Vec<Vec<Elem>> = self.comps.iter().map(|c| (0..n).map(|j| coeff(c, unit(j))).collect()).collect();
        let identity = (0..n).all(|i| (0..n).all(|j| lin[i][j] == Elem::from(i == j)));
        if identity && self.comps.iter().all(|c| coeff(c, 0) == 0) {
            return Some(self.clone());
        }
        let inv = linalg::invert(&lin, f)?;
        let shifted: Vec<Poly> = self.comps.iter().map(|c| c.iter().copied().filter(|t| t.0 != 0).collect()).collect();
        let comps = (0..n)
            .map(|i| {
                let mut out = Vec::new();
                for (j, c) in shifted.iter().enumerate() {
                    let a = inv[i][j];
                    if a != 0 {
                        out.extend(c.iter().map(|&(m, v)| (m, f.mul(a, v))));
                    }
                }
                canonicalize(out, f)
            })
            .collect();
        Some(Self { comps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymap::parse_map;

    #[test]
    fn shifts_match_dense_composition() {
        let f3 = FieldCtx::new(3, 1).unwrap();
        let a = parse_map("(x+y^2+2xz, y+z^2+x^2y, z+xy)", &f3).unwrap();
        let s = SMap::from_polymap(&a);
        let bin = Binomials::new(&f3, 64);
        let ring = a.ring().clone();
        let e = parse_map("(x, y+2x^2z, z)", &f3).unwrap();
        let m = mono_from_exps(&[2, 0, 1]);
        let right = s.right_shift(1, 2, m, 64, &f3, &bin).unwrap().to_polymap(&ring);
        assert_eq!(right, a.compose(&e, 64).unwrap());
        let left = s.left_shift(1, 2, m, 64, &f3).unwrap().to_polymap(&ring);
        assert_eq!(left, e.compose(&a, 64).unwrap());
        assert!(s.left_shift(1, 2, m, 5, &f3).is_none());
        assert!(s.right_shift(1, 2, m, 5, &f3, &bin).is_none());
        let sc = parse_map("(x, 2y, z)", &f3).unwrap();
        assert_eq!(s.right_scale(1, 2, &f3).to_polymap(&ring), a.compose(&sc, 64).unwrap());
        let t = parse_map("(x+1, y, z)", &f3).unwrap();
        let shifted = a.compose(&t, 64).unwrap();
        let norm = s.right_shift(0, 1, 0, 64, &f3, &bin).unwrap().normalize(&f3).unwrap().to_polymap(&ring);
        assert_eq!(norm, shifted.affine_decompose().unwrap().fprime);
    }

    #[test]
    fn char_two_binomials_vanish() {
        let f2 = FieldCtx::new(2, 1).unwrap();
        let bin = Binomials::new(&f2, 8);
        assert_eq!((0..=8).filter(|&j| bin.get(8, j) != 0).count(), 2);
        assert_eq!(bin.get(6, 2), 1);
        assert_eq!(bin.get(6, 3), 0);
    }
}
