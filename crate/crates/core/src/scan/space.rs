use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::ff::{Elem, FieldCtx};
use crate::linalg;
use crate::mpoly::{MonomialBasis, MultiPoly, PolyRing};
use crate::polymap::PolyMap;

use super::ScanError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    /// `X + H`, `H` homogeneous quadratic in all three components.
    IdentityAffineDeg2,
    /// `X + H`, `H` homogeneous cubic in all three components.
    HomogeneousCubic,
    /// `(x + H_1, y + H_2, z)`, `H_i` homogeneous quadratic.
    DependenceDeg2,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::IdentityAffineDeg2, Shape::HomogeneousCubic, Shape::DependenceDeg2];

    pub fn id(self) -> u8 {
        match self {
            Shape::IdentityAffineDeg2 => 0,
            Shape::HomogeneousCubic => 1,
            Shape::DependenceDeg2 => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.id() == id)
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::IdentityAffineDeg2 => "id-affine-deg2",
            Shape::HomogeneousCubic => "homog-cubic",
            Shape::DependenceDeg2 => "dependence-deg2",
        }
    }

    pub fn degree(self) -> u32 {
        match self {
            Shape::HomogeneousCubic => 3,
            _ => 2,
        }
    }

    fn varying_components(self) -> usize {
        match self {
            Shape::DependenceDeg2 => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown shape `{s}`"))
    }
}

/// The free coefficients of a shape over a field: slot `s` is the
/// coefficient of basis monomial `slots[s].1` in component `slots[s].0`.
#[derive(Debug, Clone)]
pub struct ShapeSpace {
    shape: Shape,
    ring: PolyRing,
    slots: Vec<(usize, usize)>,
}

pub const N: usize = 3;

impl ShapeSpace {
    pub fn new(shape: Shape, field: Arc<FieldCtx>) -> Self {
        let ring = PolyRing::new(field, N);
        let d = shape.degree();
        let mut slots = Vec::new();
        for comp in 0..shape.varying_components() {
            for k in ring.basis().grade_range(d) {
                slots.push((comp, k));
            }
        }
        Self { shape, ring, slots }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        self.ring.field()
    }

    pub fn degree(&self) -> u32 {
        self.shape.degree()
    }

    pub fn slots(&self) -> &[(usize, usize)] {
        &self.slots
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// `q^slots`.
    pub fn candidate_count(&self) -> u128 {
        (self.field().q() as u128).pow(self.slots.len() as u32)
    }

    pub fn map_from_coeffs(&self, coeffs: &[Elem]) -> PolyMap {
        let mut comps: Vec<MultiPoly> = (0..N).map(|i| self.ring.var(i)).collect();
        for (&(comp, k), &c) in self.slots.iter().zip(coeffs) {
            comps[comp].set(k, c);
        }
        PolyMap::new(self.ring.clone(), comps).expect("shape fits the ring")
    }

    /// Inverse of [`map_from_coeffs`](Self::map_from_coeffs); `None` if the
    /// map does not have this shape.
    pub fn coeffs_of(&self, map: &PolyMap) -> Option<Vec<Elem>> {
        let map = map.with_ring(&self.ring).ok()?;
        let coeffs: Vec<Elem> = self.slots.iter().map(|&(comp, k)| map.comp(comp).coeff(k)).collect();
        (self.map_from_coeffs(&coeffs) == map).then_some(coeffs)
    }

    /// Linear conditions on the slots expressing that the trace of the
    /// Jacobian of the nonlinear part vanishes.
    pub fn trace_constraints(&self) -> Vec<Vec<Elem>> {
        let f = self.field();
        let basis = self.ring.basis();
        let lower = basis.grade_range(self.degree() - 1);
        let mut rows = vec![vec![0 as Elem; self.slots.len()]; lower.len()];
        for (s, &(comp, k)) in self.slots.iter().enumerate() {
            let e = basis.exps(k);
            if e[comp] == 0 {
                continue;
            }
            let mut d = e.to_vec();
            d[comp] -= 1;
            let row = basis.index_of(&d).unwrap() - lower.start;
            rows[row][s] = f.from_int(e[comp] as i64);
        }
        rows.retain(|r| r.iter().any(|&c| c != 0));
        rows
    }
}

/// Mixed-radix indexing of a linear subspace of the slot space: free slots
/// take the digits of the index (first free slot most significant) and the
/// remaining slots are determined by them.
#[derive(Debug, Clone)]
pub struct IndexSpace {
    q: u64,
    slots: usize,
    free: Vec<usize>,
    /// `(slot, [(free position, factor)])`: slot value is the sum of
    /// factor times free value.
    bound: Vec<(usize, Vec<(usize, Elem)>)>,
}

impl IndexSpace {
    pub fn full(space: &ShapeSpace) -> Self {
        let q = space.field().q() as u64;
        let slots = space.slot_count();
        Self { q, slots, free: (0..slots).collect(), bound: Vec::new() }
    }

    /// Solutions of `constraints · c = 0`.
    pub fn kernel(space: &ShapeSpace, constraints: &[Vec<Elem>]) -> Result<Self, ScanError> {
        let f = space.field();
        let slots = space.slot_count();
        let mut rows: Vec<Vec<Elem>> = constraints.to_vec();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..slots {
            let Some(p) = (r..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
            rows.swap(r, p);
            let inv = f.inv(rows[r][col]).expect("nonzero pivot");
            for v in rows[r].iter_mut() {
                *v = f.mul(*v, inv);
            }
            for i in 0..rows.len() {
                if i != r && rows[i][col] != 0 {
                    let c = rows[i][col];
                    let pivot_row = rows[r].clone();
                    for (v, &pv) in rows[i].iter_mut().zip(&pivot_row) {
                        *v = f.sub(*v, f.mul(c, pv));
                    }
                }
            }
            pivots.push(col);
            r += 1;
        }
        if linalg::rank(constraints, f) != pivots.len() {
            return Err(ScanError::Format("inconsistent constraint rank".into()));
        }
        let free: Vec<usize> = (0..slots).filter(|c| !pivots.contains(c)).collect();
        let bound = pivots
            .iter()
            .zip(&rows)
            .map(|(&col, row)| {
                let deps = free
                    .iter()
                    .enumerate()
                    .filter(|&(_, &s)| row[s] != 0)
                    .map(|(pos, &s)| (pos, f.neg(row[s])))
                    .collect();
                (col, deps)
            })
            .collect();
        Ok(Self { q: f.q() as u64, slots, free, bound })
    }

    pub fn len(&self) -> u128 {
        (self.q as u128).pow(self.free.len() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    pub fn decode(&self, mut index: u64, f: &FieldCtx, out: &mut [Elem]) {
        debug_assert_eq!(out.len(), self.slots);
        let mut digits = [0 as Elem; 32];
        for pos in (0..self.free.len()).rev() {
            digits[pos] = (index % self.q) as Elem;
            index /= self.q;
        }
        for (pos, &s) in self.free.iter().enumerate() {
            out[s] = digits[pos];
        }
        for (s, deps) in &self.bound {
            let mut v = 0;
            for &(pos, c) in deps {
                if digits[pos] != 0 {
                    v = f.add(v, f.mul(c, digits[pos]));
                }
            }
            out[*s] = v;
        }
    }
}

/// Jacobian and bijectivity tests specialised to a shape: everything is
/// precomputed per slot so a candidate costs a few hundred table lookups.
pub(crate) struct FastFilter {
    field: Arc<FieldCtx>,
    slots: Vec<(usize, usize)>,
    /// Per slot: `(row, column, local monomial, factor)` of its contribution
    /// to the Jacobian of the nonlinear part.
    jac: Vec<Vec<(usize, usize, usize, Elem)>>,
    g1: usize,
    mul11: Vec<u16>,
    mul12: Vec<u16>,
    len2: usize,
    len3: usize,
    /// Per slot, the monomial's value at every point.
    values: Vec<Vec<Elem>>,
    points: Vec<[Elem; N]>,
    /// Over `F_2`: truth tables of the variables and slot monomials on the
    /// 8 points.
    var_tt: [u8; N],
    slot_tt: Vec<u8>,
}

impl FastFilter {
    pub(crate) fn new(space: &ShapeSpace) -> Self {
        let f = space.field().clone();
        let d = space.degree();
        let basis = MonomialBasis::shared(N, 3 * (d - 1));
        let g = |k: u32| basis.grade_range(k);
        let (r1, r2, r3) = (g(d - 1), g(2 * (d - 1)), g(3 * (d - 1)));
        let ring_basis = space.ring().basis();
        let mut jac = Vec::new();
        for &(comp, k) in space.slots() {
            let e = ring_basis.exps(k);
            let mut entries = Vec::new();
            for j in 0..N {
                if e[j] == 0 {
                    continue;
                }
                let factor = f.from_int(e[j] as i64);
                if factor == 0 {
                    continue;
                }
                let mut de = e.to_vec();
                de[j] -= 1;
                entries.push((comp, j, basis.index_of(&de).unwrap() - r1.start, factor));
            }
            jac.push(entries);
        }
        let table = |ra: &std::ops::Range<usize>, rb: &std::ops::Range<usize>, rc: &std::ops::Range<usize>| {
            let mut t = Vec::with_capacity(ra.len() * rb.len());
            for a in ra.clone() {
                for b in rb.clone() {
                    t.push((basis.product_index(a, b) - rc.start) as u16);
                }
            }
            t
        };
        let mul11 = table(&r1, &r1, &r2);
        let mul12 = table(&r1, &r2, &r3);

        let q = f.q();
        let mut points = Vec::new();
        let mut values = vec![Vec::new(); space.slot_count()];
        if q.pow(N as u32) <= 1 << 12 {
            for idx in 0..q.pow(N as u32) {
                let pt = [(idx / (q * q)) as Elem, (idx / q % q) as Elem, (idx % q) as Elem];
                for (s, &(_, k)) in space.slots().iter().enumerate() {
                    let e = ring_basis.exps(k);
                    let v = (0..N).fold(1, |acc, i| f.mul(acc, f.pow(pt[i], e[i] as u64)));
                    values[s].push(v);
                }
                points.push(pt);
            }
        }
        let mut var_tt = [0u8; N];
        let mut slot_tt = vec![0u8; space.slot_count()];
        if q == 2 {
            for (bit, pt) in points.iter().enumerate() {
                for i in 0..N {
                    var_tt[i] |= (pt[i] as u8) << bit;
                }
                for s in 0..space.slot_count() {
                    slot_tt[s] |= (values[s][bit] as u8) << bit;
                }
            }
        }
        Self {
            field: f,
            slots: space.slots().to_vec(),
            jac,
            g1: r1.len(),
            mul11,
            mul12,
            len2: r2.len(),
            len3: r3.len(),
            values,
            points,
            var_tt,
            slot_tt,
        }
    }

    /// Whether `det(I + DH)` is constant (then necessarily 1).
    pub(crate) fn jacobian_constant(&self, c: &[Elem]) -> bool {
        let f = &*self.field;
        let g1 = self.g1;
        // a[i][j]: coefficients of the (i, j) entry, local to grade d - 1.
        let mut a = [[[0 as Elem; 6]; N]; N];
        for (s, &cs) in c.iter().enumerate() {
            if cs == 0 {
                continue;
            }
            for &(i, j, m, factor) in &self.jac[s] {
                a[i][j][m] = f.add(a[i][j][m], f.mul(cs, factor));
            }
        }
        // Trace.
        for m in 0..g1 {
            if f.add(f.add(a[0][0][m], a[1][1][m]), a[2][2][m]) != 0 {
                return false;
            }
        }
        let mul2 = |x: &[Elem; 6], y: &[Elem; 6], out: &mut [Elem; 15], neg: bool| {
            for (u, &xu) in x[..g1].iter().enumerate() {
                if xu == 0 {
                    continue;
                }
                for (v, &yv) in y[..g1].iter().enumerate() {
                    if yv == 0 {
                        continue;
                    }
                    let k = self.mul11[u * g1 + v] as usize;
                    let p = f.mul(xu, yv);
                    out[k] = if neg { f.sub(out[k], p) } else { f.add(out[k], p) };
                }
            }
        };
        // Sum of principal 2x2 minors.
        let mut e2 = [0 as Elem; 15];
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            mul2(&a[i][i], &a[j][j], &mut e2, false);
            mul2(&a[i][j], &a[j][i], &mut e2, true);
        }
        if e2[..self.len2].iter().any(|&v| v != 0) {
            return false;
        }
        // Cofactor expansion along the first row.
        let mut det = [0 as Elem; 28];
        for (col, sign) in [(0usize, false), (1, true), (2, false)] {
            let (c1, c2) = match col {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let mut minor = [0 as Elem; 15];
            mul2(&a[1][c1], &a[2][c2], &mut minor, false);
            mul2(&a[1][c2], &a[2][c1], &mut minor, true);
            let x = &a[0][col];
            for (u, &xu) in x[..g1].iter().enumerate() {
                if xu == 0 {
                    continue;
                }
                for (v, &mv) in minor[..self.len2].iter().enumerate() {
                    if mv == 0 {
                        continue;
                    }
                    let k = self.mul12[u * self.len2 + v] as usize;
                    let p = f.mul(xu, mv);
                    det[k] = if sign { f.sub(det[k], p) } else { f.add(det[k], p) };
                }
            }
        }
        det[..self.len3].iter().all(|&v| v == 0)
    }

    /// Bijectivity on `F_q^3` by evaluation at every point.
    pub(crate) fn bijective(&self, c: &[Elem]) -> bool {
        if self.field.q() == 2 {
            return self.bijective_f2(c);
        }
        let f = &*self.field;
        let q = f.q();
        let mut seen = vec![0u64; (self.points.len() + 63) / 64];
        for (p, pt) in self.points.iter().enumerate() {
            let mut img = *pt;
            for (s, &cs) in c.iter().enumerate() {
                if cs != 0 {
                    let comp = self.slots[s].0;
                    img[comp] = f.add(img[comp], f.mul(cs, self.values[s][p]));
                }
            }
            let idx = (img[0] as usize * q + img[1] as usize) * q + img[2] as usize;
            if seen[idx / 64] >> (idx % 64) & 1 == 1 {
                return false;
            }
            seen[idx / 64] |= 1 << (idx % 64);
        }
        true
    }

    /// A map of `F_2^3` is bijective iff every nonzero combination of its
    /// components is balanced.
    fn bijective_f2(&self, c: &[Elem]) -> bool {
        let mut tt = self.var_tt;
        for (s, &cs) in c.iter().enumerate() {
            if cs != 0 {
                tt[self.slots[s].0] ^= self.slot_tt[s];
            }
        }
        (1..8u8).all(|mask| {
            let mut v = 0u8;
            for (i, &t) in tt.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    v ^= t;
                }
            }
            v.count_ones() == 4
        })
    }
}
