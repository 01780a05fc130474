//! Polynomial endomorphisms of `F_q^n`: composition, Jacobians,
//! bijectivity over the base field and its extensions, formal inversion,
//! and the predicates built on them.

mod eval;
mod text;

use std::fmt;
use std::sync::Arc;

pub use eval::Evaluator;
pub use text::{format_map, format_poly, parse_map, parse_map_in};

use crate::ff::{Elem, FieldCtx, FieldError};
use crate::linalg;
use crate::mpoly::{MultiPoly, PolyError, PolyRing};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("the affine part is not invertible")]
    SingularAffine,
    #[error("the affine part is not the identity")]
    NonIdentityAffine,
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{name}` at {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("coefficient {value} at {pos} is not a field element")]
    CoefficientOutOfRange { value: u64, pos: usize },
    #[error("deciding invertibility needs degree {needed}, above the supported {limit}")]
    InverseUndecided { needed: u32, limit: u32 },
}

impl From<FieldError> for MapError {
    fn from(e: FieldError) -> Self {
        MapError::Poly(e.into())
    }
}

/// Largest basis cap used for exact composition checks in three variables.
pub const INVERSE_CAP_LIMIT: u32 = 128;

/// An n-tuple of polynomials over one ring.
#[derive(Clone)]
pub struct PolyMap {
    ring: PolyRing,
    comps: Vec<MultiPoly>,
}

impl PartialEq for PolyMap {
    fn eq(&self, other: &Self) -> bool {
        self.comps == other.comps && *self.ring.field() == *other.ring.field()
    }
}

impl Eq for PolyMap {}

impl std::hash::Hash for PolyMap {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.comps.hash(state);
    }
}

impl fmt::Debug for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_map(self))
    }
}

impl fmt::Display for PolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_map(self))
    }
}

/// Jacobian determinant classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetClass {
    ConstantNonzero(Elem),
    NowhereZeroNonconstant,
    VanishesSomewhere,
}

impl DetClass {
    pub fn is_constant(&self) -> bool {
        matches!(self, DetClass::ConstantNonzero(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            DetClass::ConstantNonzero(_) => "constant",
            DetClass::NowhereZeroNonconstant => "nowhere-zero",
            DetClass::VanishesSomewhere => "vanishes",
        }
    }
}

/// `F = alpha ∘ fprime` with `alpha` affine and `fprime` identity-affine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineDecomposition {
    pub alpha: PolyMap,
    pub fprime: PolyMap,
}

/// Outcome of [`PolyMap::formal_inverse`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inversion {
    Inverse(PolyMap),
    NotInvertible,
}

impl PolyMap {
    pub fn new(ring: PolyRing, comps: Vec<MultiPoly>) -> Result<Self, MapError> {
        if comps.len() != ring.n() {
            return Err(PolyError::ArityMismatch { expected: ring.n(), got: comps.len() }.into());
        }
        for c in &comps {
            if let Some(d) = ring.degree(c) {
                if d > ring.cap() {
                    return Err(PolyError::CapExceeded { degree: d, cap: ring.cap() }.into());
                }
            }
        }
        Ok(Self { ring, comps })
    }

    pub fn identity(ring: &PolyRing) -> Self {
        let comps = (0..ring.n()).map(|i| ring.var(i)).collect();
        Self { ring: ring.clone(), comps }
    }

    /// The affine map `x ↦ M x + t`.
    pub fn affine(ring: &PolyRing, m: &[Vec<Elem>], t: &[Elem]) -> Self {
        let n = ring.n();
        let comps = (0..n)
            .map(|i| {
                let mut v = vec![0; n + 1];
                v[0] = t.get(i).copied().unwrap_or(0);
                v[1..].copy_from_slice(&m[i][..n]);
                MultiPoly::from_coeffs(v)
            })
            .collect();
        Self { ring: ring.clone(), comps }
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn field(&self) -> &Arc<FieldCtx> {
        self.ring.field()
    }

    pub fn n(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[MultiPoly] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &MultiPoly {
        &self.comps[i]
    }

    pub fn into_comps(self) -> Vec<MultiPoly> {
        self.comps
    }

    /// Maximum component degree; 0 for the zero map.
    pub fn degree(&self) -> u32 {
        self.comps.iter().filter_map(|c| self.ring.degree(c)).max().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        self.comps.iter().enumerate().all(|(i, c)| *c == self.ring.var(i))
    }

    /// The same map over a ring with the same field and variable count but
    /// another cap.
    pub fn with_ring(&self, ring: &PolyRing) -> Result<Self, MapError> {
        debug_assert_eq!(ring.n(), self.n());
        Self::new(ring.clone(), self.comps.clone())
    }

    /// Concatenated coefficients of every component on the monomials of
    /// degree `<= deg`.
    pub fn encode(&self, deg: u32) -> Vec<u8> {
        let len = self.ring.basis().size_upto(deg);
        let mut out = Vec::with_capacity(len * self.n());
        for c in &self.comps {
            assert!(c.coeffs().len() <= len, "map degree exceeds encoding degree {deg}");
            out.extend_from_slice(c.coeffs());
            out.resize(out.len() + len - c.coeffs().len(), 0);
        }
        out
    }

    pub fn decode(ring: &PolyRing, deg: u32, bytes: &[u8]) -> Self {
        let len = ring.basis().size_upto(deg);
        let comps = bytes.chunks(len).map(|c| MultiPoly::from_coeffs(c.to_vec())).collect();
        Self { ring: ring.clone(), comps }
    }

    /// `self ∘ g`: the variables of `self` replaced by the components of `g`.
    pub fn compose(&self, g: &PolyMap, cap: u32) -> Result<PolyMap, MapError> {
        let (comps, _) = self.ring.subst_many(&self.comps, &g.comps, None)?;
        let out = PolyMap { ring: self.ring.clone(), comps };
        let d = out.degree();
        if d > cap {
            return Err(PolyError::CapExceeded { degree: d, cap }.into());
        }
        Ok(out)
    }

    /// `self ∘ g` with every term above `cap` dropped; the flag reports
    /// whether anything was dropped.
    pub fn compose_truncated(&self, g: &PolyMap, cap: u32) -> (PolyMap, bool) {
        let (comps, t) = self.ring.subst_many(&self.comps, &g.comps, Some(cap)).expect("arity checked");
        (PolyMap { ring: self.ring.clone(), comps }, t)
    }

    pub fn add(&self, g: &PolyMap) -> PolyMap {
        let comps = self.comps.iter().zip(&g.comps).map(|(a, b)| self.ring.add(a, b)).collect();
        PolyMap { ring: self.ring.clone(), comps }
    }

    pub fn scale(&self, c: Elem) -> PolyMap {
        let comps = self.comps.iter().map(|a| self.ring.scale(a, c)).collect();
        PolyMap { ring: self.ring.clone(), comps }
    }

    /// Constant terms.
    pub fn translation(&self) -> Vec<Elem> {
        self.comps.iter().map(|c| c.coeff(0)).collect()
    }

    /// Matrix of linear coefficients, row `i` for component `i`.
    pub fn linear_matrix(&self) -> Vec<Vec<Elem>> {
        let n = self.n();
        self.comps.iter().map(|c| (0..n).map(|j| c.coeff(1 + j)).collect()).collect()
    }

    pub fn affine_part(&self) -> PolyMap {
        let comps = self.comps.iter().map(|c| self.ring.truncate(c, 1)).collect();
        PolyMap { ring: self.ring.clone(), comps }
    }

    pub fn has_identity_affine_part(&self) -> bool {
        let n = self.n();
        self.comps.iter().enumerate().all(|(i, c)| c.coeff(0) == 0 && (0..n).all(|j| c.coeff(1 + j) == Elem::from(i == j)))
    }

    /// Components minus their affine parts.
    pub fn nonlinear_parts(&self) -> Vec<MultiPoly> {
        let start = self.ring.basis().size_upto(1);
        self.comps
            .iter()
            .map(|c| {
                let mut v = c.coeffs().to_vec();
                for x in v.iter_mut().take(start) {
                    *x = 0;
                }
                MultiPoly::from_coeffs(v)
            })
            .collect()
    }

    pub fn jacobian(&self) -> Vec<Vec<MultiPoly>> {
        self.comps
            .iter()
            .map(|c| (0..self.n()).map(|j| self.ring.partial(c, j).expect("index in range")).collect())
            .collect()
    }

    /// Formal determinant of the Jacobian matrix.
    pub fn jacobian_det(&self) -> Result<MultiPoly, MapError> {
        let jac = self.jacobian();
        let cols: Vec<usize> = (0..self.n()).collect();
        Ok(det_expand(&self.ring, &jac, 0, &cols)?)
    }

    /// Constant nonzero determinants are read off symbolically; otherwise
    /// the determinant is evaluated on every point of `F_q^n`.
    pub fn det_classify(&self) -> Result<DetClass, MapError> {
        let det = self.jacobian_det()?;
        Ok(classify_det(&self.ring, &det))
    }

    /// Whether the induced map on `(F_{q^ext_r})^n` is a bijection; extension
    /// degrees above 1 need a prime base field.
    pub fn is_bijection(&self, ext_r: u32) -> Result<bool, MapError> {
        let ev = Evaluator::shared(self.field(), ext_r, self.n())?;
        Ok(ev.is_bijection(self))
    }

    /// Bit `r - 1` set iff the map is a bijection over `F_{q^r}`.
    pub fn extension_signature(&self, r_max: u32) -> Result<u32, MapError> {
        let mut sig = 0;
        for r in 1..=r_max {
            if self.is_bijection(r)? {
                sig |= 1 << (r - 1);
            }
        }
        Ok(sig)
    }

    pub fn affine_inverse(&self) -> Result<PolyMap, MapError> {
        let f = self.field();
        let minv = linalg::invert(&self.linear_matrix(), f).ok_or(MapError::SingularAffine)?;
        let t = self.translation();
        // x = M^-1 (y - t)
        let shift: Vec<Elem> = minv
            .iter()
            .map(|row| f.neg(row.iter().zip(&t).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))))
            .collect();
        Ok(PolyMap::affine(&self.ring, &minv, &shift))
    }

    pub fn affine_decompose(&self) -> Result<AffineDecomposition, MapError> {
        let alpha = self.affine_part();
        let inv = alpha.affine_inverse()?;
        let fprime = inv.compose(self, self.ring.cap())?;
        Ok(AffineDecomposition { alpha, fprime })
    }

    /// Compositional inverse of an identity-affine map.
    ///
    /// Writes `F = X + H` and iterates `G ← X − H(G)` with terms above
    /// `P = D + deg F` dropped, `D = deg(F)^(n−1)`, until the fixpoint (the
    /// power-series inverse modulo degree `> P`). A nonzero term of degree in
    /// `(D, P]` rules out a polynomial inverse, since an inverse has degree
    /// `<= D`. Otherwise the candidate is returned only if both `F∘G` and
    /// `G∘F` are the identity exactly.
    pub fn formal_inverse(&self) -> Result<Inversion, MapError> {
        if !self.has_identity_affine_part() {
            return Err(MapError::NonIdentityAffine);
        }
        let d = self.degree();
        if d <= 1 {
            return Ok(Inversion::Inverse(self.clone()));
        }
        let n = self.n() as u32;
        let big_d = d.pow(n - 1);
        let prec = big_d + d;
        let limit = if n <= 3 { INVERSE_CAP_LIMIT } else { self.ring.cap() };
        if prec > limit {
            return Err(MapError::InverseUndecided { needed: prec, limit });
        }
        let work = PolyRing::with_cap(self.field().clone(), self.n(), prec.max(self.ring.cap()));
        let f = self.with_ring(&work)?;
        let id = PolyMap::identity(&work);
        let h = PolyMap { ring: work.clone(), comps: f.nonlinear_parts() };
        let mut g = id.clone();
        for _ in 0..prec {
            let (hg, _) = h.compose_truncated(&g, prec);
            let next = id.add(&hg.scale(work.field().neg(1)));
            if next == g {
                break;
            }
            g = next;
        }
        let e = g.degree();
        if e > big_d {
            return Ok(Inversion::NotInvertible);
        }
        if e * d > limit {
            return Err(MapError::InverseUndecided { needed: e * d, limit });
        }
        let check = PolyRing::with_cap(self.field().clone(), self.n(), (e * d).max(self.ring.cap()));
        let fc = f.with_ring(&check)?;
        let gc = g.with_ring(&check)?;
        if fc.compose(&gc, e * d)?.is_identity() && gc.compose(&fc, e * d)?.is_identity() {
            Ok(Inversion::Inverse(g.with_ring(&self.ring)?))
        } else {
            Ok(Inversion::NotInvertible)
        }
    }

    /// Affine part invertible and the normalized map formally invertible.
    ///
    /// Maps with prime-field coefficients that fail to be bijective over a
    /// small extension are rejected before any inversion is attempted.
    pub fn is_automorphism(&self) -> Result<bool, MapError> {
        let dec = match self.affine_decompose() {
            Ok(d) => d,
            Err(MapError::SingularAffine) => return Ok(false),
            Err(e) => return Err(e),
        };
        if dec.fprime.jacobian_det()?.coeffs().len() != 1 {
            return Ok(false);
        }
        let f = self.field();
        if f.is_prime_field() {
            for r in 1..=3 {
                if (f.q() as u64).pow(r * self.n() as u32) > 1 << 16 {
                    break;
                }
                if !self.is_bijection(r)? {
                    return Ok(false);
                }
            }
        }
        Ok(matches!(dec.fprime.formal_inverse()?, Inversion::Inverse(_)))
    }

    /// Bijective on `F_q^n` with constant nonzero Jacobian determinant.
    pub fn is_mock(&self) -> Result<bool, MapError> {
        let det = self.jacobian_det()?;
        if det.is_zero() || det.coeffs().len() > 1 {
            return Ok(false);
        }
        self.is_bijection(1)
    }

    /// The nonlinear parts `H_1..H_n` of an identity-affine map are linearly
    /// dependent over `F_q`.
    pub fn satisfies_dependence(&self) -> Result<bool, MapError> {
        if !self.has_identity_affine_part() {
            return Err(MapError::NonIdentityAffine);
        }
        let hs = self.nonlinear_parts();
        let len = hs.iter().map(|h| h.coeffs().len()).max().unwrap_or(0);
        let rows: Vec<Vec<Elem>> = hs
            .iter()
            .map(|h| {
                let mut v = h.coeffs().to_vec();
                v.resize(len, 0);
                v
            })
            .collect();
        Ok(linalg::rank(&rows, self.field()) < self.n())
    }

    /// `(F, x_{n+1}, ..., x_{n+m})` in `n + m` variables.
    pub fn stabilize(&self, m: usize) -> Result<PolyMap, MapError> {
        let target = PolyRing::new(self.field().clone(), self.n() + m);
        let mut comps = Vec::with_capacity(self.n() + m);
        for c in &self.comps {
            comps.push(self.ring.lift_to(c, &target)?);
        }
        for i in self.n()..self.n() + m {
            comps.push(target.var(i));
        }
        PolyMap::new(target, comps)
    }
}

fn det_expand(ring: &PolyRing, m: &[Vec<MultiPoly>], row: usize, cols: &[usize]) -> Result<MultiPoly, PolyError> {
    if cols.len() == 1 {
        return Ok(m[row][cols[0]].clone());
    }
    let mut acc = MultiPoly::zero();
    for (k, &c) in cols.iter().enumerate() {
        if m[row][c].is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_expand(ring, m, row + 1, &rest)?;
        let term = ring.mul(&m[row][c], &minor)?;
        acc = if k % 2 == 0 { ring.add(&acc, &term) } else { ring.sub(&acc, &term) };
    }
    Ok(acc)
}

fn classify_det(ring: &PolyRing, det: &MultiPoly) -> DetClass {
    if det.coeffs().len() == 1 {
        return DetClass::ConstantNonzero(det.coeff(0));
    }
    if det.is_zero() {
        return DetClass::VanishesSomewhere;
    }
    let ev = Evaluator::shared(ring.field(), 1, ring.n()).expect("base field evaluation");
    if ev.has_zero(det, ring) {
        DetClass::VanishesSomewhere
    } else {
        DetClass::NowhereZeroNonconstant
    }
}

#[cfg(test)]
mod tests;
