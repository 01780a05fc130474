//! Exact arithmetic in small finite fields `F_{p^r}` with `q = p^r <= 256`.
//!
//! Elements are encoded as integers `0..q`: the base-`p` digit vector of the
//! residue polynomial modulo the field's defining polynomial, lowest digit
//! first. The prime subfield is therefore `0..p` in every representation.
//! All operations go through full lookup tables built once at construction.

mod binary;
mod unipoly;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

pub use binary::BinaryExtField;
pub use unipoly::UniPoly;

/// A field element in integer encoding.
pub type Elem = u8;

/// Largest field size backed by lookup tables.
pub const MAX_TABLE_Q: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("unsupported characteristic {0} (expected 2, 3, 5 or 7)")]
    UnsupportedPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field of size {p}^{r} exceeds the table limit of {MAX_TABLE_Q} elements")]
    TooLarge { p: u32, r: u32 },
    #[error("modulus {0} is not a monic irreducible polynomial")]
    ReducibleModulus(String),
    #[error("division by zero")]
    DivideByZero,
    #[error("characteristic mismatch: {0} vs {1}")]
    CharacteristicMismatch(u32, u32),
    #[error("embedding source must be a prime field")]
    EmbeddingUnsupported,
    #[error("element {value} out of range for a field of size {q}")]
    OutOfRange { value: u32, q: usize },
    #[error("operation needs a second operand")]
    MissingOperand,
}

/// Field operations addressable by name, see [`FieldCtx::apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
}

// Default defining polynomials, lowest coefficient first, leading 1 included.
// Every entry is still run through the irreducibility check.
const DEFAULT_MODULI: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (3, 2, &[1, 0, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (5, 2, &[2, 0, 1]),
];

/// Arithmetic context for `F_{p^r}`. Immutable once built.
pub struct FieldCtx {
    p: u32,
    r: u32,
    q: usize,
    modulus: Vec<u32>,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    inv: Vec<Elem>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

impl FieldCtx {
    /// Builds `F_{p^r}` with the fixed default modulus for that size.
    pub fn new(p: u32, r: u32) -> Result<Arc<Self>, FieldError> {
        check_size(p, r)?;
        if r == 1 {
            return Self::with_modulus(p, &[0, 1]);
        }
        if let Some((_, _, m)) = DEFAULT_MODULI.iter().find(|(dp, dr, _)| *dp == p && *dr == r) {
            return Self::with_modulus(p, m);
        }
        let modulus = smallest_irreducible(p, r);
        Self::with_modulus(p, &modulus)
    }

    /// Like [`new`](Self::new), built once per process and shared.
    pub fn shared(p: u32, r: u32) -> Result<Arc<Self>, FieldError> {
        static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Arc<FieldCtx>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(f) = cache.lock().unwrap().get(&(p, r)) {
            return Ok(f.clone());
        }
        let f = Self::new(p, r)?;
        cache.lock().unwrap().insert((p, r), f.clone());
        Ok(f)
    }

    /// Builds `F_{p^r}` from a caller-supplied monic modulus (lowest coefficient first).
    pub fn with_modulus(p: u32, modulus: &[u32]) -> Result<Arc<Self>, FieldError> {
        if modulus.len() < 2 {
            return Err(FieldError::ZeroDegree);
        }
        let r = (modulus.len() - 1) as u32;
        check_size(p, r)?;
        if modulus.iter().any(|&c| c >= p) || *modulus.last().unwrap() != 1 || !is_irreducible(p, modulus) {
            return Err(FieldError::ReducibleModulus(poly_text(modulus)));
        }
        let q = p.pow(r) as usize;
        let digits = |a: usize| -> Vec<u32> {
            let mut v = Vec::with_capacity(r as usize);
            let mut a = a as u32;
            for _ in 0..r {
                v.push(a % p);
                a /= p;
            }
            v
        };
        let encode = |d: &[u32]| -> Elem { d.iter().rev().fold(0u32, |acc, &c| acc * p + c) as Elem };

        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = encode(&s);
                let mut prod = vec![0u32; 2 * r as usize];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                let red = poly_rem(p, &prod, modulus);
                let mut red = red;
                red.resize(r as usize, 0);
                mul[a * q + b] = encode(&red);
            }
        }
        let mut neg = vec![0; q];
        let mut inv = vec![0; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).unwrap() as Elem;
            if a != 0 {
                inv[a] = (0..q).find(|&b| mul[a * q + b] == 1).unwrap() as Elem;
            }
        }
        Ok(Arc::new(Self { p, r, q, modulus: modulus.to_vec(), add, mul, neg, inv }))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Defining polynomial over `F_p`, lowest coefficient first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.r == 1
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.q).map(|a| a as Elem)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Elem> + Clone {
        (1..self.q).map(|a| a as Elem)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a == 0 {
            Err(FieldError::DivideByZero)
        } else {
            Ok(self.inv[a as usize])
        }
    }

    /// Inverse without the zero check; returns 0 for 0.
    #[inline]
    pub(crate) fn inv_or_zero(&self, a: Elem) -> Elem {
        self.inv[a as usize]
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Dispatches a named operation. `b` is required for binary operations.
    pub fn apply(&self, op: FieldOp, a: Elem, b: Option<Elem>) -> Result<Elem, FieldError> {
        self.check(a)?;
        if let Some(b) = b {
            self.check(b)?;
        }
        let rhs = || b.ok_or(FieldError::MissingOperand);
        Ok(match op {
            FieldOp::Add => self.add(a, rhs()?),
            FieldOp::Sub => self.sub(a, rhs()?),
            FieldOp::Mul => self.mul(a, rhs()?),
            FieldOp::Neg => self.neg(a),
            FieldOp::Inv => self.inv(a)?,
        })
    }

    pub fn check(&self, a: Elem) -> Result<Elem, FieldError> {
        if (a as usize) < self.q {
            Ok(a)
        } else {
            Err(FieldError::OutOfRange { value: a as u32, q: self.q })
        }
    }

    /// Maps an integer into the prime subfield (reduced mod p).
    pub fn from_int(&self, v: i64) -> Elem {
        v.rem_euclid(self.p as i64) as Elem
    }

    /// Image of `a` under the embedding of the prime field `base` into `ext`.
    pub fn embed_prime(base: &FieldCtx, ext: &FieldCtx, a: Elem) -> Result<Elem, FieldError> {
        if base.p != ext.p {
            return Err(FieldError::CharacteristicMismatch(base.p, ext.p));
        }
        if !base.is_prime_field() {
            return Err(FieldError::EmbeddingUnsupported);
        }
        base.check(a)?;
        // The constant residue `a` has the same integer encoding in every extension.
        Ok(a)
    }
}

fn check_size(p: u32, r: u32) -> Result<(), FieldError> {
    if ![2, 3, 5, 7].contains(&p) {
        return Err(FieldError::UnsupportedPrime(p));
    }
    if r == 0 {
        return Err(FieldError::ZeroDegree);
    }
    match p.checked_pow(r) {
        Some(q) if q as usize <= MAX_TABLE_Q => Ok(()),
        _ => Err(FieldError::TooLarge { p, r }),
    }
}

/// Remainder of `a` modulo monic `m` over `F_p`, coefficients lowest first.
pub(crate) fn poly_rem(p: u32, a: &[u32], m: &[u32]) -> Vec<u32> {
    let dm = m.len() - 1;
    let mut a: Vec<u32> = a.to_vec();
    while a.len() > dm {
        let lead = a.pop().unwrap();
        if lead != 0 {
            let shift = a.len() - dm;
            for (i, &c) in m[..dm].iter().enumerate() {
                a[shift + i] = (a[shift + i] + (p - lead) * c) % p;
            }
        }
    }
    a
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
pub(crate) fn is_irreducible(p: u32, m: &[u32]) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        for low in 0..p.pow(d as u32) {
            let mut div = Vec::with_capacity(d + 1);
            let mut v = low;
            for _ in 0..d {
                div.push(v % p);
                v /= p;
            }
            div.push(1);
            if poly_rem(p, m, &div).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// First monic irreducible of degree `r` in increasing integer encoding.
pub(crate) fn smallest_irreducible(p: u32, r: u32) -> Vec<u32> {
    (0..p.pow(r))
        .map(|low| {
            let mut m = Vec::with_capacity(r as usize + 1);
            let mut v = low;
            for _ in 0..r {
                m.push(v % p);
                v /= p;
            }
            m.push(1);
            m
        })
        .find(|m| is_irreducible(p, m))
        .expect("an irreducible polynomial exists in every degree")
}

fn poly_text(m: &[u32]) -> String {
    let mut terms = Vec::new();
    for (i, &c) in m.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let coef = if c == 1 && i > 0 { String::new() } else { c.to_string() };
        terms.push(match i {
            0 => coef,
            1 => format!("{coef}x"),
            _ => format!("{coef}x^{i}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}
