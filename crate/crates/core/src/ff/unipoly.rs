use std::cmp::Ordering;
use std::fmt::Write as _;

use super::{Elem, FieldCtx};

/// Univariate polynomial over a [`FieldCtx`], coefficients lowest degree first.
///
/// The representation is always trimmed, so the zero polynomial has no
/// coefficients and the leading coefficient is otherwise nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Elem>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1] }
    }

    /// `c * T^k`.
    pub fn monomial(c: Elem, k: usize) -> Self {
        let mut v = vec![0; k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Elem {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn coeff(&self, k: usize) -> Elem {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &Self, f: &FieldCtx) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &Self, f: &FieldCtx) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn scale(&self, c: Elem, f: &FieldCtx) -> Self {
        Self::new(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, other: &Self, f: &FieldCtx) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Self::new(out)
    }

    /// Quotient and remainder; `None` when dividing by zero.
    pub fn div_rem(&self, m: &Self, f: &FieldCtx) -> Option<(Self, Self)> {
        let dm = m.degree()?;
        let lead_inv = f.inv(m.leading()).ok()?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0; rem.len().saturating_sub(dm)];
        while rem.len() > dm {
            let top = *rem.last().unwrap();
            let shift = rem.len() - 1 - dm;
            if top != 0 {
                let c = f.mul(top, lead_inv);
                quot[shift] = c;
                for (i, &mc) in m.coeffs.iter().enumerate() {
                    rem[shift + i] = f.sub(rem[shift + i], f.mul(c, mc));
                }
            }
            rem.pop();
        }
        Some((Self::new(quot), Self::new(rem)))
    }

    pub fn rem(&self, m: &Self, f: &FieldCtx) -> Option<Self> {
        self.div_rem(m, f).map(|(_, r)| r)
    }

    /// True iff `self` divides `other`. The zero polynomial divides only zero.
    pub fn divides(&self, other: &Self, f: &FieldCtx) -> bool {
        if self.is_zero() {
            return other.is_zero();
        }
        other.rem(self, f).is_some_and(|r| r.is_zero())
    }

    pub fn monic(&self, f: &FieldCtx) -> Self {
        match f.inv(self.leading()) {
            Ok(inv) => self.scale(inv, f),
            Err(_) => Self::zero(),
        }
    }

    pub fn eval(&self, x: Elem, f: &FieldCtx) -> Elem {
        self.coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Smallest `t >= 1` with `T^t = 1 mod self`, searched up to `limit`.
    ///
    /// Returns `None` when `T` is not a unit modulo `self` (zero constant
    /// term), when `self` has degree zero, or when `limit` is reached.
    pub fn order_of_t(&self, f: &FieldCtx, limit: u64) -> Option<u64> {
        let deg = self.degree()?;
        if deg == 0 || self.coeff(0) == 0 {
            return None;
        }
        let one = Self::one();
        let t = Self::monomial(1, 1);
        let mut acc = t.rem(self, f)?;
        for k in 1..=limit {
            if acc == one {
                return Some(k);
            }
            acc = acc.mul(&t, f).rem(self, f)?;
        }
        None
    }

    /// Text in descending powers, e.g. `T^3+T^2+2T+2`.
    pub fn to_text(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !s.is_empty() {
                s.push('+');
            }
            if c != 1 || k == 0 {
                let _ = write!(s, "{c}");
            }
            match k {
                0 => {}
                1 => s.push_str(var),
                _ => {
                    let _ = write!(s, "{var}^{k}");
                }
            }
        }
        s
    }

    /// Ordering used for deterministic tables: degree first, then
    /// coefficients from the top power down.
    pub fn table_cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_and_order() {
        let f3 = FieldCtx::new(3, 1).unwrap();
        // T^2 + 2 = T^2 - 1 over F_3: T has order 2.
        let m = UniPoly::new(vec![2, 0, 1]);
        assert_eq!(m.order_of_t(&f3, 100), Some(2));
        assert_eq!(m.to_text("T"), "T^2+2");

        // T^3 + T^2 + 2T + 2 = (T^2 + 2)(T + 1).
        let m = UniPoly::new(vec![2, 2, 1, 1]);
        let factor = UniPoly::new(vec![1, 1]);
        assert!(factor.divides(&m, &f3));
        assert_eq!(m.rem(&factor, &f3).unwrap(), UniPoly::zero());

        let f2 = FieldCtx::new(2, 1).unwrap();
        // T^3 + T + 1 is primitive over F_2: order 7.
        assert_eq!(UniPoly::new(vec![1, 1, 0, 1]).order_of_t(&f2, 100), Some(7));
        // T + 1: order 1.
        assert_eq!(UniPoly::new(vec![1, 1]).order_of_t(&f2, 100), Some(1));
        // T^2: T is not a unit.
        assert_eq!(UniPoly::new(vec![0, 0, 1]).order_of_t(&f2, 100), None);
    }

    #[test]
    fn div_rem_reconstructs() {
        let f5 = FieldCtx::new(5, 1).unwrap();
        let a = UniPoly::new(vec![3, 1, 4, 1, 2]);
        let m = UniPoly::new(vec![2, 0, 3]);
        let (quot, rem) = a.div_rem(&m, &f5).unwrap();
        assert!(rem.degree().unwrap_or(0) < 2);
        assert_eq!(quot.mul(&m, &f5).add(&rem, &f5), a);
        assert!(a.div_rem(&UniPoly::zero(), &f5).is_none());
    }
}
