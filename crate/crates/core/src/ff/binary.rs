use super::{is_irreducible, smallest_irreducible, FieldError};

/// `GF(2^r)` for `r <= 16` without lookup tables.
///
/// Used where a univariate map has to be checked over binary fields larger
/// than the table-backed [`super::FieldCtx`] supports. Elements are bit
/// vectors of residue polynomials, bit `i` holding the coefficient of `x^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryExtField {
    r: u32,
    modulus: u32,
}

impl BinaryExtField {
    pub const MAX_DEGREE: u32 = 16;

    /// Uses the same moduli as [`super::FieldCtx::new`] for `r <= 5`, and the
    /// smallest irreducible polynomial otherwise.
    pub fn new(r: u32) -> Result<Self, FieldError> {
        if r == 0 {
            return Err(FieldError::ZeroDegree);
        }
        if r > Self::MAX_DEGREE {
            return Err(FieldError::TooLarge { p: 2, r });
        }
        let coeffs: Vec<u32> = match r {
            1 => vec![0, 1],
            2..=5 => super::FieldCtx::new(2, r)?.modulus().to_vec(),
            _ => smallest_irreducible(2, r),
        };
        debug_assert!(is_irreducible(2, &coeffs));
        let modulus = coeffs.iter().enumerate().fold(0u32, |acc, (i, &c)| acc | (c << i));
        Ok(Self { r, modulus })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn size(&self) -> u32 {
        1 << self.r
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, mut a: u32, mut b: u32) -> u32 {
        let top = 1u32 << self.r;
        let mut acc = 0;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.modulus;
            }
        }
        acc
    }

    /// Evaluates a polynomial with `F_2` coefficients given as the set of
    /// exponents carrying a 1.
    pub fn eval_sparse(&self, exponents: &[u32], x: u32) -> u32 {
        let max = exponents.iter().copied().max().unwrap_or(0);
        let mut acc = 0;
        let mut pow = 1;
        for e in 0..=max {
            if exponents.contains(&e) {
                acc ^= pow;
            }
            pow = self.mul(pow, x);
        }
        acc
    }

    /// True iff `x -> sum x^e` permutes the field, by evaluating every element.
    pub fn is_permutation(&self, exponents: &[u32]) -> bool {
        let size = self.size() as usize;
        let mut seen = vec![false; size];
        for x in 0..size as u32 {
            let y = self.eval_sparse(exponents, x) as usize;
            if std::mem::replace(&mut seen[y], true) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldCtx;

    #[test]
    fn matches_table_field_for_small_degrees() {
        for r in 1..=5 {
            let table = FieldCtx::new(2, r).unwrap();
            let bin = BinaryExtField::new(r).unwrap();
            for a in 0..table.q() as u32 {
                for b in 0..table.q() as u32 {
                    assert_eq!(bin.mul(a, b), table.mul(a as u8, b as u8) as u32);
                }
            }
        }
    }

    #[test]
    fn multiplicative_group_has_full_order() {
        for r in [6, 9, 12] {
            let f = BinaryExtField::new(r).unwrap();
            // x^(2^r - 1) = 1 for every nonzero x, checked on a few elements.
            for x in [1, 2, 3, 0b1011, f.size() - 1] {
                let mut acc = 1;
                for _ in 0..f.size() - 1 {
                    acc = f.mul(acc, x);
                }
                assert_eq!(acc, 1);
            }
        }
    }

    #[test]
    fn x_cubed_plus_x_plus_one_kills_injectivity_over_f8() {
        let f8 = BinaryExtField::new(3).unwrap();
        assert!(!f8.is_permutation(&[4, 2, 1]));
        assert!(BinaryExtField::new(2).unwrap().is_permutation(&[4, 2, 1]));
    }
}
