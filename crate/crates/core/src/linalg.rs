//! Dense linear algebra over a [`FieldCtx`]: rank, inversion, and an
//! incremental span that reports the first linear dependence.

use crate::ff::{Elem, FieldCtx};

/// Rank of the matrix whose rows are `rows` (all of equal length).
pub fn rank(rows: &[Vec<Elem>], f: &FieldCtx) -> usize {
    let mut m: Vec<Vec<Elem>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, piv);
        let inv = f.inv_or_zero(m[rank][c]);
        for v in m[rank].iter_mut() {
            *v = f.mul(*v, inv);
        }
        let pivot_row = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let k = row[c];
                for (x, &p) in row.iter_mut().zip(&pivot_row) {
                    *x = f.sub(*x, f.mul(k, p));
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Inverse of a square matrix, `None` when singular.
pub fn invert(m: &[Vec<Elem>], f: &FieldCtx) -> Option<Vec<Vec<Elem>>> {
    let n = m.len();
    let mut a: Vec<Vec<Elem>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| Elem::from(i == j)));
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&i| a[i][c] != 0)?;
        a.swap(c, piv);
        let inv = f.inv_or_zero(a[c][c]);
        for v in a[c].iter_mut() {
            *v = f.mul(*v, inv);
        }
        let pivot_row = a[c].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != c && row[c] != 0 {
                let k = row[c];
                for (x, &p) in row.iter_mut().zip(&pivot_row) {
                    *x = f.sub(*x, f.mul(k, p));
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Determinant of a square matrix by elimination.
pub fn det(m: &[Vec<Elem>], f: &FieldCtx) -> Elem {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d: Elem = 1;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&i| a[i][c] != 0) else { return 0 };
        if piv != c {
            a.swap(c, piv);
            d = f.neg(d);
        }
        d = f.mul(d, a[c][c]);
        let inv = f.inv_or_zero(a[c][c]);
        for i in c + 1..n {
            if a[i][c] != 0 {
                let k = f.mul(a[i][c], inv);
                for j in c..n {
                    let t = f.mul(k, a[c][j]);
                    a[i][j] = f.sub(a[i][j], t);
                }
            }
        }
    }
    d
}

/// Matrix product `a * b`.
pub fn mat_mul(a: &[Vec<Elem>], b: &[Vec<Elem>], f: &FieldCtx) -> Vec<Vec<Elem>> {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).fold(0, |acc, (&x, brow)| f.add(acc, f.mul(x, brow[j]))))
                .collect()
        })
        .collect()
}

/// Vectors added one at a time; each addition either extends the span or
/// returns the coefficients expressing the new vector in terms of the
/// previously accepted ones.
#[derive(Debug, Clone)]
pub struct IncrementalSpan {
    /// Reduced rows with their pivot column and the combination of accepted
    /// vectors they equal.
    rows: Vec<(usize, Vec<Elem>, Vec<Elem>)>,
    accepted: usize,
}

impl IncrementalSpan {
    pub fn new() -> Self {
        Self { rows: Vec::new(), accepted: 0 }
    }

    pub fn dim(&self) -> usize {
        self.accepted
    }

    /// Returns `Some(c)` with `v = Σ c_i v_i` over the accepted vectors when
    /// `v` is dependent; otherwise accepts `v` and returns `None`.
    pub fn insert(&mut self, v: &[Elem], f: &FieldCtx) -> Option<Vec<Elem>> {
        let mut v = v.to_vec();
        // combo tracks v_original - Σ combo_i v_i = current v.
        let mut combo = vec![0 as Elem; self.accepted + 1];
        for (piv, row, rc) in &self.rows {
            let k = v[*piv];
            if k == 0 {
                continue;
            }
            for (x, &r) in v.iter_mut().zip(row) {
                *x = f.sub(*x, f.mul(k, r));
            }
            for (c, &r) in combo.iter_mut().zip(rc) {
                *c = f.add(*c, f.mul(k, r));
            }
        }
        match v.iter().position(|&x| x != 0) {
            None => {
                combo.truncate(self.accepted);
                Some(combo)
            }
            Some(piv) => {
                let inv = f.inv_or_zero(v[piv]);
                for x in v.iter_mut() {
                    *x = f.mul(*x, inv);
                }
                // The new row equals inv * (v_new - Σ combo_i v_i).
                let mut rc: Vec<Elem> = combo[..self.accepted].iter().map(|&c| f.neg(f.mul(c, inv))).collect();
                rc.push(inv);
                for (_, row, c) in self.rows.iter_mut() {
                    c.resize(self.accepted + 1, 0);
                    let k = row[piv];
                    if k != 0 {
                        for (x, &r) in row.iter_mut().zip(&v) {
                            *x = f.sub(*x, f.mul(k, r));
                        }
                        for (x, &r) in c.iter_mut().zip(&rc) {
                            *x = f.sub(*x, f.mul(k, r));
                        }
                    }
                }
                self.rows.push((piv, v, rc));
                self.accepted += 1;
                None
            }
        }
    }
}

impl Default for IncrementalSpan {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_and_inverse() {
        let f3 = FieldCtx::new(3, 1).unwrap();
        let m = vec![vec![1, 2, 0], vec![2, 1, 0], vec![0, 0, 1]];
        // Second row is twice the first.
        assert_eq!(rank(&m, &f3), 2);
        assert_eq!(det(&m, &f3), 0);
        let sing = vec![vec![1, 2, 0], vec![2, 1, 0], vec![0, 0, 0]];
        assert_eq!(rank(&sing, &f3), 1);
        assert!(invert(&sing, &f3).is_none());
        let a = vec![vec![1, 1, 0], vec![0, 1, 2], vec![1, 0, 2]];
        let inv = invert(&a, &f3).unwrap();
        let id = mat_mul(&a, &inv, &f3);
        assert_eq!(id, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn span_reports_relation() {
        let f5 = FieldCtx::new(5, 1).unwrap();
        let mut s = IncrementalSpan::new();
        assert!(s.insert(&[1, 0, 2], &f5).is_none());
        assert!(s.insert(&[0, 1, 3], &f5).is_none());
        // 2*(1,0,2) + 3*(0,1,3) = (2,3,13) = (2,3,3).
        assert_eq!(s.insert(&[2, 3, 3], &f5), Some(vec![2, 3]));
        assert_eq!(s.insert(&[0, 0, 0], &f5), Some(vec![0, 0]));
    }

    proptest! {
        #[test]
        fn span_relation_reconstructs(vs in proptest::collection::vec(proptest::collection::vec(0u8..3, 4), 1..8)) {
            let f = FieldCtx::new(3, 1).unwrap();
            let mut s = IncrementalSpan::new();
            let mut acc: Vec<Vec<Elem>> = Vec::new();
            for v in &vs {
                match s.insert(v, &f) {
                    None => acc.push(v.clone()),
                    Some(c) => {
                        let mut sum = vec![0; 4];
                        for (ci, a) in c.iter().zip(&acc) {
                            for (x, &y) in sum.iter_mut().zip(a) {
                                *x = f.add(*x, f.mul(*ci, y));
                            }
                        }
                        prop_assert_eq!(&sum, v);
                    }
                }
            }
            prop_assert_eq!(s.dim(), rank(&vs, &f));
        }

        #[test]
        fn det_matches_invertibility(m in proptest::collection::vec(proptest::collection::vec(0u8..4, 3), 3)) {
            let f = FieldCtx::new(2, 2).unwrap();
            let d = det(&m, &f);
            prop_assert_eq!(d != 0, invert(&m, &f).is_some());
            prop_assert_eq!(d != 0, rank(&m, &f) == 3);
        }
    }
}
