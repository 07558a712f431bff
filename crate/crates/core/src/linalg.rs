//! Dense exact linear algebra over the rationals.

use crate::scalar::{rat_to_f64, Rat};
use num::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Matrix whose columns are the given vectors of length `rows`.
    pub fn from_columns(rows: usize, cols: &[Vec<Rat>]) -> Self {
        let mut m = RatMatrix::zeros(rows, cols.len());
        for (j, v) in cols.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        RatMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        RatMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &Rat) -> RatMatrix {
        RatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| rat_to_f64(self.get(i, j))).collect()).collect()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).recip();
            for j in 0..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = m.get(i, j) - &f * m.get(r, j);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rat::zero(); self.cols];
                v[f] = Rat::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(row, f).clone();
                }
                v
            })
            .collect()
    }

    /// Inverse of a square nonsingular matrix.
    pub fn inverse(&self) -> Option<RatMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = RatMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Rat::one());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    /// Moore–Penrose pseudoinverse through a full-rank factorization
    /// `M = C F`, with `M⁺ = Fᵀ (F Fᵀ)⁻¹ (Cᵀ C)⁻¹ Cᵀ`.
    pub fn pseudoinverse(&self) -> RatMatrix {
        let (r, pivots) = self.rref();
        let k = pivots.len();
        if k == 0 {
            return RatMatrix::zeros(self.cols, self.rows);
        }
        let mut f = RatMatrix::zeros(k, self.cols);
        for i in 0..k {
            for j in 0..self.cols {
                f.set(i, j, r.get(i, j).clone());
            }
        }
        let mut c = RatMatrix::zeros(self.rows, k);
        for (jj, &p) in pivots.iter().enumerate() {
            for i in 0..self.rows {
                c.set(i, jj, self.get(i, p).clone());
            }
        }
        let ft = f.transpose();
        let ct = c.transpose();
        let ffi = f.mul(&ft).inverse().expect("full row rank factor");
        let cci = ct.mul(&c).inverse().expect("full column rank factor");
        ft.mul(&ffi).mul(&cci).mul(&ct)
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

/// Orthogonalizes without normalizing, so the result stays rational.
pub fn gram_schmidt(vectors: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let mut out: Vec<Vec<Rat>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &out {
            let f = dot(&w, b) / dot(b, b);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= &f * bi;
            }
        }
        if w.iter().any(|x| !x.is_zero()) {
            out.push(w);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat_int(x)).collect()).collect())
    }

    #[test]
    fn nullspace_annihilated() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        let v = RatMatrix::from_columns(3, &ns);
        assert!(a.mul(&v).is_zero());
    }

    #[test]
    fn inverse_of_singular_is_none() {
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.mul(&a.inverse().unwrap()), RatMatrix::identity(2));
    }

    proptest! {
        #[test]
        fn pseudoinverse_penrose_conditions(entries in proptest::collection::vec(-3i64..4, 12), rows in 1usize..5) {
            let cols = 12 / rows.max(1);
            let data: Vec<Vec<Rat>> = (0..rows)
                .map(|i| (0..cols).map(|j| rat_int(entries[(i * cols + j) % 12])).collect())
                .collect();
            let a = RatMatrix::from_rows(data);
            let p = a.pseudoinverse();
            prop_assert_eq!(a.mul(&p).mul(&a), a.clone());
            prop_assert_eq!(p.mul(&a).mul(&p), p.clone());
            let ap = a.mul(&p);
            prop_assert_eq!(ap.transpose(), ap);
            let pa = p.mul(&a);
            prop_assert_eq!(pa.transpose(), pa);
        }

        #[test]
        fn gram_schmidt_orthogonal(entries in proptest::collection::vec(-4i64..5, 9)) {
            let vs: Vec<Vec<Rat>> = entries.chunks(3).map(|c| c.iter().map(|&x| rat_int(x)).collect()).collect();
            let out = gram_schmidt(&vs);
            for i in 0..out.len() {
                for j in 0..i {
                    prop_assert!(dot(&out[i], &out[j]).is_zero());
                }
            }
            let rank = RatMatrix::from_rows(vs).rank();
            prop_assert_eq!(out.len(), rank);
        }
    }
}
