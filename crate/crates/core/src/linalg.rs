//! Exact dense linear algebra: ranks, kernels, subspace lattice operations.
//!
//! Basis matrices of subspaces are always kept in reduced row-echelon form,
//! so two subspaces are equal iff their basis matrices are equal.

use crate::error::JsError;
use crate::scalar::Scalar;


/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Build from a closure over (row, col).
    pub fn build(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vec(&self, r: usize) -> Vec<T> {
        self.row(r).to_vec()
    }

    pub fn push_row(&mut self, row: Vec<T>) {
        assert_eq!(row.len(), self.cols);
        self.data.extend(row);
        self.rows += 1;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        Matrix::build(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    /// Matrix product, skipping zero entries of `self` (the δ/symbol matrices
    /// handled here are very sparse).
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(r, c).clone();
                    out.set(r, c, cur + a.clone() * b.clone());
                }
            }
        }
        out
    }

    pub fn stack_vertical(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Apply the matrix to a vector on the right: `self * v`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                let mut acc = T::zero();
                for c in 0..self.cols {
                    let a = self.get(r, c);
                    if !a.is_zero() && !v[c].is_zero() {
                        acc = acc + a.clone() * v[c].clone();
                    }
                }
                acc
            })
            .collect()
    }

    /// In-place reduction to reduced row-echelon form; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut pr = 0usize;
        for col in 0..self.cols {
            if pr >= self.rows {
                break;
            }
            // find a pivot row
            let mut found = None;
            for r in pr..self.rows {
                if !self.get(r, col).is_zero() {
                    found = Some(r);
                    break;
                }
            }
            let Some(prow) = found else { continue };
            self.swap_rows(pr, prow);
            // normalize
            let inv = T::one() / self.get(pr, col).clone();
            for c in col..self.cols {
                let v = self.get(pr, c).clone() * inv.clone();
                self.set(pr, c, v);
            }
            // eliminate everywhere else
            for r in 0..self.rows {
                if r == pr {
                    continue;
                }
                let f = self.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for c in col..self.cols {
                    let v = self.get(r, c).clone() - f.clone() * self.get(pr, c).clone();
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            pr += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Row rank by exact elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis (as rows, in RREF) of the right kernel {v : M v = 0}.
    pub fn kernel_basis(&self) -> Matrix<T> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: Vec<bool> = {
            let mut s = vec![false; self.cols];
            for &p in &pivots {
                s[p] = true;
            }
            s
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free] {
                continue;
            }
            let mut v = vec![T::zero(); self.cols];
            v[free] = T::one();
            for (ri, &p) in pivots.iter().enumerate() {
                v[p] = T::zero() - m.get(ri, free).clone();
            }
            basis.push(v);
        }
        let mut out = Matrix::from_rows(basis);
        if out.rows == 0 {
            out = Matrix {
                rows: 0,
                cols: self.cols,
                data: vec![],
            };
        } else {
            out.rref();
        }
        out
    }
}

/// Subspace of `T^ambient`, stored with an RREF basis (rows independent).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<T> {
    ambient: usize,
    basis: Matrix<T>,
}

impl<T: Scalar> Subspace<T> {
    /// Span of the given rows (dependencies and zero rows are dropped).
    pub fn from_spanning(ambient: usize, rows: Matrix<T>) -> Self {
        assert_eq!(rows.cols(), ambient, "row length != ambient dim");
        let mut m = rows;
        let pivots = m.rref();
        let rank = pivots.len();
        let basis = Matrix {
            rows: rank,
            cols: ambient,
            data: m.data[..rank * ambient].to_vec(),
        };
        Subspace { ambient, basis }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix {
                rows: 0,
                cols: ambient,
                data: vec![],
            },
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix::identity(ambient),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    pub fn basis(&self) -> &Matrix<T> {
        &self.basis
    }

    pub fn contains_vec(&self, v: &[T]) -> bool {
        self.coordinates_of(v).is_some()
    }

    pub fn contains(&self, other: &Subspace<T>) -> bool {
        (0..other.dim()).all(|r| self.contains_vec(other.basis.row(r)))
    }

    /// Coordinates of `v` in the RREF basis, if `v` lies in the subspace.
    pub fn coordinates_of(&self, v: &[T]) -> Option<Vec<T>> {
        assert_eq!(v.len(), self.ambient);
        // With an RREF basis the coordinate of basis row i is just v at that
        // row's pivot column (the row's first nonzero entry); then verify the
        // reconstruction.
        let mut coords = Vec::with_capacity(self.dim());
        for r in 0..self.dim() {
            let pivot = (0..self.ambient).find(|&c| !self.basis.get(r, c).is_zero())?;
            coords.push(v[pivot].clone());
        }
        // verify
        for c in 0..self.ambient {
            let mut acc = T::zero();
            for r in 0..self.dim() {
                if !coords[r].is_zero() && !self.basis.get(r, c).is_zero() {
                    acc = acc + coords[r].clone() * self.basis.get(r, c).clone();
                }
            }
            if acc != v[c] {
                return None;
            }
        }
        Some(coords)
    }

    pub fn sum(&self, other: &Subspace<T>) -> Result<Subspace<T>, JsError> {
        if self.ambient != other.ambient {
            return Err(JsError::AmbientMismatch(self.ambient, other.ambient));
        }
        Ok(Subspace::from_spanning(
            self.ambient,
            self.basis.stack_vertical(&other.basis),
        ))
    }

    /// Intersection via the kernel of the stacked coefficient system.
    pub fn intersect(&self, other: &Subspace<T>) -> Result<Subspace<T>, JsError> {
        if self.ambient != other.ambient {
            return Err(JsError::AmbientMismatch(self.ambient, other.ambient));
        }
        let a = self.dim();
        let b = other.dim();
        if a == 0 || b == 0 {
            return Ok(Subspace::zero(self.ambient));
        }
        // unknowns (x, y) with x^T A = y^T B, i.e. A^T x - B^T y = 0
        let sys = Matrix::build(self.ambient, a + b, |r, c| {
            if c < a {
                self.basis.get(c, r).clone()
            } else {
                T::zero() - other.basis.get(c - a, r).clone()
            }
        });
        let ker = sys.kernel_basis();
        let mut rows = Vec::new();
        for k in 0..ker.rows() {
            let z = ker.row(k);
            let mut v = vec![T::zero(); self.ambient];
            for (i, coef) in z[..a].iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                for c in 0..self.ambient {
                    if !self.basis.get(i, c).is_zero() {
                        v[c] = v[c].clone() + coef.clone() * self.basis.get(i, c).clone();
                    }
                }
            }
            rows.push(v);
        }
        if rows.is_empty() {
            return Ok(Subspace::zero(self.ambient));
        }
        Ok(Subspace::from_spanning(self.ambient, Matrix::from_rows(rows)))
    }

    /// Image of the subspace under the linear map `m` (acting on row vectors
    /// as `v * m^T`, i.e. `m` maps ambient -> m.rows()).
    pub fn image_under(&self, m: &Matrix<T>) -> Subspace<T> {
        assert_eq!(m.cols(), self.ambient);
        let rows: Vec<Vec<T>> = (0..self.dim()).map(|r| m.apply(self.basis.row(r))).collect();
        if rows.is_empty() {
            return Subspace::zero(m.rows());
        }
        Subspace::from_spanning(m.rows(), Matrix::from_rows(rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, ratz, Rat, RatMatrix, RatSubspace};
    use proptest::prelude::*;

    fn m(rows: Vec<Vec<i64>>) -> RatMatrix {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(ratz).collect())
                .collect(),
        )
    }

    #[test]
    fn rank_identity_and_zero() {
        assert_eq!(RatMatrix::identity(2).rank(), 2);
        assert_eq!(RatMatrix::zeros(3, 4).rank(), 0);
    }

    #[test]
    fn rank_dependent_rows() {
        assert_eq!(m(vec![vec![1, 2], vec![2, 4]]).rank(), 1);
    }

    #[test]
    fn kernel_of_identity_is_zero() {
        assert_eq!(RatMatrix::identity(3).kernel_basis().rows(), 0);
    }

    #[test]
    fn kernel_of_single_row() {
        let k = m(vec![vec![1, 1]]).kernel_basis();
        assert_eq!(k.rows(), 1);
        // RREF normalizes to (1, -1)
        assert_eq!(k.row_vec(0), vec![ratz(1), ratz(-1)]);
    }

    #[test]
    fn kernel_of_zero_matrix_is_full() {
        assert_eq!(RatMatrix::zeros(2, 3).kernel_basis().rows(), 3);
    }

    #[test]
    fn intersect_examples() {
        let a = RatSubspace::from_spanning(2, m(vec![vec![1, 0]]));
        let b = RatSubspace::from_spanning(2, m(vec![vec![0, 1]]));
        assert_eq!(a.intersect(&b).unwrap().dim(), 0);
        assert_eq!(a.intersect(&a).unwrap(), a);

        let plane = RatSubspace::from_spanning(2, m(vec![vec![1, 0], vec![0, 1]]));
        let diag = RatSubspace::from_spanning(2, m(vec![vec![1, 1]]));
        assert_eq!(plane.intersect(&diag).unwrap(), diag);
    }

    #[test]
    fn intersect_ambient_mismatch() {
        let a = RatSubspace::full(2);
        let b = RatSubspace::full(3);
        assert!(a.intersect(&b).is_err());
    }

    #[test]
    fn coordinates_roundtrip() {
        let s = RatSubspace::from_spanning(3, m(vec![vec![1, 0, 1], vec![0, 1, 1]]));
        let v = vec![ratz(2), ratz(3), ratz(5)];
        let c = s.coordinates_of(&v).unwrap();
        assert_eq!(c, vec![ratz(2), ratz(3)]);
        assert!(s.coordinates_of(&[ratz(0), ratz(0), ratz(1)]).is_none());
    }

    fn arb_matrix() -> impl Strategy<Value = RatMatrix> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-5i64..6, r * c).prop_map(move |vals| {
                RatMatrix::build(r, c, |i, j| ratz(vals[i * c + j]))
            })
        })
    }

    proptest! {
        #[test]
        fn rank_equals_transpose_rank(mat in arb_matrix()) {
            prop_assert_eq!(mat.rank(), mat.transpose().rank());
        }

        #[test]
        fn rank_nullity(mat in arb_matrix()) {
            prop_assert_eq!(mat.rank() + mat.kernel_basis().rows(), mat.cols());
        }

        #[test]
        fn kernel_annihilates(mat in arb_matrix()) {
            let k = mat.kernel_basis();
            for r in 0..k.rows() {
                let image = mat.apply(k.row(r));
                prop_assert!(image.iter().all(|x: &Rat| x == &rat(0, 1)));
            }
        }

        #[test]
        fn intersect_commutes(a in arb_matrix(), b in arb_matrix()) {
            let n = 4;
            let pad = |mt: &RatMatrix| {
                RatMatrix::build(mt.rows(), n, |r, c| {
                    if c < mt.cols() { mt.get(r, c).clone() } else { rat(0,1) }
                })
            };
            let sa = RatSubspace::from_spanning(n, pad(&a));
            let sb = RatSubspace::from_spanning(n, pad(&b));
            prop_assert_eq!(sa.intersect(&sb).unwrap(), sb.intersect(&sa).unwrap());
        }
    }
}
