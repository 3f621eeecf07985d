//! Dense matrices, a cyclic Jacobi eigensolver for symmetric matrices, and
//! pairwise squared distances.

use std::ops::{Index, IndexMut};

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
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
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Panics on shape mismatch.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(self.cols, x.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn norm_frobenius(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    fn off_diagonal_norm(&self) -> T {
        let mut s = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    s = s + self[(i, j)] * self[(i, j)];
                }
            }
        }
        s.sqrt()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues sorted non-increasing, eigenvector `k` in column `k`.
///
/// Each eigenvector is signed so that its largest-magnitude entry (the
/// first one, on ties) is positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenDecomposition<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Matrix<T>,
    pub sweeps: usize,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn eigenvector(&self, k: usize) -> Vec<T> {
        self.eigenvectors.column(k)
    }

    /// `V diag(lambda) V^T`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let v = &self.eigenvectors;
        v.matmul(&Matrix::from_diagonal(&self.eigenvalues))
            .matmul(&v.transpose())
    }
}

pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Stops once the off-diagonal Frobenius norm drops to `1e-12 * ||A||_F`
/// (or a few ulps of the scalar type, whichever is larger), giving up after
/// [`MAX_JACOBI_SWEEPS`] sweeps.
pub fn eigen_symmetric<T: Scalar>(a: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    let n = a.rows();
    if n == 0 || a.cols() != n {
        return Err(Error::InvalidArgument(format!(
            "eigen_symmetric needs a non-empty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let sym_tol = T::of(1e-10).max(T::epsilon() * T::of(64.0)) * T::one().max(a.max_abs());
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = (a[(i, j)] - a[(j, i)]).abs();
            if diff > sym_tol || diff.is_nan() {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    diff: diff.as_f64(),
                });
            }
        }
    }

    let mut m = a.clone();
    // symmetrize exactly so rotations see one value per pair
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)]) / T::of(2.0);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let mut v = Matrix::identity(n);
    let rel_tol = T::of(1e-12).max(T::epsilon() * T::of(8.0));
    let threshold = rel_tol * m.norm_frobenius();

    let mut sweeps = 0;
    loop {
        let off = m.off_diagonal_norm();
        if off <= threshold {
            break;
        }
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off.as_f64(),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(j, j)]
            .partial_cmp(&m[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<T> = order.iter().map(|&k| m[(k, k)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut pivot = 0;
        for i in 1..n {
            if v[(i, src)].abs() > v[(pivot, src)].abs() {
                pivot = i;
            }
        }
        let sign = if v[(pivot, src)] < T::zero() {
            -T::one()
        } else {
            T::one()
        };
        for i in 0..n {
            eigenvectors[(i, dst)] = sign * v[(i, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

// One Jacobi rotation zeroing m[p][q]; accumulates the rotation into v.
fn rotate<T: Scalar>(m: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == T::zero() {
        return;
    }
    let n = m.rows();
    let two = T::of(2.0);
    let tau = (m[(q, q)] - m[(p, p)]) / (two * apq);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    for k in 0..n {
        let (x, y) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = c * x - s * y;
        m[(k, q)] = s * x + c * y;
    }
    for k in 0..n {
        let (x, y) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = c * x - s * y;
        m[(q, k)] = s * x + c * y;
    }
    m[(p, q)] = T::zero();
    m[(q, p)] = T::zero();
    for k in 0..n {
        let (x, y) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * x - s * y;
        v[(k, q)] = s * x + c * y;
    }
}

pub fn sq_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Squared Euclidean distances between all rows of `rows`.
pub fn pairwise_sq_distances_rows<T: Scalar>(rows: &[Vec<T>]) -> Matrix<T> {
    let n = rows.len();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sq_distance(&rows[i], &rows[j]);
            out[(i, j)] = d;
            out[(j, i)] = d;
        }
    }
    out
}

/// Squared Euclidean distances between all samples of `data`.
pub fn pairwise_sq_distances<T: Scalar>(data: &Dataset<T>) -> Matrix<T> {
    pairwise_sq_distances_rows(&data.rows())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_eigenvalues() {
        let e = eigen_symmetric(&Matrix::<f64>::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert_eq!(e.eigenvectors, Matrix::identity(3));
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn diagonal_case_sorted_axis_aligned() {
        let a = Matrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let e = eigen_symmetric(&a).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.eigenvector(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(e.eigenvector(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(e.eigenvector(2), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two_known() {
        // eigenvalues 3 and 1, eigenvectors (1,1)/sqrt2 and (1,-1)/sqrt2
        let a = Matrix::from_rows(&[vec![2.0_f64, 1.0], vec![1.0, 2.0]]);
        let e = eigen_symmetric(&a).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.eigenvector(0);
        assert!((v0[0] - h).abs() < 1e-12 && (v0[1] - h).abs() < 1e-12);
        let v1 = e.eigenvector(1);
        // largest-magnitude entry positive; first one wins the tie
        assert!((v1[0] - h).abs() < 1e-12 && (v1[1] + h).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_symmetric() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(
            eigen_symmetric(&a),
            Err(Error::NotSymmetric { row: 0, col: 1, .. })
        ));
        assert!(eigen_symmetric(&Matrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let e = eigen_symmetric(&Matrix::<f64>::zeros(4, 4)).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0; 4]);
    }

    #[test]
    fn single_precision_solve() {
        let a = Matrix::from_rows(&[
            vec![4.0_f32, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 1.0],
        ]);
        let e = eigen_symmetric(&a).unwrap();
        let r = e.reconstruct();
        for i in 0..3 {
            for j in 0..3 {
                assert!((r[(i, j)] - a[(i, j)]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn three_four_five() {
        let d = pairwise_sq_distances_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]);
        assert_eq!(d[(0, 1)], 25.0);
        assert_eq!(d[(1, 0)], 25.0);
        assert_eq!(d[(0, 0)], 0.0);
    }
}
