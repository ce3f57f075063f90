//! Minimal dense matrix arithmetic and Gaussian elimination with partial
//! pivoting, sized for normal-equation systems with at most a handful of
//! unknowns.

use crate::error::{Error, Result};
use crate::scalar::{c, Real};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyInput);
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "ragged rows: expected {cols} columns, got {}",
                    row.len()
                )));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::Shape("non-finite matrix entry".into()));
                }
                data.push(v);
            }
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for m in 0..self.cols {
                let a = self.get(i, m);
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(m, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if self.cols != v.len() {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![T::zero(); self.rows];
        for i in 0..self.rows {
            let mut acc = T::zero();
            for j in 0..self.cols {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Solve `self * x = rhs` by Gaussian elimination with partial pivoting.
    ///
    /// A pivot whose magnitude falls below `1e-12` times the matrix
    /// inf-norm is treated as rank deficiency and reported with the
    /// offending column index.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.rows;
        if self.rows != self.cols {
            return Err(Error::Shape(format!("solve requires a square matrix, got {}x{}", self.rows, self.cols)));
        }
        if rhs.len() != n {
            return Err(Error::Shape(format!("rhs length {} does not match system size {n}", rhs.len())));
        }

        // inf-norm of the original matrix anchors the pivot threshold
        let mut max_row_norm = T::zero();
        for i in 0..n {
            let mut s = T::zero();
            for j in 0..n {
                s += self.get(i, j).abs();
            }
            if s > max_row_norm {
                max_row_norm = s;
            }
        }
        let threshold = c::<T>(1e-12) * max_row_norm;

        let mut a = self.clone();
        let mut b = rhs.to_vec();

        for col in 0..n {
            // partial pivoting: largest magnitude in the column
            let mut pivot_row = col;
            let mut pivot_mag = a.get(col, col).abs();
            for r in col + 1..n {
                let mag = a.get(r, col).abs();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = r;
                }
            }
            if pivot_mag <= threshold || pivot_mag == T::zero() {
                return Err(Error::SingularSystem {
                    pivot: col,
                    magnitude: pivot_mag.to_f64().unwrap_or(0.0),
                });
            }
            if pivot_row != col {
                for j in 0..n {
                    let tmp = a.get(col, j);
                    a.set(col, j, a.get(pivot_row, j));
                    a.set(pivot_row, j, tmp);
                }
                b.swap(col, pivot_row);
            }
            let pivot = a.get(col, col);
            for r in col + 1..n {
                let factor = a.get(r, col) / pivot;
                if factor == T::zero() {
                    continue;
                }
                a.set(r, col, T::zero());
                for j in col + 1..n {
                    let v = a.get(r, j) - factor * a.get(col, j);
                    a.set(r, j, v);
                }
                b[r] = b[r] - factor * b[col];
            }
        }

        // back substitution
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..n {
                acc = acc - a.get(i, j) * x[j];
            }
            x[i] = acc / a.get(i, i);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn identity_times_any() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let i = Matrix::<f64>::identity(2);
        assert_eq!(i.matmul(&a).unwrap(), a);
    }

    #[test]
    fn hand_product() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let p = a.matmul(&b).unwrap();
        assert_eq!(p.get(0, 0), 3.0);
        assert_eq!(p.get(1, 0), 7.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = Matrix::<f64>::identity(2);
        let b = Matrix::<f64>::identity(3);
        assert!(matches!(a.matmul(&b), Err(Error::Shape(_))));
    }

    #[test]
    fn solve_identity() {
        let a = Matrix::<f64>::identity(3);
        let x = a.solve(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn solve_diagonal() {
        let a = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let x = a.solve(&[2.0, 8.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn solve_residual_check() {
        // fixed well-conditioned 6x6 system; residual-substitution oracle
        let mut rows = Vec::new();
        let mut seed = 42u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        for i in 0..6 {
            let mut row: Vec<f64> = (0..6).map(|_| next()).collect();
            row[i] += 4.0; // diagonal dominance
            rows.push(row);
        }
        let a = Matrix::from_rows(&rows).unwrap();
        let rhs: Vec<f64> = (0..6).map(|_| next() * 10.0).collect();
        let x = a.solve(&rhs).unwrap();
        let ax = a.mul_vec(&x).unwrap();
        let rhs_norm = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..6 {
            assert!((ax[i] - rhs[i]).abs() <= 1e-8 * (1.0 + rhs_norm));
        }
    }

    #[test]
    fn duplicated_column_rejected() {
        let a = Matrix::from_rows(&[
            vec![1.0, 1.0, 2.0],
            vec![3.0, 3.0, 4.0],
            vec![5.0, 5.0, 6.0],
        ])
        .unwrap();
        assert!(matches!(a.solve(&[1.0, 2.0, 3.0]), Err(Error::SingularSystem { .. })));
    }
}
