use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::numerics::NumericsError;
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[T]) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::DimensionMismatch {
                op: "from_row_slice",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        Ok(Self {
            rows,
            cols,
            data: data.to_vec(),
        })
    }

    /// Builds from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, NumericsError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(NumericsError::DimensionMismatch {
                    op: "from_rows",
                    left: (rows.len(), cols),
                    right: (1, row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Column vector.
    pub fn column(values: &[T]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn ensure_finite(&self, what: &'static str) -> Result<(), NumericsError> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(NumericsError::NonFinite { what })
        }
    }

    pub fn ensure_square(&self, what: &'static str) -> Result<(), NumericsError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(NumericsError::NotSquare {
                what,
                rows: self.rows,
                cols: self.cols,
            })
        }
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

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, NumericsError> {
        if self.cols != rhs.rows {
            return Err(NumericsError::DimensionMismatch {
                op: "mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, NumericsError> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, NumericsError> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &Self,
        op: &'static str,
        f: impl Fn(T, T) -> T,
    ) -> Result<Self, NumericsError> {
        if self.shape() != rhs.shape() {
            return Err(NumericsError::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>, NumericsError> {
        if v.len() != self.cols {
            return Err(NumericsError::DimensionMismatch {
                op: "mul_vec",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    /// `selfᵀ · v`.
    pub fn tr_mul_vec(&self, v: &[T]) -> Result<Vec<T>, NumericsError> {
        if v.len() != self.rows {
            return Err(NumericsError::DimensionMismatch {
                op: "tr_mul_vec",
                left: (self.cols, self.rows),
                right: (v.len(), 1),
            });
        }
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(T::zero(), |s, x| s + x.abs()))
            .fold(T::zero(), T::max)
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |s, i| s + self[(i, i)])
    }

    /// Replaces `self` with `(self + selfᵀ)/2`.
    pub fn symmetrize(&mut self) {
        let half = T::lit(0.5);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let m = (self[(i, j)] + self[(j, i)]) * half;
                self[(i, j)] = m;
                self[(j, i)] = m;
            }
        }
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Solves `self · X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self, NumericsError> {
        self.ensure_square("solve")?;
        if rhs.rows != self.rows {
            return Err(NumericsError::DimensionMismatch {
                op: "solve",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = a.max_abs().max(T::min_positive_value());
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().partial_cmp(&a[(j, col)].abs()).unwrap())
                .unwrap_or(col);
            if a[(pivot, col)].abs() <= scale * T::epsilon() * T::lit(n as f64) {
                return Err(NumericsError::Singular);
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(col * n + j, pivot * n + j);
                }
                for j in 0..m {
                    b.data.swap(col * m + j, pivot * m + j);
                }
            }
            let p = a[(col, col)];
            for i in (col + 1)..n {
                let f = a[(i, col)] / p;
                if f == T::zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)];
                    a[(i, j)] -= f * v;
                }
                for j in 0..m {
                    let v = b[(col, j)];
                    b[(i, j)] -= f * v;
                }
            }
        }
        for col in (0..n).rev() {
            let p = a[(col, col)];
            for j in 0..m {
                let mut s = b[(col, j)];
                for k in (col + 1)..n {
                    s -= a[(col, k)] * b[(k, j)];
                }
                b[(col, j)] = s / p;
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<Self, NumericsError> {
        self.solve(&Self::identity(self.rows))
    }

    /// Cholesky factor `L` with `L Lᵀ = self`; fails unless symmetric positive definite.
    pub fn cholesky(&self) -> Result<Self, NumericsError> {
        self.ensure_square("cholesky")?;
        let n = self.rows;
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return Err(NumericsError::NotPositiveDefinite { what: "matrix" });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(l)
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.is_square() && self.asymmetry() <= tol * (T::one() + self.max_abs())
    }

    pub fn is_positive_definite(&self) -> bool {
        self.is_symmetric(T::lit(1e-9)) && self.cholesky().is_ok()
    }

    /// Positive semidefinite up to a relative shift of `1e-10·(1 + max|a_ij|)`.
    pub fn is_positive_semidefinite(&self) -> bool {
        if !self.is_symmetric(T::lit(1e-9)) {
            return false;
        }
        let shift = T::tolerance(1e-10, 16.0) * (T::one() + self.max_abs());
        let mut shifted = self.clone();
        for i in 0..self.rows {
            shifted[(i, i)] += shift;
        }
        shifted.cholesky().is_ok()
    }

    /// Writes `block` into `self` with its top-left corner at `(r, c)`.
    pub fn set_block(&mut self, r: usize, c: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r + i, c + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, r: usize, c: usize, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r + i, c + j)];
            }
        }
        out
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

// Operator forms panic on shape mismatch; public entry points validate shapes first.
impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: Self) -> Matrix<T> {
        self.try_mul(rhs).expect("matrix product shape")
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: Self) -> Matrix<T> {
        self.try_add(rhs).expect("matrix sum shape")
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: Self) -> Matrix<T> {
        self.try_sub(rhs).expect("matrix difference shape")
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;

    fn neg(self) -> Matrix<T> {
        self.scale(-T::one())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}", self.rows, self.cols)?;
        f.debug_list()
            .entries((0..self.rows).map(|i| self.row(i)))
            .finish()
    }
}
