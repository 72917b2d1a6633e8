use crate::models::ModelError;
use crate::numerics::{Matrix, NumericsError};
use crate::scalar::Scalar;

/// `ẋ = Ax + Bu`, `y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModelParams<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub c: Matrix<T>,
    pub d: Matrix<T>,
}

impl<T: Scalar> LinearModelParams<T> {
    pub fn new(a: Matrix<T>, b: Matrix<T>, c: Matrix<T>, d: Matrix<T>) -> Result<Self, ModelError> {
        let m = Self { a, b, c, d };
        m.validate()?;
        Ok(m)
    }

    /// Full-state output (`C = I`, `D = 0`).
    pub fn state_output(a: Matrix<T>, b: Matrix<T>) -> Result<Self, ModelError> {
        let n = a.rows();
        let m = b.cols();
        Self::new(a, b, Matrix::identity(n), Matrix::zeros(n, m))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.a.ensure_square("A")?;
        let mismatch = |op, l: &Matrix<T>, r: &Matrix<T>| {
            ModelError::Numerics(NumericsError::DimensionMismatch {
                op,
                left: l.shape(),
                right: r.shape(),
            })
        };
        if self.b.rows() != self.a.rows() {
            return Err(mismatch("linear model (A, B)", &self.a, &self.b));
        }
        if self.c.cols() != self.a.cols() {
            return Err(mismatch("linear model (A, C)", &self.a, &self.c));
        }
        if self.d.rows() != self.c.rows() || self.d.cols() != self.b.cols() {
            return Err(mismatch("linear model (C/B, D)", &self.c, &self.d));
        }
        for (m, what) in [
            (&self.a, "A"),
            (&self.b, "B"),
            (&self.c, "C"),
            (&self.d, "D"),
        ] {
            m.ensure_finite(what)?;
        }
        Ok(())
    }

    pub fn state_dim(&self) -> usize {
        self.a.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.rows()
    }
}
