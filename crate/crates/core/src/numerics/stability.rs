use num_complex::Complex;

use crate::numerics::{eigenvalues, Matrix, NumericsError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StabilityKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCertificate<T> {
    pub eigenvalues: Vec<Complex<T>>,
    pub stable: bool,
    pub kind: StabilityKind,
}

impl<T: Scalar> StabilityCertificate<T> {
    pub fn from_eigenvalues(eigenvalues: Vec<Complex<T>>, kind: StabilityKind) -> Self {
        let stable = match kind {
            StabilityKind::Continuous => eigenvalues.iter().all(|z| z.re < T::zero()),
            StabilityKind::Discrete => eigenvalues.iter().all(|z| z.norm() < T::one()),
        };
        Self {
            eigenvalues,
            stable,
            kind,
        }
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> T {
        self.eigenvalues
            .iter()
            .fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Largest real part (the continuous-time stability margin, negated).
    pub fn max_real_part(&self) -> T {
        self.eigenvalues
            .iter()
            .fold(T::neg_infinity(), |m, z| m.max(z.re))
    }
}

/// Eigenvalues of the closed loop `A − B·K` judged by `kind`'s rule.
pub fn certify_stability<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    k: &Matrix<T>,
    kind: StabilityKind,
) -> Result<StabilityCertificate<T>, NumericsError> {
    a.ensure_square("A")?;
    if b.rows() != a.rows() || k.rows() != b.cols() || k.cols() != a.cols() {
        return Err(NumericsError::DimensionMismatch {
            op: "certify_stability",
            left: b.shape(),
            right: k.shape(),
        });
    }
    let closed = a.try_sub(&b.try_mul(k)?)?;
    Ok(StabilityCertificate::from_eigenvalues(
        eigenvalues(&closed)?,
        kind,
    ))
}

pub fn spectral_radius<T: Scalar>(m: &Matrix<T>) -> Result<T, NumericsError> {
    Ok(eigenvalues(m)?
        .iter()
        .fold(T::zero(), |acc, z| acc.max(z.norm())))
}
