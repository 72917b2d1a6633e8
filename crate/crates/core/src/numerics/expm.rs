use crate::numerics::{Matrix, NumericsError};
use crate::scalar::Scalar;

const MAX_TERMS: usize = 64;

/// Discrete step map of a continuous linear system under zero-order hold.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedSystem<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub dt: T,
}

/// Matrix exponential by scaling and squaring around a truncated Taylor series.
///
/// The series is summed until the next term is below `1e-12` of the partial sum
/// (infinity norm); a nilpotent argument therefore terminates exactly.
pub fn expm<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>, NumericsError> {
    m.ensure_square("expm argument")?;
    m.ensure_finite("expm argument")?;
    let n = m.rows();
    let norm = m.norm_inf();
    let half = T::lit(0.5);
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > half {
        scaled_norm = scaled_norm * half;
        squarings += 1;
    }
    let scale = T::lit(0.5f64.powi(squarings as i32));
    let x = m.scale(scale);

    let tol = T::tolerance(1e-12, 1.0);
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    let mut converged = false;
    for k in 1..=MAX_TERMS {
        term = (&term * &x).scale(T::one() / T::lit(k as f64));
        let tn = term.max_abs();
        sum = &sum + &term;
        if tn == T::zero() || tn <= tol * sum.max_abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NumericsError::NonConvergence {
            what: "expm series",
            iterations: MAX_TERMS,
            residual: term.max_abs().to_f64_lossy(),
        });
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum.ensure_finite("expm result")?;
    Ok(sum)
}

/// `A_d = exp(A·dt)`, `B_d = ∫₀^dt exp(Aτ)dτ · B` from one exponential of the
/// augmented matrix `[[A, B], [0, 0]]·dt`.
pub fn zoh_discretize<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    dt: T,
) -> Result<DiscretizedSystem<T>, NumericsError> {
    a.ensure_square("A")?;
    if b.rows() != a.rows() {
        return Err(NumericsError::DimensionMismatch {
            op: "zoh_discretize",
            left: a.shape(),
            right: b.shape(),
        });
    }
    a.ensure_finite("A")?;
    b.ensure_finite("B")?;
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(NumericsError::InvalidArgument(format!(
            "dt must be positive and finite, got {dt}"
        )));
    }
    let n = a.rows();
    let m = b.cols();
    let mut aug = Matrix::zeros(n + m, n + m);
    aug.set_block(0, 0, &a.scale(dt));
    aug.set_block(0, n, &b.scale(dt));
    let e = expm(&aug)?;
    Ok(DiscretizedSystem {
        a: e.block(0, 0, n, n),
        b: e.block(0, n, n, m),
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn zero_dynamics() {
        let d = zoh_discretize(&m(&[&[0.0]]), &m(&[&[1.0]]), 0.1).unwrap();
        assert_eq!(d.a[(0, 0)], 1.0);
        assert!((d.b[(0, 0)] - 0.1).abs() < 1e-16);
    }

    #[test]
    fn double_integrator_is_exact() {
        let d =
            zoh_discretize(&m(&[&[0.0, 1.0], &[0.0, 0.0]]), &m(&[&[0.0], &[1.0]]), 0.01).unwrap();
        assert_eq!(d.a.as_slice(), &[1.0, 0.01, 0.0, 1.0]);
        assert!((d.b[(0, 0)] - 5e-5).abs() <= 1e-20);
        assert_eq!(d.b[(1, 0)], 0.01);
    }

    #[test]
    fn scalar_closed_form() {
        let d = zoh_discretize(&m(&[&[1.0]]), &m(&[&[1.0]]), 0.1).unwrap();
        let e = 0.1f64.exp();
        assert!((d.a[(0, 0)] - e).abs() < 1e-14);
        assert!((d.b[(0, 0)] - (e - 1.0)).abs() < 1e-14);
        assert!((d.a[(0, 0)] - 1.105170918).abs() < 1e-9);
    }

    #[test]
    fn large_argument_uses_squaring() {
        let e = expm(&m(&[&[-20.0]])).unwrap();
        assert!((e[(0, 0)] / (-20.0f64).exp() - 1.0).abs() < 1e-12);
        let rot = expm(&m(&[&[0.0, 3.0], &[-3.0, 0.0]])).unwrap();
        assert!((rot[(0, 0)] - 3.0f64.cos()).abs() < 1e-12);
        assert!((rot[(0, 1)] - 3.0f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(zoh_discretize(&Matrix::<f64>::zeros(2, 3), &Matrix::zeros(2, 1), 0.1).is_err());
        assert!(zoh_discretize(&Matrix::<f64>::zeros(2, 2), &Matrix::zeros(3, 1), 0.1).is_err());
        assert!(zoh_discretize(&m(&[&[f64::NAN]]), &m(&[&[1.0]]), 0.1).is_err());
        assert!(zoh_discretize(&m(&[&[1.0]]), &m(&[&[1.0]]), 0.0).is_err());
    }

    #[test]
    fn single_precision_instance() {
        let a = Matrix::<f32>::from_rows(&[vec![1.0]]).unwrap();
        let d = zoh_discretize(&a, &a, 0.1f32).unwrap();
        assert!((d.a[(0, 0)] - 0.1f32.exp()).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn nilpotent_chain_matches_finite_series(dt in 1e-4f64..0.05, c in -5.0f64..5.0) {
            // Strictly upper triangular 3x3: exp(N) = I + N + N²/2 exactly.
            let a = m(&[&[0.0, c, 1.0], &[0.0, 0.0, c], &[0.0, 0.0, 0.0]]);
            let n = a.scale(dt);
            let n2 = &n * &n;
            let expect = &(&Matrix::identity(3) + &n) + &n2.scale(0.5);
            let got = expm(&n).unwrap();
            for i in 0..3 { for j in 0..3 {
                let tol = 4.0 * f64::EPSILON * (1.0 + expect[(i, j)].abs());
                prop_assert!((got[(i, j)] - expect[(i, j)]).abs() <= tol);
            }}
        }
    }
}
