use crate::numerics::{Matrix, NumericsError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DareMethod {
    /// One Riccati step per iteration, starting from `P₀ = Q`.
    FixedPoint,
    /// Doubling iteration: iterate `k` equals `2^k` Riccati steps from `P = 0`.
    /// Same fixed point; converges quadratically when the closed loop is slow.
    Doubling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DareOptions {
    /// Stop when the largest elementwise change of `P` drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub method: DareMethod,
}

impl Default for DareOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100_000,
            method: DareMethod::FixedPoint,
        }
    }
}

impl DareOptions {
    pub fn doubling() -> Self {
        Self {
            max_iterations: 200,
            method: DareMethod::Doubling,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DareSolution<T> {
    pub p: Matrix<T>,
    pub k: Matrix<T>,
    pub iterations: usize,
    /// `‖P − dare_rhs(P)‖∞` at the returned `P`.
    pub residual: T,
}

fn check_inputs<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
) -> Result<(), NumericsError> {
    a.ensure_square("A_d")?;
    q.ensure_square("Q")?;
    r.ensure_square("R")?;
    let n = a.rows();
    if b.rows() != n {
        return Err(NumericsError::DimensionMismatch {
            op: "solve_dare (A, B)",
            left: a.shape(),
            right: b.shape(),
        });
    }
    if q.rows() != n {
        return Err(NumericsError::DimensionMismatch {
            op: "solve_dare (A, Q)",
            left: a.shape(),
            right: q.shape(),
        });
    }
    if r.rows() != b.cols() {
        return Err(NumericsError::DimensionMismatch {
            op: "solve_dare (B, R)",
            left: b.shape(),
            right: r.shape(),
        });
    }
    for (m, what) in [(a, "A_d"), (b, "B_d"), (q, "Q"), (r, "R")] {
        m.ensure_finite(what)?;
    }
    if !r.is_positive_definite() {
        return Err(NumericsError::NotPositiveDefinite { what: "R" });
    }
    if !q.is_positive_semidefinite() {
        return Err(NumericsError::NotPositiveSemidefinite { what: "Q" });
    }
    Ok(())
}

/// One Riccati step; returns `(AᵀPA − AᵀPB(R+BᵀPB)⁻¹BᵀPA + Q, (R+BᵀPB)⁻¹BᵀPA)`.
fn riccati_step<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
    p: &Matrix<T>,
) -> Result<(Matrix<T>, Matrix<T>), NumericsError> {
    let at = a.transpose();
    let bt = b.transpose();
    let pa = p * a;
    let pb = p * b;
    let s = r + &(&bt * &pb);
    let k = s.solve(&(&bt * &pa))?;
    let next = &(&(&at * &pa) - &(&(&at * &pb) * &k)) + q;
    Ok((next, k))
}

/// Right-hand side of the discrete Riccati equation evaluated at `p`.
pub fn dare_rhs<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
    p: &Matrix<T>,
) -> Result<Matrix<T>, NumericsError> {
    check_inputs(a, b, q, r)?;
    Ok(riccati_step(a, b, q, r, p)?.0)
}

/// Solves the DARE by fixed-point iteration from `P₀ = Q` with default options.
pub fn solve_dare<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
) -> Result<DareSolution<T>, NumericsError> {
    solve_dare_with(a, b, q, r, DareOptions::default())
}

pub fn solve_dare_with<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
    opts: DareOptions,
) -> Result<DareSolution<T>, NumericsError> {
    solve_dare_observed(a, b, q, r, opts, |_| {})
}

/// Same as [`solve_dare_with`], calling `observe` on every iterate.
pub(crate) fn solve_dare_observed<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
    opts: DareOptions,
    mut observe: impl FnMut(&Matrix<T>),
) -> Result<DareSolution<T>, NumericsError> {
    check_inputs(a, b, q, r)?;
    let tol = T::tolerance(opts.tolerance, 4.0);
    if opts.method == DareMethod::Doubling {
        return doubling(a, b, q, r, tol, opts.max_iterations, observe);
    }
    let mut p = q.clone();
    p.symmetrize();
    let mut change = T::infinity();
    for it in 1..=opts.max_iterations {
        let (mut next, _) = riccati_step(a, b, q, r, &p)?;
        next.symmetrize();
        if !next.is_finite() {
            return Err(NumericsError::NonConvergence {
                what: "solve_dare (diverged)",
                iterations: it,
                residual: f64::INFINITY,
            });
        }
        change = (&next - &p).max_abs();
        observe(&next);
        p = next;
        if change < tol {
            let (rhs, k) = riccati_step(a, b, q, r, &p)?;
            let residual = (&p - &rhs).norm_inf();
            return Ok(DareSolution {
                p,
                k,
                iterations: it,
                residual,
            });
        }
    }
    Err(NumericsError::NonConvergence {
        what: "solve_dare",
        iterations: opts.max_iterations,
        residual: change.to_f64_lossy(),
    })
}

fn doubling<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    q: &Matrix<T>,
    r: &Matrix<T>,
    tol: T,
    max_iterations: usize,
    mut observe: impl FnMut(&Matrix<T>),
) -> Result<DareSolution<T>, NumericsError> {
    let n = a.rows();
    let eye = Matrix::identity(n);
    let mut ak = a.clone();
    let mut gk = b * &r.solve(&b.transpose())?;
    gk.symmetrize();
    let mut hk = q.clone();
    hk.symmetrize();
    let mut change = T::infinity();
    for it in 1..=max_iterations {
        let w = &eye + &(&gk * &hk);
        let w_a = w.solve(&ak)?;
        let w_g = w.solve(&gk)?;
        let akt = ak.transpose();
        let mut h_next = &hk + &(&(&akt * &hk) * &w_a);
        let mut g_next = &gk + &(&(&ak * &w_g) * &akt);
        let a_next = &ak * &w_a;
        h_next.symmetrize();
        g_next.symmetrize();
        if !h_next.is_finite() {
            return Err(NumericsError::NonConvergence {
                what: "solve_dare doubling (diverged)",
                iterations: it,
                residual: f64::INFINITY,
            });
        }
        change = (&h_next - &hk).max_abs();
        observe(&h_next);
        hk = h_next;
        gk = g_next;
        ak = a_next;
        if change < tol {
            let (rhs, k) = riccati_step(a, b, q, r, &hk)?;
            let residual = (&hk - &rhs).norm_inf();
            return Ok(DareSolution {
                p: hk,
                k,
                iterations: it,
                residual,
            });
        }
    }
    Err(NumericsError::NonConvergence {
        what: "solve_dare doubling",
        iterations: max_iterations,
        residual: change.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{eigenvalues, zoh_discretize};
    use proptest::prelude::*;

    fn s(x: f64) -> Matrix<f64> {
        Matrix::from_rows(&[vec![x]]).unwrap()
    }

    #[test]
    fn zero_dynamics_gives_zero_gain() {
        let sol = solve_dare(&s(0.0), &s(1.0), &s(1.0), &s(1.0)).unwrap();
        assert_eq!(sol.p[(0, 0)], 1.0);
        assert_eq!(sol.k[(0, 0)], 0.0);
    }

    #[test]
    fn scalar_golden_ratio() {
        let sol = solve_dare(&s(1.0), &s(1.0), &s(1.0), &s(1.0)).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((sol.p[(0, 0)] - phi).abs() < 1e-9);
        assert!((sol.k[(0, 0)] - (phi - 1.0)).abs() < 1e-9);
        assert!(sol.residual < 1e-8);
    }

    // Expected values from an independent value-iteration oracle (20000 backward
    // Riccati steps at 40 significant digits on the ZOH double integrator, dt = 0.01).
    #[test]
    fn double_integrator_matches_value_iteration() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let b = Matrix::column(&[0.0, 1.0]);
        let d = zoh_discretize(&a, &b, 0.01).unwrap();
        let sol = solve_dare(&d.a, &d.b, &Matrix::identity(2), &s(1.0)).unwrap();
        let p = [ORACLE_P[0], ORACLE_P[1], ORACLE_P[1], ORACLE_P[2]];
        for (got, want) in sol.p.as_slice().iter().zip(p) {
            assert!((got - want).abs() < 1e-6, "P {got} vs {want}");
        }
        for (got, want) in sol.k.as_slice().iter().zip(ORACLE_K) {
            assert!((got - want).abs() < 1e-6, "K {got} vs {want}");
        }
        assert!(sol.residual < 1e-8);
    }

    const ORACLE_P: [f64; 3] = [173.70652412203623, 100.0012499921876, 173.70868919005616];
    const ORACLE_K: [f64; 2] = [0.9913771737157742, 1.7220868294009524];

    #[test]
    fn doubling_agrees_with_fixed_point() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let b = Matrix::column(&[0.0, 1.0]);
        let d = zoh_discretize(&a, &b, 0.01).unwrap();
        let fp = solve_dare(&d.a, &d.b, &Matrix::identity(2), &s(1.0)).unwrap();
        let db = solve_dare_with(
            &d.a,
            &d.b,
            &Matrix::identity(2),
            &s(1.0),
            DareOptions::doubling(),
        )
        .unwrap();
        assert!((&fp.p - &db.p).max_abs() < 1e-7);
        assert!((&fp.k - &db.k).max_abs() < 1e-9);
        assert!(db.iterations < 30);
    }

    #[test]
    fn doubling_handles_slow_loops() {
        // Marginal plant with very expensive control: millions of plain steps.
        let sol = solve_dare_with(
            &s(1.0),
            &s(0.01),
            &s(0.01),
            &s(1e7),
            DareOptions::doubling(),
        )
        .unwrap();
        let phi = dare_rhs(&s(1.0), &s(0.01), &s(0.01), &s(1e7), &sol.p).unwrap();
        assert!((&phi - &sol.p).max_abs() < 1e-8 * sol.p.max_abs());
        assert!(sol.k[(0, 0)] > 0.0 && sol.k[(0, 0)] < 1e-3);
    }

    #[test]
    fn rejects_indefinite_r_and_bad_shapes() {
        assert!(matches!(
            solve_dare(&s(1.0), &s(1.0), &s(1.0), &s(0.0)),
            Err(NumericsError::NotPositiveDefinite { .. })
        ));
        assert!(solve_dare(&Matrix::identity(2), &s(1.0), &s(1.0), &s(1.0)).is_err());
        assert!(solve_dare(&s(1.0), &s(1.0), &s(-1.0), &s(1.0)).is_err());
    }

    #[test]
    fn uncontrollable_unstable_mode_does_not_converge() {
        let err = solve_dare_with(
            &s(2.0),
            &s(0.0),
            &s(1.0),
            &s(1.0),
            DareOptions {
                max_iterations: 50,
                ..DareOptions::default()
            },
        );
        assert!(matches!(err, Err(NumericsError::NonConvergence { .. })));
        let err = solve_dare_with(&s(2.0), &s(0.0), &s(1.0), &s(1.0), DareOptions::doubling());
        assert!(matches!(err, Err(NumericsError::NonConvergence { .. })));
    }

    fn psd_from(v: &[f64], n: usize) -> Matrix<f64> {
        let l = Matrix::from_row_slice(n, n, &v[..n * n]).unwrap();
        &l * &l.transpose()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn iterates_stay_symmetric_psd(
            av in prop::collection::vec(-1.2f64..1.2, 4),
            bv in prop::collection::vec(-1.0f64..1.0, 2),
            qv in prop::collection::vec(-1.0f64..1.0, 4),
            r in 0.1f64..5.0,
        ) {
            let a = Matrix::from_row_slice(2, 2, &av).unwrap();
            let b = Matrix::column(&bv);
            let q = psd_from(&qv, 2);
            let r = s(r);
            let mut worst = f64::INFINITY;
            let _ = solve_dare_observed(&a, &b, &q, &r, DareOptions { max_iterations: 2000, ..DareOptions::default() }, |p| {
                assert!(p.asymmetry() <= 1e-9 * (1.0 + p.max_abs()));
                let min_eig = eigenvalues(p).unwrap().iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
                worst = worst.min(min_eig / (1.0 + p.max_abs()));
            });
            prop_assert!(worst >= -1e-9);
        }

        #[test]
        fn fixed_point_residual_small(
            av in prop::collection::vec(-1.0f64..1.0, 4),
            b0 in 0.2f64..1.0,
            b1 in -1.0f64..1.0,
            r in 0.1f64..5.0,
        ) {
            let a = Matrix::from_row_slice(2, 2, &av).unwrap();
            let b = Matrix::column(&[b0, b1]);
            if let Ok(sol) = solve_dare(&a, &b, &Matrix::identity(2), &s(r)) {
                let rhs = dare_rhs(&a, &b, &Matrix::identity(2), &s(r), &sol.p).unwrap();
                prop_assert!((&sol.p - &rhs).norm_inf() < 1e-8);
            }
        }
    }
}
