use num_complex::Complex;

use crate::numerics::{Matrix, NumericsError};
use crate::scalar::Scalar;

pub const MAX_EIGEN_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative step size at which the root iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 5000,
        }
    }
}

/// Coefficients `c[0..=n]` of `det(λI − M) = Σ c_i λ^i` (so `c[n] = 1`), by Faddeev–LeVerrier.
pub fn characteristic_polynomial<T: Scalar>(m: &Matrix<T>) -> Result<Vec<T>, NumericsError> {
    m.ensure_square("eigenvalue argument")?;
    m.ensure_finite("eigenvalue argument")?;
    let n = m.rows();
    let mut c = vec![T::zero(); n + 1];
    c[n] = T::one();
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        mk = &(m * &mk) + &Matrix::identity(n).scale(c[n - k + 1]);
        let amk = m * &mk;
        c[n - k] = -amk.trace() / T::lit(k as f64);
    }
    Ok(c)
}

fn horner<T: Scalar>(c: &[T], z: Complex<T>) -> Complex<T> {
    c.iter()
        .rev()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &ci| {
            acc * z + Complex::new(ci, T::zero())
        })
}

/// `Σ |c_i| |z|^i`: scale of rounding error in evaluating the polynomial at `z`.
fn horner_abs<T: Scalar>(c: &[T], r: T) -> T {
    c.iter()
        .rev()
        .fold(T::zero(), |acc, &ci| acc * r + ci.abs())
}

pub fn eigenvalues<T: Scalar>(m: &Matrix<T>) -> Result<Vec<Complex<T>>, NumericsError> {
    eigenvalues_with(m, EigenOptions::default())
}

/// Roots of the characteristic polynomial via Durand–Kerner, sorted by real part
/// descending, then imaginary part descending.
pub fn eigenvalues_with<T: Scalar>(
    m: &Matrix<T>,
    opts: EigenOptions,
) -> Result<Vec<Complex<T>>, NumericsError> {
    m.ensure_square("eigenvalue argument")?;
    let n = m.rows();
    if n > MAX_EIGEN_DIM {
        return Err(NumericsError::Unsupported(format!(
            "eigenvalues of a {n}x{n} matrix (at most {MAX_EIGEN_DIM}x{MAX_EIGEN_DIM})"
        )));
    }
    let c = characteristic_polynomial(m)?;
    let mut roots = durand_kerner(&c, opts)?;
    let snap = T::tolerance(1e-7, 64.0);
    for z in &mut roots {
        if z.im.abs() <= snap * (T::one() + z.norm()) {
            z.im = T::zero();
        }
    }
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(roots)
}

fn durand_kerner<T: Scalar>(c: &[T], opts: EigenOptions) -> Result<Vec<Complex<T>>, NumericsError> {
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex::new(-c[0], T::zero())]);
    }
    // Fujiwara bound on the root moduli.
    let mut bound = T::zero();
    for k in 1..=n {
        let ck = c[n - k].abs();
        let root = if k == n {
            (ck / T::lit(2.0)).powf(T::one() / T::lit(k as f64))
        } else {
            ck.powf(T::one() / T::lit(k as f64))
        };
        bound = bound.max(root);
    }
    let radius = (T::lit(2.0) * bound).max(T::lit(1e-3));
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let ang = T::lit(2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4);
            Complex::new(radius * ang.cos(), radius * ang.sin())
        })
        .collect();

    let tol = T::tolerance(opts.tolerance, 64.0);
    let rounding = T::epsilon() * T::lit(64.0);
    let mut residual = T::infinity();
    for _ in 0..opts.max_iterations {
        let mut max_step = T::zero();
        for i in 0..n {
            let mut denom = Complex::new(T::one(), T::zero());
            for j in 0..n {
                if j != i {
                    denom = denom * (z[i] - z[j]);
                }
            }
            let p = horner(c, z[i]);
            if denom.norm() == T::zero() {
                // Coincident iterates: nudge apart.
                z[i] = z[i] + Complex::new(tol, tol);
                max_step = T::infinity();
                continue;
            }
            let step = p / denom;
            z[i] = z[i] - step;
            max_step = max_step.max(step.norm() / (T::one() + z[i].norm()));
        }
        residual = T::zero();
        let mut at_rounding = true;
        for zi in &z {
            let p = horner(c, *zi).norm();
            let scale = horner_abs(c, zi.norm());
            residual = residual.max(p);
            if p > rounding * scale {
                at_rounding = false;
            }
        }
        if max_step <= tol || (at_rounding && max_step <= T::tolerance(1e-6, 64.0)) {
            return Ok(z);
        }
    }
    Err(NumericsError::NonConvergence {
        what: "eigenvalues (Durand-Kerner)",
        iterations: opts.max_iterations,
        residual: residual.to_f64_lossy(),
    })
}
