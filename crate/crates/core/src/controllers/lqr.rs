use crate::controllers::{check_len, ControllerError};
use crate::models::LinearModelParams;
use crate::numerics::{solve_dare_with, zoh_discretize, DareOptions, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LqrSpec<T> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
    /// Operating state.
    pub x0: Vec<T>,
    /// Operating input.
    pub u0: Vec<T>,
}

impl<T: Scalar> LqrSpec<T> {
    /// Zero operating point.
    pub fn regulator(q: Matrix<T>, r: Matrix<T>) -> Self {
        let (n, m) = (q.rows(), r.rows());
        Self {
            q,
            r,
            x0: vec![T::zero(); n],
            u0: vec![T::zero(); m],
        }
    }

    pub fn validate(&self) -> Result<(), ControllerError> {
        self.q.ensure_square("Q")?;
        self.r.ensure_square("R")?;
        check_len("x0", self.q.rows(), self.x0.len())?;
        check_len("u0", self.r.rows(), self.u0.len())?;
        if !self.q.is_positive_semidefinite() {
            return Err(ControllerError::InvalidSpec(
                "Q must be symmetric positive semidefinite".into(),
            ));
        }
        if !self.r.is_positive_definite() {
            return Err(ControllerError::InvalidSpec(
                "R must be symmetric positive definite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LqrGain<T> {
    pub k: Matrix<T>,
    /// Riccati solution of the weighted discrete problem.
    pub p: Matrix<T>,
    pub x0: Vec<T>,
    pub u0: Vec<T>,
    pub dt: T,
    pub a_d: Matrix<T>,
    pub b_d: Matrix<T>,
}

/// Discretizes the model at `dt` and solves the DARE for the feedback gain.
///
/// `Q·dt` and `R·dt` are passed to the Riccati solve so `P` stays at the scale
/// of the continuous cost; `K` is unaffected by the common factor.
pub fn lqr_make<T: Scalar>(
    spec: &LqrSpec<T>,
    model: &LinearModelParams<T>,
    dt: T,
) -> Result<LqrGain<T>, ControllerError> {
    spec.validate()?;
    model.validate()?;
    check_len("Q rows vs model state", model.state_dim(), spec.q.rows())?;
    check_len("R rows vs model input", model.input_dim(), spec.r.rows())?;
    let d = zoh_discretize(&model.a, &model.b, dt)?;
    let sol = solve_dare_with(
        &d.a,
        &d.b,
        &spec.q.scale(dt),
        &spec.r.scale(dt),
        DareOptions::doubling(),
    )?;
    Ok(LqrGain {
        k: sol.k,
        p: sol.p,
        x0: spec.x0.clone(),
        u0: spec.u0.clone(),
        dt,
        a_d: d.a,
        b_d: d.b,
    })
}

/// `v = u0 − K(z − x0)`.
pub fn lqr_eval<T: Scalar>(gain: &LqrGain<T>, z: &[T]) -> Result<Vec<T>, ControllerError> {
    let mut out = Vec::with_capacity(gain.u0.len());
    lqr_eval_into(gain, z, &mut out)?;
    Ok(out)
}

pub(crate) fn lqr_eval_into<T: Scalar>(
    gain: &LqrGain<T>,
    z: &[T],
    out: &mut Vec<T>,
) -> Result<(), ControllerError> {
    check_len("LQR input", gain.x0.len(), z.len())?;
    out.clear();
    for i in 0..gain.u0.len() {
        let mut v = gain.u0[i];
        for (j, (&zj, &x0j)) in z.iter().zip(&gain.x0).enumerate() {
            v -= gain.k[(i, j)] * (zj - x0j);
        }
        out.push(v);
    }
    Ok(())
}

impl<T: Scalar> LqrGain<T> {
    pub fn from_gain(k: Matrix<T>, x0: Vec<T>, u0: Vec<T>) -> Self {
        let n = k.cols();
        Self {
            p: Matrix::zeros(n, n),
            a_d: Matrix::zeros(n, n),
            b_d: Matrix::zeros(n, k.rows()),
            k,
            x0,
            u0,
            dt: T::zero(),
        }
    }
}
