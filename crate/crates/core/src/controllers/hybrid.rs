use crate::controllers::pose::{pose_error, Pose, Twist, Wrench};
use crate::controllers::{check_len, ControllerError};
use crate::numerics::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessSpec<T> {
    pub kp: [T; 6],
    pub kd: [T; 6],
    pub target_pose: Pose<T>,
    pub target_velocity: Twist<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridSpec<T> {
    /// 1 = force-controlled axis.
    pub selection: [T; 6],
    pub force_target: Wrench<T>,
    pub pose_target: Pose<T>,
    pub kp: [T; 6],
    pub kd: [T; 6],
}

fn check_gains<T: Scalar>(kp: &[T; 6], kd: &[T; 6]) -> Result<(), ControllerError> {
    if kp
        .iter()
        .chain(kd)
        .all(|g| *g >= T::zero() && g.is_finite())
    {
        Ok(())
    } else {
        Err(ControllerError::InvalidSpec(
            "gains must be finite and non-negative".into(),
        ))
    }
}

impl<T: Scalar> StiffnessSpec<T> {
    pub fn validate(&self) -> Result<(), ControllerError> {
        check_gains(&self.kp, &self.kd)
    }
}

impl<T: Scalar> HybridSpec<T> {
    pub fn validate(&self) -> Result<(), ControllerError> {
        check_gains(&self.kp, &self.kd)?;
        if self
            .selection
            .iter()
            .all(|s| *s == T::zero() || *s == T::one())
        {
            Ok(())
        } else {
            Err(ControllerError::InvalidSpec(
                "selection entries must be 0 or 1".into(),
            ))
        }
    }
}

/// `kp ⊙ pose_error + kd ⊙ (target velocity − velocity)`.
pub fn stiffness_eval<T: Scalar>(
    spec: &StiffnessSpec<T>,
    pose: &Pose<T>,
    velocity: &Twist<T>,
) -> Wrench<T> {
    let e = pose_error(&spec.target_pose, pose);
    std::array::from_fn(|i| {
        spec.kp[i] * e[i] + spec.kd[i] * (spec.target_velocity[i] - velocity[i])
    })
}

/// Commanded wrench: force target on selected axes, spring-damper elsewhere
/// (target velocity zero).
pub fn hybrid_wrench<T: Scalar>(
    spec: &HybridSpec<T>,
    pose: &Pose<T>,
    velocity: &Twist<T>,
) -> Wrench<T> {
    let e = pose_error(&spec.pose_target, pose);
    std::array::from_fn(|i| {
        let s = spec.selection[i];
        s * spec.force_target[i] + (T::one() - s) * (spec.kp[i] * e[i] - spec.kd[i] * velocity[i])
    })
}

/// `τ = Jᵀ·w + g` with `J` mapping joint rates to the 6-twist.
pub fn hybrid_eval<T: Scalar>(
    spec: &HybridSpec<T>,
    pose: &Pose<T>,
    velocity: &Twist<T>,
    jacobian: &Matrix<T>,
    gravity_torque: &[T],
) -> Result<Vec<T>, ControllerError> {
    check_len("jacobian rows", 6, jacobian.rows())?;
    check_len("gravity torque", jacobian.cols(), gravity_torque.len())?;
    let w = hybrid_wrench(spec, pose, velocity);
    wrench_to_torque(jacobian, &w, gravity_torque)
}

pub(crate) fn wrench_to_torque<T: Scalar>(
    jacobian: &Matrix<T>,
    w: &Wrench<T>,
    gravity_torque: &[T],
) -> Result<Vec<T>, ControllerError> {
    let mut tau = jacobian.tr_mul_vec(w)?;
    for (t, g) in tau.iter_mut().zip(gravity_torque) {
        *t += *g;
    }
    Ok(tau)
}
