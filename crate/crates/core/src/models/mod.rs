//! Dynamic-model templates: linear model, cart-pole, planar two-link arm,
//! hinged door and penalty contact.

mod arm2d;
mod cartpole;
mod contact;
mod door;
mod linear;

pub use arm2d::{
    arm2d_bias_torque, arm2d_dynamics_step, arm2d_energy, arm2d_kinematics, arm2d_mass_matrix,
    gravity_torque, Arm2DKinematics, Arm2DParams, LINK_SAMPLES,
};
pub use cartpole::{
    cartpole_derivative, cartpole_energy, cartpole_linearize, cartpole_step, CartPoleParams,
};
pub use contact::{contact_normal_force, ContactParams};
pub use door::{door_step, DoorParams};
pub use linear::LinearModelParams;

use thiserror::Error;

use crate::numerics::NumericsError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("step size dt must lie in (0, 0.01], got {0}")]
    InvalidStep(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub(crate) const MAX_STEP: f64 = 0.01;

pub(crate) fn check_dt<T: Scalar>(dt: T) -> Result<(), ModelError> {
    if dt > T::zero() && dt <= T::lit(MAX_STEP) {
        Ok(())
    } else {
        Err(ModelError::InvalidStep(dt.to_f64_lossy()))
    }
}

pub(crate) fn check_finite<T: Scalar>(values: &[T], what: &'static str) -> Result<(), ModelError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::NonFinite(what))
    }
}

pub(crate) fn positive<T: Scalar>(v: T, name: &'static str) -> Result<(), ModelError> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            reason: format!("must be positive, got {v}"),
        })
    }
}

pub(crate) fn non_negative<T: Scalar>(v: T, name: &'static str) -> Result<(), ModelError> {
    if v >= T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            reason: format!("must be non-negative, got {v}"),
        })
    }
}
