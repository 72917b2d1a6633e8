//! Controller templates: LQR, PID, Cartesian trajectory, stiffness, hybrid
//! position-force, safety-index projection and kinematic waypoint MPC.
//!
//! Six-dimensional vectors put rotation first: `(rx, ry, rz, x, y, z)`.

pub(crate) mod hybrid;
pub(crate) mod lqr;
mod mpc;
mod pid;
pub mod pose;
mod safety;
mod trajectory;

pub use hybrid::{hybrid_eval, hybrid_wrench, stiffness_eval, HybridSpec, StiffnessSpec};
pub use lqr::{lqr_eval, lqr_make, LqrGain, LqrSpec};
pub use mpc::{mpc_plan, mpc_plan_from, Circle, MpcSpec, W_GOAL, W_OBS};
pub use pid::{pid_eval, PidGains, PidState};
pub use safety::{safe_control_project, safety_index_eval, SafetyIndexSpec, SafetyIndexValue};
pub use trajectory::{trajectory_eval, Keyframe, TrajectorySpec};

use thiserror::Error;

use crate::models::ModelError;
use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("infeasible safety constraint: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub(crate) fn check_len(
    what: &'static str,
    expected: usize,
    got: usize,
) -> Result<(), ControllerError> {
    if expected == got {
        Ok(())
    } else {
        Err(ControllerError::Dimension {
            what,
            expected,
            got,
        })
    }
}
