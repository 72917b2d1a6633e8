//! Wiping a vertical board at `x = board_x` with a vertical-plane arm:
//! penalty contact along the board normal, smoothed Coulomb friction along
//! the board, and a reference stroke along y.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::arm::{embed_jacobian, embed_pose, embed_twist, inverse_kinematics, jt_force, planar};
use super::{EnvState, InitialRanges, SimError};
use crate::controllers::{trajectory_eval, Keyframe, TrajectorySpec};
use crate::measurement::{ChannelSpec, MeasurementBundle, MeasurementSchema};
use crate::models::{
    arm2d_dynamics_step, contact_normal_force, gravity_torque, Arm2DParams, ContactParams,
};

pub(super) const INITIAL: &[(&str, [f64; 2])] = &[("start_gap", [0.0, 0.0])];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WipeSuccess {
    pub force_target: f64,
    /// Relative band around the target.
    pub band: f64,
    /// Required fraction of in-contact ticks inside the band.
    pub fraction: f64,
    pub path_rms: f64,
}

impl Default for WipeSuccess {
    fn default() -> Self {
        WipeSuccess {
            force_target: 5.0,
            band: 0.2,
            fraction: 0.9,
            path_rms: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WipeSpec {
    pub arm: Arm2DParams<f64>,
    pub contact: ContactParams<f64>,
    pub board_x: f64,
    /// Reference stroke keyframes `[t, y]` along the board.
    pub stroke: Vec<[f64; 2]>,
    /// Velocity scale of the friction smoothing `tanh(v / v_s)`.
    pub friction_velocity: f64,
    pub elbow_up: bool,
    pub initial: InitialRanges,
    pub success: WipeSuccess,
    pub noise_std: f64,
}

impl Default for WipeSpec {
    fn default() -> Self {
        WipeSpec {
            arm: Arm2DParams::default(),
            contact: ContactParams::default(),
            board_x: 0.7,
            stroke: vec![[0.0, 0.0], [2.0, 0.3], [4.0, 0.0]],
            friction_velocity: 0.01,
            elbow_up: true,
            initial: InitialRanges::new(),
            success: WipeSuccess::default(),
            noise_std: 0.0,
        }
    }
}

impl WipeSpec {
    fn stroke_spec(&self) -> Result<TrajectorySpec<f64>, SimError> {
        let keys = self
            .stroke
            .iter()
            .map(|&[t, y]| Keyframe {
                time: t,
                pose: [0.0, 0.0, 0.0, self.board_x, y, 0.0],
            })
            .collect();
        TrajectorySpec::new(keys).map_err(|e| SimError::InvalidSpec(format!("stroke: {e}")))
    }

    /// Reference point on the board at time `t`.
    pub fn path_point(&self, t: f64) -> [f64; 2] {
        match self.stroke_spec() {
            Ok(s) => {
                let (p, _) = trajectory_eval(&s, t);
                [p[3], p[4]]
            }
            Err(_) => [f64::NAN; 2],
        }
    }

    /// Normal and friction force on the end effector.
    pub fn contact_forces(&self, x: &[f64]) -> (f64, f64) {
        let q = [x[0], x[1]];
        let qd = [x[2], x[3]];
        let (ee, jac, _) = planar(&q, &self.arm);
        let v = embed_twist(&jac, &qd);
        let normal = contact_normal_force(ee[0] - self.board_x, v[3], &self.contact);
        let friction =
            -self.contact.friction_coeff * normal * (v[4] / self.friction_velocity).tanh();
        (normal, friction)
    }

    pub(super) fn validate(&self) -> Result<(), SimError> {
        self.arm.validate()?;
        self.contact.validate()?;
        if !(self.friction_velocity > 0.0 && self.board_x.is_finite()) {
            return Err(SimError::InvalidSpec(
                "friction_velocity must be > 0 and board_x finite".into(),
            ));
        }
        self.stroke_spec().map(|_| ())
    }

    pub(super) fn schema(&self) -> MeasurementSchema {
        let ch = ChannelSpec::new;
        MeasurementSchema::new(
            vec![
                ch("joint_q", 2, "rad"),
                ch("joint_qd", 2, "rad/s"),
                ch("ee_pose", 6, "rad|m"),
                ch("ee_vel", 6, "rad/s|m/s"),
                ch("jacobian", 12, "m"),
                ch("gravity_torque", 2, "N m"),
                ch("normal_force", 1, "N"),
                ch("friction_force", 1, "N"),
                ch("path_point", 2, "m"),
            ],
            2,
        )
    }

    pub(super) fn initial_state(&self, init: &BTreeMap<String, f64>) -> Result<Vec<f64>, SimError> {
        let p = self.path_point(0.0);
        let q = inverse_kinematics(p[0] - init["start_gap"], p[1], &self.arm, self.elbow_up)?;
        Ok(vec![q[0], q[1], 0.0, 0.0])
    }

    pub(super) fn observe(&self, s: &EnvState, b: &mut MeasurementBundle) -> Result<(), SimError> {
        let q = [s.x[0], s.x[1]];
        let qd = [s.x[2], s.x[3]];
        let (ee, jac, _) = planar(&q, &self.arm);
        b.set("joint_q", &q);
        b.set("joint_qd", &qd);
        b.set("ee_pose", &embed_pose(&ee));
        b.set("ee_vel", &embed_twist(&jac, &qd));
        b.set("jacobian", &embed_jacobian(&jac));
        b.set("gravity_torque", &gravity_torque(&q, &self.arm));
        let (n, f) = self.contact_forces(&s.x);
        b.set("normal_force", &[n]);
        b.set("friction_force", &[f]);
        b.set("path_point", &self.path_point(s.t));
        Ok(())
    }

    pub(super) fn advance(&self, s: &EnvState, u: &[f64], dt: f64) -> Result<Vec<f64>, SimError> {
        let q = [s.x[0], s.x[1]];
        let (n, f) = self.contact_forces(&s.x);
        let (_, jac, _) = planar(&q, &self.arm);
        let ext = jt_force(&jac, [-n, f]);
        let tau = [u[0] + ext[0], u[1] + ext[1]];
        let (qn, qdn) = arm2d_dynamics_step(&q, &[s.x[2], s.x[3]], &tau, dt, &self.arm)?;
        Ok(vec![qn[0], qn[1], qdn[0], qdn[1]])
    }
}
