//! Door opening in the horizontal plane (the arm's gravity torque is zero).
//! The end effector is pinned to the handle by a stiff spring-damper; its
//! force drives the arm through `J_tᵀ` and the door through the handle
//! tangent.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::arm::{embed_jacobian, embed_pose, embed_twist, inverse_kinematics, jt_force, planar};
use super::{EnvState, InitialRanges, SimError};
use crate::measurement::{ChannelSpec, MeasurementBundle, MeasurementSchema};
use crate::models::{arm2d_dynamics_step, door_step, gravity_torque, Arm2DParams, DoorParams};

pub(super) const INITIAL: &[(&str, [f64; 2])] = &[("door_angle", [0.0, 0.0])];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoorSuccess {
    pub target_angle: f64,
    /// Bound on the peak joint-torque magnitude.
    pub torque_limit: f64,
}

impl Default for DoorSuccess {
    fn default() -> Self {
        DoorSuccess {
            target_angle: 1.0,
            torque_limit: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoorEnvSpec {
    pub arm: Arm2DParams<f64>,
    pub door: DoorParams<f64>,
    pub hinge: [f64; 2],
    pub pin_stiffness: f64,
    pub pin_damping: f64,
    pub elbow_up: bool,
    pub initial: InitialRanges,
    pub success: DoorSuccess,
    pub noise_std: f64,
}

impl Default for DoorEnvSpec {
    fn default() -> Self {
        DoorEnvSpec {
            arm: Arm2DParams {
                link_lengths: [0.6, 0.6],
                gravity: 0.0,
                ..Arm2DParams::default()
            },
            door: DoorParams::default(),
            hinge: [1.0, 0.5],
            pin_stiffness: 1e4,
            pin_damping: 50.0,
            elbow_up: true,
            initial: InitialRanges::new(),
            success: DoorSuccess::default(),
            noise_std: 0.0,
        }
    }
}

impl DoorEnvSpec {
    /// Handle position and velocity at door angle `a`, rate `w`.
    pub fn handle(&self, a: f64, w: f64) -> ([f64; 2], [f64; 2]) {
        let r = self.door.handle_radius;
        let (s, c) = a.sin_cos();
        (
            [self.hinge[0] - r * c, self.hinge[1] - r * s],
            [r * w * s, -r * w * c],
        )
    }

    /// Force the pin applies to the end effector.
    pub fn interaction_force(&self, x: &[f64]) -> [f64; 2] {
        let q = [x[0], x[1]];
        let qd = [x[2], x[3]];
        let (ee, jac, _) = planar(&q, &self.arm);
        let v = [
            jac[0][0] * qd[0] + jac[0][1] * qd[1],
            jac[1][0] * qd[0] + jac[1][1] * qd[1],
        ];
        let (h, hv) = self.handle(x[4], x[5]);
        [0, 1].map(|i| self.pin_stiffness * (h[i] - ee[i]) + self.pin_damping * (hv[i] - v[i]))
    }

    pub(super) fn validate(&self) -> Result<(), SimError> {
        self.arm.validate()?;
        self.door.validate()?;
        if !(self.pin_stiffness > 0.0
            && self.pin_damping >= 0.0
            && self.hinge.iter().all(|h| h.is_finite()))
        {
            return Err(SimError::InvalidSpec(
                "pin stiffness must be > 0, damping >= 0, hinge finite".into(),
            ));
        }
        Ok(())
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
                ch("door_angle", 1, "rad"),
                ch("door_rate", 1, "rad/s"),
                ch("handle_pose", 6, "rad|m"),
                ch("interaction_force", 2, "N"),
            ],
            2,
        )
    }

    pub(super) fn initial_state(&self, init: &BTreeMap<String, f64>) -> Result<Vec<f64>, SimError> {
        let a = init["door_angle"];
        let (h, _) = self.handle(a, 0.0);
        let q = inverse_kinematics(h[0], h[1], &self.arm, self.elbow_up)?;
        Ok(vec![q[0], q[1], 0.0, 0.0, a, 0.0])
    }

    pub(super) fn observe(&self, s: &EnvState, b: &mut MeasurementBundle) -> Result<(), SimError> {
        let x = &s.x;
        let q = [x[0], x[1]];
        let qd = [x[2], x[3]];
        let (ee, jac, _) = planar(&q, &self.arm);
        b.set("joint_q", &q);
        b.set("joint_qd", &qd);
        b.set("ee_pose", &embed_pose(&ee));
        b.set("ee_vel", &embed_twist(&jac, &qd));
        b.set("jacobian", &embed_jacobian(&jac));
        b.set("gravity_torque", &gravity_torque(&q, &self.arm));
        b.set("door_angle", &[x[4]]);
        b.set("door_rate", &[x[5]]);
        let (h, _) = self.handle(x[4], x[5]);
        b.set("handle_pose", &embed_pose(&[h[0], h[1], x[4]]));
        b.set("interaction_force", &self.interaction_force(x));
        Ok(())
    }

    pub(super) fn advance(&self, s: &EnvState, u: &[f64], dt: f64) -> Result<Vec<f64>, SimError> {
        let x = &s.x;
        let f = self.interaction_force(x);
        let q = [x[0], x[1]];
        let (_, jac, _) = planar(&q, &self.arm);
        let ext = jt_force(&jac, f);
        let tau = [u[0] + ext[0], u[1] + ext[1]];
        let (qn, qdn) = arm2d_dynamics_step(&q, &[x[2], x[3]], &tau, dt, &self.arm)?;
        let (sa, ca) = x[4].sin_cos();
        // The handle feels −f; project on the opening direction.
        let tangential = -(f[0] * sa - f[1] * ca);
        let (a, w) = door_step(x[4], x[5], tangential, dt, &self.door)?;
        Ok(vec![qn[0], qn[1], qdn[0], qdn[1], a, w])
    }
}
