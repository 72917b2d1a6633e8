//! Arm-held cart-pole. The cart rides a rail along world y at `x = rail_x`;
//! the pole swings in the vertical plane through the rail. A two-link arm
//! moving in the horizontal x–y plane (joint axes vertical, so its gravity
//! torque is zero) holds the cart with its end effector. The arm's own
//! inertia is neglected: joint torques in excess of gravity compensation map
//! to an end-effector force through `J_t⁻ᵀ`, whose y component drives the
//! cart; the rail reacts the x component.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::arm::{embed_jacobian, embed_pose, force_from_torque, inverse_kinematics, planar};
use super::{EnvState, InitialRanges, SimError};
use crate::measurement::{ChannelSpec, MeasurementBundle, MeasurementSchema};
use crate::models::{cartpole_step, gravity_torque, Arm2DParams, CartPoleParams};

pub(super) const INITIAL: &[(&str, [f64; 2])] = &[
    ("cart_vy", [0.0, 0.0]),
    ("cart_y", [0.0, 0.0]),
    ("pole_omega", [0.0, 0.0]),
    ("pole_theta", [-0.5, 0.5]),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BalanceSuccess {
    /// |θ| bound after `settle_after`.
    pub angle_tol: f64,
    pub settle_after: f64,
    /// |cart y| bound over the whole run.
    pub cart_limit: f64,
}

impl Default for BalanceSuccess {
    fn default() -> Self {
        BalanceSuccess {
            angle_tol: 0.05,
            settle_after: 5.0,
            cart_limit: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BalanceSpec {
    pub cartpole: CartPoleParams<f64>,
    pub arm: Arm2DParams<f64>,
    pub rail_x: f64,
    pub elbow_up: bool,
    pub initial: InitialRanges,
    pub success: BalanceSuccess,
    pub noise_std: f64,
}

impl Default for BalanceSpec {
    fn default() -> Self {
        BalanceSpec {
            cartpole: CartPoleParams::default(),
            arm: Arm2DParams {
                link_lengths: [0.8, 0.8],
                gravity: 0.0,
                ..Arm2DParams::default()
            },
            rail_x: 0.6,
            elbow_up: true,
            initial: InitialRanges::new(),
            success: BalanceSuccess::default(),
            noise_std: 0.0,
        }
    }
}

impl BalanceSpec {
    pub(super) fn validate(&self) -> Result<(), SimError> {
        self.cartpole.validate()?;
        self.arm.validate()?;
        if !self.rail_x.is_finite() {
            return Err(SimError::InvalidSpec("rail_x must be finite".into()));
        }
        Ok(())
    }

    pub(super) fn schema(&self) -> MeasurementSchema {
        let ch = ChannelSpec::new;
        MeasurementSchema::new(
            vec![
                ch("pole_theta", 1, "rad"),
                ch("pole_omega", 1, "rad/s"),
                ch("cart_pos", 3, "m"),
                ch("cart_vel", 3, "m/s"),
                ch("joint_q", 2, "rad"),
                ch("joint_qd", 2, "rad/s"),
                ch("ee_pose", 6, "rad|m"),
                ch("ee_vel", 6, "rad/s|m/s"),
                ch("gravity_torque", 2, "N m"),
                ch("jacobian", 12, "m"),
            ],
            2,
        )
    }

    pub(super) fn initial_state(&self, init: &BTreeMap<String, f64>) -> Result<Vec<f64>, SimError> {
        let x = vec![
            init["cart_y"],
            init["cart_vy"],
            init["pole_theta"],
            init["pole_omega"],
        ];
        inverse_kinematics(self.rail_x, x[0], &self.arm, self.elbow_up)?;
        Ok(x)
    }

    fn joints(&self, x: &[f64]) -> Result<([f64; 2], [f64; 2], [f64; 3], [[f64; 2]; 3]), SimError> {
        let q = inverse_kinematics(self.rail_x, x[0], &self.arm, self.elbow_up)?;
        let (ee, jac, _) = planar(&q, &self.arm);
        // The end effector moves with the cart: J_t q̇ = (0, ẏ).
        let qd = force_from_torque(&transpose(&jac), [0.0, x[1]])?;
        Ok((q, qd, ee, jac))
    }

    pub(super) fn observe(&self, s: &EnvState, b: &mut MeasurementBundle) -> Result<(), SimError> {
        let x = &s.x;
        let (q, qd, ee, jac) = self.joints(x)?;
        b.set("pole_theta", &[x[2]]);
        b.set("pole_omega", &[x[3]]);
        b.set("cart_pos", &[self.rail_x, x[0], 0.0]);
        b.set("cart_vel", &[0.0, x[1], 0.0]);
        b.set("joint_q", &q);
        b.set("joint_qd", &qd);
        b.set("ee_pose", &embed_pose(&ee));
        b.set("ee_vel", &[0.0, 0.0, qd[0] + qd[1], 0.0, x[1], 0.0]);
        b.set("gravity_torque", &gravity_torque(&q, &self.arm));
        b.set("jacobian", &embed_jacobian(&jac));
        Ok(())
    }

    pub(super) fn advance(&self, s: &EnvState, u: &[f64], dt: f64) -> Result<Vec<f64>, SimError> {
        let (q, _, _, jac) = self.joints(&s.x)?;
        let g = gravity_torque(&q, &self.arm);
        let f = force_from_torque(&jac, [u[0] - g[0], u[1] - g[1]])?;
        let x: [f64; 4] = [s.x[0], s.x[1], s.x[2], s.x[3]];
        let next = cartpole_step(&x, f[1], dt, &self.cartpole)?;
        Ok(next.to_vec())
    }
}

/// Swaps the roles so that `force_from_torque` solves `J_t·v = w` instead.
fn transpose(j: &[[f64; 2]; 3]) -> [[f64; 2]; 3] {
    [[j[0][0], j[1][0]], [j[0][1], j[1][1]], j[2]]
}
