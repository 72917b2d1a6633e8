//! Pick-and-place with a vertical-plane two-link arm among static circular
//! obstacles. Distances are whole-body: the minimum over sampled link points.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::arm::{
    embed_jacobian, embed_pose, embed_twist, inverse_kinematics, planar, point_velocity,
};
use super::{EnvState, InitialRanges, SimError};
use crate::measurement::{ChannelSpec, MeasurementBundle, MeasurementSchema};
use crate::models::{arm2d_dynamics_step, gravity_torque, Arm2DParams};

pub(super) const INITIAL: &[(&str, [f64; 2])] =
    &[("start_dx", [0.0, 0.0]), ("start_dy", [0.0, 0.0])];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PickplaceSuccess {
    pub goal_tol: f64,
    pub d_min: f64,
}

impl Default for PickplaceSuccess {
    fn default() -> Self {
        PickplaceSuccess {
            goal_tol: 0.02,
            d_min: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PickplaceSpec {
    pub arm: Arm2DParams<f64>,
    pub start: [f64; 2],
    pub goal: [f64; 2],
    pub elbow_up: bool,
    pub obstacles: Vec<Obstacle>,
    pub initial: InitialRanges,
    pub success: PickplaceSuccess,
    pub noise_std: f64,
}

impl Default for PickplaceSpec {
    fn default() -> Self {
        PickplaceSpec {
            arm: Arm2DParams::default(),
            start: [0.7, 0.0],
            goal: [0.0, 0.7],
            elbow_up: true,
            obstacles: vec![Obstacle {
                center: [0.2, 0.3],
                radius: 0.05,
            }],
            initial: InitialRanges::new(),
            success: PickplaceSuccess::default(),
            noise_std: 0.0,
        }
    }
}

/// Whole-body distance to one obstacle: surface distance of the closest
/// link point and that point's index.
pub fn obstacle_distance(points: &[[f64; 2]], o: &Obstacle) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (i, p) in points.iter().enumerate() {
        let d = (p[0] - o.center[0]).hypot(p[1] - o.center[1]) - o.radius;
        if d < best.0 {
            best = (d, i);
        }
    }
    best
}

impl PickplaceSpec {
    pub(super) fn validate(&self) -> Result<(), SimError> {
        self.arm.validate()?;
        for o in &self.obstacles {
            if !(o.radius > 0.0 && o.center.iter().all(|c| c.is_finite())) {
                return Err(SimError::InvalidSpec(
                    "obstacles need a finite center and a positive radius".into(),
                ));
            }
        }
        if !(self.start.iter().chain(&self.goal).all(|v| v.is_finite())) {
            return Err(SimError::InvalidSpec(
                "start and goal must be finite".into(),
            ));
        }
        Ok(())
    }

    pub(super) fn schema(&self) -> MeasurementSchema {
        let k = self.obstacles.len();
        let ch = ChannelSpec::new;
        MeasurementSchema::new(
            vec![
                ch("joint_q", 2, "rad"),
                ch("joint_qd", 2, "rad/s"),
                ch("ee_pose", 6, "rad|m"),
                ch("ee_vel", 6, "rad/s|m/s"),
                ch("jacobian", 12, "m"),
                ch("gravity_torque", 2, "N m"),
                ch("link_points", 4 * crate::models::LINK_SAMPLES, "m"),
                ch("goal", 2, "m"),
                ch("obstacles", 3 * k, "m"),
                ch("d", k, "m"),
                ch("d_dot", k, "m/s"),
                ch("d_ddot_drift", k, "m/s^2"),
                ch("d_ddot_gain", 2 * k, "m/s^2/(N m)"),
            ],
            2,
        )
    }

    pub(super) fn initial_state(&self, init: &BTreeMap<String, f64>) -> Result<Vec<f64>, SimError> {
        let q = inverse_kinematics(
            self.start[0] + init["start_dx"],
            self.start[1] + init["start_dy"],
            &self.arm,
            self.elbow_up,
        )?;
        Ok(vec![q[0], q[1], 0.0, 0.0])
    }

    /// `ḋ` of the point `idx` relative to obstacle `o`.
    fn distance_rate(&self, q: &[f64; 2], qd: &[f64; 2], idx: usize, o: &Obstacle) -> f64 {
        let (_, _, pts) = planar(q, &self.arm);
        let p = pts[idx];
        let n = [p[0] - o.center[0], p[1] - o.center[1]];
        let norm = n[0].hypot(n[1]);
        if norm == 0.0 {
            return 0.0;
        }
        let v = point_velocity(idx, q, qd, &self.arm);
        (n[0] * v[0] + n[1] * v[1]) / norm
    }

    pub(super) fn observe(
        &self,
        s: &EnvState,
        dt: f64,
        b: &mut MeasurementBundle,
    ) -> Result<(), SimError> {
        let q = [s.x[0], s.x[1]];
        let qd = [s.x[2], s.x[3]];
        let (ee, jac, pts) = planar(&q, &self.arm);
        b.set("joint_q", &q);
        b.set("joint_qd", &qd);
        b.set("ee_pose", &embed_pose(&ee));
        b.set("ee_vel", &embed_twist(&jac, &qd));
        b.set("jacobian", &embed_jacobian(&jac));
        b.set("gravity_torque", &gravity_torque(&q, &self.arm));
        b.set(
            "link_points",
            &pts.iter().flatten().copied().collect::<Vec<_>>(),
        );
        b.set("goal", &self.goal);
        let k = self.obstacles.len();
        let mut obs = Vec::with_capacity(3 * k);
        let (mut d, mut d_dot, mut drift, mut gain) = (vec![], vec![], vec![], vec![]);
        // One-step predictions under zero torque and unit torque per joint.
        let zero = arm2d_dynamics_step(&q, &qd, &[0.0, 0.0], dt, &self.arm)?;
        let unit = [
            arm2d_dynamics_step(&q, &qd, &[1.0, 0.0], dt, &self.arm)?,
            arm2d_dynamics_step(&q, &qd, &[0.0, 1.0], dt, &self.arm)?,
        ];
        for o in &self.obstacles {
            obs.extend_from_slice(&[o.center[0], o.center[1], o.radius]);
            let (dist, idx) = obstacle_distance(&pts, o);
            let rate = self.distance_rate(&q, &qd, idx, o);
            let rate0 = self.distance_rate(&zero.0, &zero.1, idx, o);
            d.push(dist);
            d_dot.push(rate);
            drift.push((rate0 - rate) / dt);
            for (qn, qdn) in &unit {
                gain.push((self.distance_rate(qn, qdn, idx, o) - rate0) / dt);
            }
        }
        b.set("obstacles", &obs);
        b.set("d", &d);
        b.set("d_dot", &d_dot);
        b.set("d_ddot_drift", &drift);
        b.set("d_ddot_gain", &gain);
        Ok(())
    }

    pub(super) fn advance(&self, s: &EnvState, u: &[f64], dt: f64) -> Result<Vec<f64>, SimError> {
        let (q, qd) = arm2d_dynamics_step(
            &[s.x[0], s.x[1]],
            &[s.x[2], s.x[3]],
            &[u[0], u[1]],
            dt,
            &self.arm,
        )?;
        Ok(vec![q[0], q[1], qd[0], qd[1]])
    }
}
