use serde::{Deserialize, Serialize};

use crate::models::{check_dt, check_finite, non_negative, positive, ModelError};
use crate::numerics::Matrix;
use crate::scalar::Scalar;

/// Samples per link (endpoints included) used for whole-body distance checks.
pub const LINK_SAMPLES: usize = 5;

/// Planar two-link arm of uniform rods, gravity along −y, joint angles
/// measured from the +x axis (second joint relative to the first link).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arm2DParams<T> {
    pub link_lengths: [T; 2],
    pub link_masses: [T; 2],
    pub joint_damping: T,
    pub gravity: T,
}

impl<T: Scalar> Default for Arm2DParams<T> {
    fn default() -> Self {
        Self {
            link_lengths: [T::lit(0.5), T::lit(0.5)],
            link_masses: [T::lit(1.0), T::lit(0.8)],
            joint_damping: T::lit(0.05),
            gravity: T::lit(9.81),
        }
    }
}

impl<T: Scalar> Arm2DParams<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        positive(self.link_lengths[0], "link_lengths[0]")?;
        positive(self.link_lengths[1], "link_lengths[1]")?;
        positive(self.link_masses[0], "link_masses[0]")?;
        positive(self.link_masses[1], "link_masses[1]")?;
        non_negative(self.joint_damping, "joint_damping")?;
        non_negative(self.gravity, "gravity")
    }

    pub fn reach(&self) -> T {
        self.link_lengths[0] + self.link_lengths[1]
    }

    fn inertias(&self) -> [T; 2] {
        let twelfth = T::lit(1.0 / 12.0);
        [0, 1].map(|i| self.link_masses[i] * self.link_lengths[i] * self.link_lengths[i] * twelfth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arm2DKinematics<T> {
    /// End-effector `(x, y, φ)` with `φ = q₁ + q₂`.
    pub ee_pose: [T; 3],
    /// `∂(x, y, φ)/∂q`, 3×2.
    pub jacobian: Matrix<T>,
    pub link_points: Vec<[T; 2]>,
}

pub fn arm2d_kinematics<T: Scalar>(
    q: &[T; 2],
    p: &Arm2DParams<T>,
) -> Result<Arm2DKinematics<T>, ModelError> {
    check_finite(q, "joint angles")?;
    let [l1, l2] = p.link_lengths;
    let (s1, c1) = q[0].sin_cos();
    let (s12, c12) = (q[0] + q[1]).sin_cos();
    let elbow = [l1 * c1, l1 * s1];
    let ee = [elbow[0] + l2 * c12, elbow[1] + l2 * s12];
    let jacobian = Matrix::from_rows(&[
        vec![-l1 * s1 - l2 * s12, -l2 * s12],
        vec![l1 * c1 + l2 * c12, l2 * c12],
        vec![T::one(), T::one()],
    ])?;
    let mut link_points = Vec::with_capacity(2 * LINK_SAMPLES);
    for (start, end) in [([T::zero(), T::zero()], elbow), (elbow, ee)] {
        for k in 0..LINK_SAMPLES {
            let f = T::lit(k as f64 / (LINK_SAMPLES - 1) as f64);
            link_points.push([
                start[0] + f * (end[0] - start[0]),
                start[1] + f * (end[1] - start[1]),
            ]);
        }
    }
    Ok(Arm2DKinematics {
        ee_pose: [ee[0], ee[1], q[0] + q[1]],
        jacobian,
        link_points,
    })
}

pub fn arm2d_mass_matrix<T: Scalar>(q: &[T; 2], p: &Arm2DParams<T>) -> [[T; 2]; 2] {
    let [m1, m2] = p.link_masses;
    let [l1, l2] = p.link_lengths;
    let half = T::lit(0.5);
    let (lc1, lc2) = (l1 * half, l2 * half);
    let [i1, i2] = p.inertias();
    let c2 = q[1].cos();
    let two = T::lit(2.0);
    let m11 = m1 * lc1 * lc1 + i1 + m2 * (l1 * l1 + lc2 * lc2 + two * l1 * lc2 * c2) + i2;
    let m12 = m2 * (lc2 * lc2 + l1 * lc2 * c2) + i2;
    let m22 = m2 * lc2 * lc2 + i2;
    [[m11, m12], [m12, m22]]
}

/// Gravity torque `g(q)` (the torque that holds the arm still).
pub fn gravity_torque<T: Scalar>(q: &[T; 2], p: &Arm2DParams<T>) -> [T; 2] {
    let [m1, m2] = p.link_masses;
    let [l1, l2] = p.link_lengths;
    let half = T::lit(0.5);
    let (lc1, lc2) = (l1 * half, l2 * half);
    let g = p.gravity;
    let c1 = q[0].cos();
    let c12 = (q[0] + q[1]).cos();
    let g2 = m2 * lc2 * g * c12;
    [(m1 * lc1 + m2 * l1) * g * c1 + g2, g2]
}

/// Coriolis/centrifugal plus gravity plus damping torque `C(q,q̇)q̇ + g(q) + b·q̇`.
pub fn arm2d_bias_torque<T: Scalar>(q: &[T; 2], qd: &[T; 2], p: &Arm2DParams<T>) -> [T; 2] {
    let m2 = p.link_masses[1];
    let [l1, l2] = p.link_lengths;
    let h = m2 * l1 * l2 * T::lit(0.5) * q[1].sin();
    let cor = [
        -h * qd[1] * (T::lit(2.0) * qd[0] + qd[1]),
        h * qd[0] * qd[0],
    ];
    let g = gravity_torque(q, p);
    [0, 1].map(|i| cor[i] + g[i] + p.joint_damping * qd[i])
}

/// Semi-implicit Euler: velocities first, then positions from the new velocities.
pub fn arm2d_dynamics_step<T: Scalar>(
    q: &[T; 2],
    qd: &[T; 2],
    tau: &[T; 2],
    dt: T,
    p: &Arm2DParams<T>,
) -> Result<([T; 2], [T; 2]), ModelError> {
    check_dt(dt)?;
    check_finite(q, "joint angles")?;
    check_finite(qd, "joint velocities")?;
    check_finite(tau, "joint torques")?;
    let m = arm2d_mass_matrix(q, p);
    let bias = arm2d_bias_torque(q, qd, p);
    let rhs = [tau[0] - bias[0], tau[1] - bias[1]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    assert!(det > T::zero(), "arm mass matrix must be positive definite");
    let qdd = [
        (m[1][1] * rhs[0] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ];
    let qd_next = [qd[0] + dt * qdd[0], qd[1] + dt * qdd[1]];
    let q_next = [q[0] + dt * qd_next[0], q[1] + dt * qd_next[1]];
    check_finite(&q_next, "joint angles")?;
    check_finite(&qd_next, "joint velocities")?;
    Ok((q_next, qd_next))
}

/// Kinetic plus gravitational potential energy (zero potential at y = 0).
pub fn arm2d_energy<T: Scalar>(q: &[T; 2], qd: &[T; 2], p: &Arm2DParams<T>) -> T {
    let m = arm2d_mass_matrix(q, p);
    let half = T::lit(0.5);
    let kinetic = half
        * (m[0][0] * qd[0] * qd[0]
            + T::lit(2.0) * m[0][1] * qd[0] * qd[1]
            + m[1][1] * qd[1] * qd[1]);
    let [m1, m2] = p.link_masses;
    let [l1, l2] = p.link_lengths;
    let y1 = half * l1 * q[0].sin();
    let y2 = l1 * q[0].sin() + half * l2 * (q[0] + q[1]).sin();
    kinetic + p.gravity * (m1 * y1 + m2 * y2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit() -> Arm2DParams<f64> {
        Arm2DParams {
            link_lengths: [1.0, 1.0],
            link_masses: [1.0, 1.0],
            joint_damping: 0.0,
            gravity: 9.81,
        }
    }

    #[test]
    fn straight_arm() {
        let k = arm2d_kinematics(&[0.0, 0.0], &unit()).unwrap();
        assert_eq!(k.ee_pose, [2.0, 0.0, 0.0]);
        assert_eq!(k.link_points.len(), 2 * LINK_SAMPLES);
        assert_eq!(k.link_points[0], [0.0, 0.0]);
        assert_eq!(k.link_points[2], [0.5, 0.0]);
        assert_eq!(k.link_points[9], [2.0, 0.0]);
    }

    #[test]
    fn rotated_arm() {
        let k = arm2d_kinematics(&[PI / 2.0, 0.0], &unit()).unwrap();
        assert!(k.ee_pose[0].abs() < 1e-12);
        assert!((k.ee_pose[1] - 2.0).abs() < 1e-12);
        assert!((k.ee_pose[2] - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gravity_compensation_holds_still() {
        let p = Arm2DParams::<f64>::default();
        let mut q = [0.3, -0.7];
        let mut qd = [0.0, 0.0];
        for _ in 0..100 {
            let tau = gravity_torque(&q, &p);
            let (nq, nqd) = arm2d_dynamics_step(&q, &qd, &tau, 1e-3, &p).unwrap();
            assert!(nqd[0].abs() < 1e-9 && nqd[1].abs() < 1e-9);
            q = nq;
            qd = nqd;
        }
    }

    fn kinetic_drift(q0: [f64; 2], qd0: [f64; 2]) -> f64 {
        let p = Arm2DParams {
            gravity: 0.0,
            joint_damping: 0.0,
            ..unit()
        };
        let e0 = arm2d_energy(&q0, &qd0, &p);
        let (mut q, mut qd) = (q0, qd0);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            (q, qd) = arm2d_dynamics_step(&q, &qd, &[0.0, 0.0], 1e-4, &p).unwrap();
            worst = worst.max((arm2d_energy(&q, &qd, &p) - e0).abs());
        }
        worst / e0
    }

    #[test]
    fn kinetic_energy_conserved_without_gravity() {
        assert!(kinetic_drift([0.2, 0.5], [0.5, -0.25]) < 1e-4);
    }

    #[test]
    fn single_link_pendulum_period() {
        // Second link two orders of magnitude lighter: link one is a physical pendulum.
        let p = Arm2DParams {
            link_lengths: [1.0, 0.5],
            link_masses: [1.0, 1e-3],
            joint_damping: 0.0,
            gravity: 9.81,
        };
        let m1g_lc = 1.0 * 9.81 * 0.5;
        let alpha: f64 = 0.1f64.asin();
        let tau = [0.1 * m1g_lc, 0.0];
        // Equilibrium of g1(q) = τ, hanging down and deflected by α.
        let q_eq = -PI / 2.0 + alpha;
        let mut q = [q_eq + 0.05, 0.0 - alpha];
        let mut qd = [0.0, 0.0];
        let dt = 1e-4;
        let mut crossings = Vec::new();
        let mut prev = q[0] - q_eq;
        for i in 1..=60_000 {
            (q, qd) = arm2d_dynamics_step(&q, &qd, &tau, dt, &p).unwrap();
            let cur = q[0] - q_eq;
            if prev > 0.0 && cur <= 0.0 {
                crossings.push(i as f64 * dt);
            }
            prev = cur;
        }
        let measured =
            (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
        let expected = 2.0 * PI * ((1.0 / 3.0) / (m1g_lc * alpha.cos())).sqrt();
        assert!(
            (measured / expected - 1.0).abs() < 0.02,
            "{measured} vs {expected}"
        );
    }

    #[test]
    fn step_preconditions() {
        let p = unit();
        assert!(arm2d_dynamics_step(&[0.0; 2], &[0.0; 2], &[0.0; 2], 0.1, &p).is_err());
        assert!(
            arm2d_dynamics_step(&[0.0; 2], &[0.0; 2], &[f64::INFINITY, 0.0], 1e-3, &p).is_err()
        );
        assert!(arm2d_kinematics(&[f64::NAN, 0.0], &p).is_err());
        assert!(Arm2DParams {
            link_masses: [0.0, 1.0],
            ..unit()
        }
        .validate()
        .is_err());
        assert!(Arm2DParams {
            joint_damping: -1.0,
            ..unit()
        }
        .validate()
        .is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn jacobian_matches_finite_differences(q0 in -PI..PI, q1 in -PI..PI, l0 in 0.2f64..1.5, l1 in 0.2f64..1.5) {
            let p = Arm2DParams { link_lengths: [l0, l1], ..unit() };
            let k = arm2d_kinematics(&[q0, q1], &p).unwrap();
            let h = 1e-6;
            for j in 0..2 {
                let mut qp = [q0, q1];
                let mut qm = [q0, q1];
                qp[j] += h;
                qm[j] -= h;
                let ep = arm2d_kinematics(&qp, &p).unwrap().ee_pose;
                let em = arm2d_kinematics(&qm, &p).unwrap().ee_pose;
                for i in 0..3 {
                    prop_assert!(((ep[i] - em[i]) / (2.0 * h) - k.jacobian[(i, j)]).abs() < 1e-6);
                }
                let norm = (k.jacobian[(0, j)].powi(2) + k.jacobian[(1, j)].powi(2)).sqrt();
                prop_assert!(norm <= p.reach() + 1e-12);
            }
        }

        #[test]
        fn kinetic_energy_bound_random(q0 in -PI..PI, q1 in -PI..PI, w0 in -0.5f64..0.5, w1 in -0.5f64..0.5) {
            prop_assume!(w0.abs() + w1.abs() > 0.05);
            prop_assert!(kinetic_drift([q0, q1], [w0, w1]) < 1e-4);
        }
    }
}
