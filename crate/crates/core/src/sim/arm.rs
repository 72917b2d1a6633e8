//! Planar-arm helpers shared by the environments.

use crate::models::{arm2d_kinematics, Arm2DParams, LINK_SAMPLES};

use super::SimError;

/// Joint angles placing the end effector at `(a, b)`; `elbow_up` picks the
/// branch with `q₂ > 0`.
pub fn inverse_kinematics(
    a: f64,
    b: f64,
    p: &Arm2DParams<f64>,
    elbow_up: bool,
) -> Result<[f64; 2], SimError> {
    let [l1, l2] = p.link_lengths;
    let c2 = (a * a + b * b - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if !(-1.0..=1.0).contains(&c2) {
        return Err(SimError::Unreachable { x: a, y: b });
    }
    let q2 = if elbow_up { c2.acos() } else { -c2.acos() };
    let q1 = b.atan2(a) - (l2 * q2.sin()).atan2(l1 + l2 * q2.cos());
    Ok([q1, q2])
}

/// Forward kinematics: end-effector `(x, y, φ)` and the 3×2 Jacobian rows.
pub fn planar(q: &[f64; 2], p: &Arm2DParams<f64>) -> ([f64; 3], [[f64; 2]; 3], Vec<[f64; 2]>) {
    let k = arm2d_kinematics(q, p).expect("finite joint angles");
    let j = &k.jacobian;
    let jac = [
        [j[(0, 0)], j[(0, 1)]],
        [j[(1, 0)], j[(1, 1)]],
        [j[(2, 0)], j[(2, 1)]],
    ];
    (k.ee_pose, jac, k.link_points)
}

/// `J_tᵀ·F` for the translational rows.
pub fn jt_force(jac: &[[f64; 2]; 3], f: [f64; 2]) -> [f64; 2] {
    [
        jac[0][0] * f[0] + jac[1][0] * f[1],
        jac[0][1] * f[0] + jac[1][1] * f[1],
    ]
}

/// Solves `J_tᵀ·F = τ` for the end-effector force.
pub fn force_from_torque(jac: &[[f64; 2]; 3], tau: [f64; 2]) -> Result<[f64; 2], SimError> {
    // J_tᵀ = [[j00, j10], [j01, j11]]
    let (a, b, c, d) = (jac[0][0], jac[1][0], jac[0][1], jac[1][1]);
    let det = a * d - b * c;
    if det.abs() < 1e-9 {
        return Err(SimError::Singular);
    }
    Ok([
        (d * tau[0] - b * tau[1]) / det,
        (a * tau[1] - c * tau[0]) / det,
    ])
}

/// Velocity of link point `index` (as ordered by the kinematics' link points).
pub fn point_velocity(index: usize, q: &[f64; 2], qd: &[f64; 2], p: &Arm2DParams<f64>) -> [f64; 2] {
    let [l1, l2] = p.link_lengths;
    let (s1, c1) = q[0].sin_cos();
    let (s12, c12) = (q[0] + q[1]).sin_cos();
    let f = (index % LINK_SAMPLES) as f64 / (LINK_SAMPLES - 1) as f64;
    if index < LINK_SAMPLES {
        [-f * l1 * s1 * qd[0], f * l1 * c1 * qd[0]]
    } else {
        let w = qd[0] + qd[1];
        [
            -l1 * s1 * qd[0] - f * l2 * s12 * w,
            l1 * c1 * qd[0] + f * l2 * c12 * w,
        ]
    }
}

/// Standard 6D embedding of a planar pose in the x–y plane: rotation about z.
pub fn embed_pose(ee: &[f64; 3]) -> [f64; 6] {
    [0.0, 0.0, ee[2], ee[0], ee[1], 0.0]
}

pub fn embed_twist(jac: &[[f64; 2]; 3], qd: &[f64; 2]) -> [f64; 6] {
    let v = |r: usize| jac[r][0] * qd[0] + jac[r][1] * qd[1];
    [0.0, 0.0, v(2), v(0), v(1), 0.0]
}

/// 6×2 Jacobian (row-major) of the standard embedding.
pub fn embed_jacobian(jac: &[[f64; 2]; 3]) -> [f64; 12] {
    let mut j = [0.0; 12];
    j[4..6].copy_from_slice(&jac[2]);
    j[6..8].copy_from_slice(&jac[0]);
    j[8..10].copy_from_slice(&jac[1]);
    j
}
