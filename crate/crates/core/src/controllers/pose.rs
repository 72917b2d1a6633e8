//! Poses as 6-vectors `(rx, ry, rz, x, y, z)` with a rotation-vector orientation.

use crate::scalar::Scalar;

pub type Pose<T> = [T; 6];
pub type Twist<T> = [T; 6];
pub type Wrench<T> = [T; 6];
type Rot<T> = [[T; 3]; 3];

/// Rodrigues' formula.
pub fn rotation_matrix<T: Scalar>(rv: &[T; 3]) -> Rot<T> {
    let theta = (rv[0] * rv[0] + rv[1] * rv[1] + rv[2] * rv[2]).sqrt();
    let one = T::one();
    let z = T::zero();
    let mut r = [[one, z, z], [z, one, z], [z, z, one]];
    if theta < T::lit(1e-12) {
        // First-order term keeps the map smooth through zero.
        r[0][1] = -rv[2];
        r[0][2] = rv[1];
        r[1][0] = rv[2];
        r[1][2] = -rv[0];
        r[2][0] = -rv[1];
        r[2][1] = rv[0];
        return r;
    }
    let k = [rv[0] / theta, rv[1] / theta, rv[2] / theta];
    let (s, c) = theta.sin_cos();
    let v = one - c;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = v * k[i] * k[j] + if i == j { c } else { z };
        }
    }
    r[0][1] -= s * k[2];
    r[0][2] += s * k[1];
    r[1][0] += s * k[2];
    r[1][2] -= s * k[0];
    r[2][0] -= s * k[1];
    r[2][1] += s * k[0];
    r
}

/// Inverse of [`rotation_matrix`], angle in `[0, π]`.
pub fn rotation_vector<T: Scalar>(r: &Rot<T>) -> [T; 3] {
    let one = T::one();
    let half = T::lit(0.5);
    let cos = ((r[0][0] + r[1][1] + r[2][2] - one) * half)
        .max(-one)
        .min(one);
    let theta = cos.acos();
    let w = [r[2][1] - r[1][2], r[0][2] - r[2][0], r[1][0] - r[0][1]];
    if theta < T::lit(1e-9) {
        return [w[0] * half, w[1] * half, w[2] * half];
    }
    if T::PI() - theta < T::lit(1e-6) {
        // Near π the skew part vanishes; recover the axis from the symmetric part.
        let d = [r[0][0], r[1][1], r[2][2]];
        let i = if d[0] >= d[1] && d[0] >= d[2] {
            0
        } else if d[1] >= d[2] {
            1
        } else {
            2
        };
        let mut axis = [T::zero(); 3];
        axis[i] = ((d[i] + one) * half).max(T::zero()).sqrt();
        for j in 0..3 {
            if j != i {
                axis[j] = (r[i][j] + r[j][i]) / (T::lit(4.0) * axis[i]);
            }
        }
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        return axis.map(|a| a / n * theta);
    }
    let f = theta / (T::lit(2.0) * theta.sin());
    w.map(|x| x * f)
}

fn mul_transpose<T: Scalar>(a: &Rot<T>, b: &Rot<T>) -> Rot<T> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..3).fold(T::zero(), |s, k| s + a[i][k] * b[j][k]))
    })
}

/// Error taking `current` to `target`: angle-axis of `R_t·R_cᵀ` then `p_t − p_c`.
pub fn pose_error<T: Scalar>(target: &Pose<T>, current: &Pose<T>) -> [T; 6] {
    let rt = rotation_matrix(&[target[0], target[1], target[2]]);
    let rc = rotation_matrix(&[current[0], current[1], current[2]]);
    let rot = rotation_vector(&mul_transpose(&rt, &rc));
    [
        rot[0],
        rot[1],
        rot[2],
        target[3] - current[3],
        target[4] - current[4],
        target[5] - current[5],
    ]
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle<T: Scalar>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut w = a % two_pi;
    if w > T::PI() {
        w -= two_pi;
    } else if w <= -T::PI() {
        w += two_pi;
    }
    w
}

/// Pads a planar pose `(x, y, φ)` to a 6-pose.
pub fn planar_pose<T: Scalar>(x: T, y: T, phi: T) -> Pose<T> {
    [T::zero(), T::zero(), phi, x, y, T::zero()]
}
