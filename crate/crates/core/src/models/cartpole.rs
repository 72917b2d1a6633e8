use serde::{Deserialize, Serialize};

use crate::models::{check_dt, check_finite, non_negative, positive, ModelError};
use crate::numerics::Matrix;
use crate::scalar::Scalar;

/// Cart-pole with a point-mass pole on a massless rod. State order:
/// cart position, cart velocity, pole angle (zero upright), pole angular rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CartPoleParams<T> {
    pub m_cart: T,
    pub m_pole: T,
    pub l_pole: T,
    pub gravity: T,
}

impl<T: Scalar> Default for CartPoleParams<T> {
    fn default() -> Self {
        Self {
            m_cart: T::lit(0.1),
            m_pole: T::lit(0.1),
            l_pole: T::lit(0.5),
            gravity: T::lit(9.81),
        }
    }
}

impl<T: Scalar> CartPoleParams<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        positive(self.m_cart, "m_cart")?;
        positive(self.m_pole, "m_pole")?;
        positive(self.l_pole, "l_pole")?;
        // Zero gravity is admitted so the gravity-free linearization can be inspected.
        non_negative(self.gravity, "gravity")
    }
}

/// Linearization about the upright equilibrium.
pub fn cartpole_linearize<T: Scalar>(
    p: &CartPoleParams<T>,
) -> Result<(Matrix<T>, Matrix<T>), ModelError> {
    p.validate()?;
    let z = T::zero();
    let one = T::one();
    let g = p.gravity;
    let a = Matrix::from_rows(&[
        vec![z, one, z, z],
        vec![z, z, p.m_pole * g / p.m_cart, z],
        vec![z, z, z, one],
        vec![z, z, g * (p.m_cart + p.m_pole) / (p.l_pole * p.m_cart), z],
    ])?;
    let b = Matrix::column(&[z, one / p.m_cart, z, -one / (p.l_pole * p.m_cart)]);
    Ok((a, b))
}

/// Time derivative of the state under horizontal cart force `force`.
pub fn cartpole_derivative<T: Scalar>(s: &[T; 4], force: T, p: &CartPoleParams<T>) -> [T; 4] {
    let (sin, cos) = s[2].sin_cos();
    let (mc, mp, l, g) = (p.m_cart, p.m_pole, p.l_pole, p.gravity);
    let xdd = (force + mp * sin * (l * s[3] * s[3] - g * cos)) / (mc + mp * sin * sin);
    let thdd = (g * sin - xdd * cos) / l;
    [s[1], xdd, s[3], thdd]
}

/// One classical RK4 step with the force held constant.
pub fn cartpole_step<T: Scalar>(
    state: &[T; 4],
    force: T,
    dt: T,
    p: &CartPoleParams<T>,
) -> Result<[T; 4], ModelError> {
    check_dt(dt)?;
    check_finite(state, "cart-pole state")?;
    check_finite(&[force], "cart force")?;
    let half = T::lit(0.5);
    let add = |s: &[T; 4], k: &[T; 4], h: T| std::array::from_fn::<T, 4, _>(|i| s[i] + h * k[i]);
    let k1 = cartpole_derivative(state, force, p);
    let k2 = cartpole_derivative(&add(state, &k1, dt * half), force, p);
    let k3 = cartpole_derivative(&add(state, &k2, dt * half), force, p);
    let k4 = cartpole_derivative(&add(state, &k3, dt), force, p);
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    let next =
        std::array::from_fn(|i| state[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]));
    check_finite(&next, "cart-pole state")?;
    Ok(next)
}

/// Total mechanical energy (kinetic + pole potential relative to the hinge height).
pub fn cartpole_energy<T: Scalar>(s: &[T; 4], p: &CartPoleParams<T>) -> T {
    let half = T::lit(0.5);
    let (mc, mp, l, g) = (p.m_cart, p.m_pole, p.l_pole, p.gravity);
    half * (mc + mp) * s[1] * s[1]
        + mp * l * s[1] * s[3] * s[2].cos()
        + half * mp * l * l * s[3] * s[3]
        + mp * g * l * s[2].cos()
}
