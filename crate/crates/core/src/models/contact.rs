use serde::{Deserialize, Serialize};

use crate::models::{non_negative, positive, ModelError};
use crate::scalar::Scalar;

/// Spring-damper contact with Coulomb-like friction coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactParams<T> {
    pub stiffness: T,
    pub damping: T,
    pub friction_coeff: T,
}

impl<T: Scalar> Default for ContactParams<T> {
    fn default() -> Self {
        Self {
            stiffness: T::lit(2000.0),
            damping: T::lit(20.0),
            friction_coeff: T::lit(0.2),
        }
    }
}

impl<T: Scalar> ContactParams<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        positive(self.stiffness, "stiffness")?;
        non_negative(self.damping, "damping")?;
        non_negative(self.friction_coeff, "friction_coeff")
    }
}

/// `max(0, k·δ + c·δ̇)` while penetrating (`δ > 0`), zero otherwise.
pub fn contact_normal_force<T: Scalar>(
    penetration: T,
    penetration_rate: T,
    p: &ContactParams<T>,
) -> T {
    if penetration <= T::zero() {
        return T::zero();
    }
    (p.stiffness * penetration + p.damping * penetration_rate).max(T::zero())
}
