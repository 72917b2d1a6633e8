use serde::{Deserialize, Serialize};

use crate::models::{check_dt, check_finite, positive, ModelError};
use crate::scalar::Scalar;

/// Hinged door; angle zero when closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoorParams<T> {
    pub hinge_inertia: T,
    pub hinge_damping: T,
    pub handle_radius: T,
    pub handle_height: T,
    pub door_mass: T,
}

impl<T: Scalar> Default for DoorParams<T> {
    fn default() -> Self {
        Self::slab(T::lit(2.0), T::lit(0.5), T::lit(0.5), T::lit(1.0))
    }
}

impl<T: Scalar> DoorParams<T> {
    /// Uniform slab of width `handle_radius` about its edge: `I = m·r²/3`.
    pub fn slab(door_mass: T, handle_radius: T, hinge_damping: T, handle_height: T) -> Self {
        Self {
            hinge_inertia: door_mass * handle_radius * handle_radius / T::lit(3.0),
            hinge_damping,
            handle_radius,
            handle_height,
            door_mass,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        positive(self.hinge_inertia, "hinge_inertia")?;
        positive(self.hinge_damping, "hinge_damping")?;
        positive(self.handle_radius, "handle_radius")?;
        positive(self.handle_height, "handle_height")?;
        positive(self.door_mass, "door_mass")
    }
}

/// `I·θ̈ = r·F − c·θ̇`, semi-implicit Euler. The handle stays on its arc by
/// construction since only the hinge angle is integrated.
pub fn door_step<T: Scalar>(
    angle: T,
    angvel: T,
    applied_tangential_force: T,
    dt: T,
    p: &DoorParams<T>,
) -> Result<(T, T), ModelError> {
    check_dt(dt)?;
    check_finite(
        &[angle, angvel, applied_tangential_force],
        "door state or force",
    )?;
    let acc =
        (p.handle_radius * applied_tangential_force - p.hinge_damping * angvel) / p.hinge_inertia;
    let w = angvel + dt * acc;
    Ok((angle + dt * w, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_force_no_motion() {
        let p = DoorParams::<f64>::default();
        assert_eq!(door_step(0.2, 0.0, 0.0, 1e-3, &p).unwrap(), (0.2, 0.0));
    }

    #[test]
    fn constant_force_opens_monotonically() {
        let p = DoorParams::<f64>::default();
        let (mut a, mut w) = (0.0, 0.0);
        for _ in 0..2000 {
            let (na, nw) = door_step(a, w, 3.0, 1e-3, &p).unwrap();
            assert!(na > a);
            (a, w) = (na, nw);
        }
    }

    #[test]
    fn acceleration_inverse_in_inertia() {
        let p = DoorParams::<f64>::default();
        let p2 = DoorParams {
            hinge_inertia: 2.0 * p.hinge_inertia,
            ..p
        };
        let (_, w1) = door_step(0.0, 0.0, 1.0, 1e-3, &p).unwrap();
        let (_, w2) = door_step(0.0, 0.0, 1.0, 1e-3, &p2).unwrap();
        assert!((w2 - w1 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let p = DoorParams::<f64>::default();
        assert!(p.validate().is_ok());
        assert!(DoorParams {
            handle_radius: 0.0,
            ..p
        }
        .validate()
        .is_err());
        assert!(door_step(0.0, 0.0, 1.0, 0.5, &p).is_err());
    }
}
