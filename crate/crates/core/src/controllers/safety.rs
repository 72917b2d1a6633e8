use crate::controllers::{check_len, ControllerError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyIndexSpec<T> {
    pub d_min: T,
    pub quad_coeff: T,
    pub d_ref_sq: T,
    pub rate_coeff: T,
    /// Enforcement rate η in `φ̇ ≤ −η·φ`.
    pub margin_eta: T,
    /// Combine the two terms with `max` instead of the verbatim `min`.
    pub conservative: bool,
}

impl<T: Scalar> Default for SafetyIndexSpec<T> {
    fn default() -> Self {
        Self {
            d_min: T::lit(0.02),
            quad_coeff: T::lit(100.0),
            d_ref_sq: T::lit(0.0004),
            rate_coeff: T::lit(10.0),
            margin_eta: T::lit(1.0),
            conservative: false,
        }
    }
}

impl<T: Scalar> SafetyIndexSpec<T> {
    pub fn validate(&self) -> Result<(), ControllerError> {
        let ok = [
            self.d_min,
            self.quad_coeff,
            self.d_ref_sq,
            self.rate_coeff,
            self.margin_eta,
        ]
        .iter()
        .all(|v| *v > T::zero() && v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(ControllerError::InvalidSpec(
                "safety index coefficients must be positive".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyIndexValue<T> {
    pub phi: T,
    /// `(d_min − d, quad·(d_ref² − d²) − rate·ḋ)`.
    pub terms: (T, T),
}

impl<T: Scalar> SafetyIndexValue<T> {
    pub fn safe(&self) -> bool {
        self.phi < T::zero()
    }
}

pub fn safety_index_eval<T: Scalar>(
    spec: &SafetyIndexSpec<T>,
    d: T,
    d_dot: T,
) -> SafetyIndexValue<T> {
    let t1 = spec.d_min - d;
    let t2 = spec.quad_coeff * (spec.d_ref_sq - d * d) - spec.rate_coeff * d_dot;
    let phi = if spec.conservative {
        t1.max(t2)
    } else {
        t1.min(t2)
    };
    SafetyIndexValue {
        phi,
        terms: (t1, t2),
    }
}

/// Minimum-norm change of `u_ref` enforcing `c0 + c_u·u ≤ −η·φ` when `φ ≥ 0`.
pub fn safe_control_project<T: Scalar>(
    u_ref: &[T],
    phi: T,
    c0: T,
    c_u: &[T],
    spec: &SafetyIndexSpec<T>,
) -> Result<Vec<T>, ControllerError> {
    check_len("safety constraint gradient", u_ref.len(), c_u.len())?;
    if phi < T::zero() {
        return Ok(u_ref.to_vec());
    }
    let dot = c_u
        .iter()
        .zip(u_ref)
        .fold(T::zero(), |s, (a, b)| s + *a * *b);
    let violation = c0 + dot + spec.margin_eta * phi;
    if violation <= T::zero() {
        return Ok(u_ref.to_vec());
    }
    let norm_sq = c_u.iter().fold(T::zero(), |s, a| s + *a * *a);
    if norm_sq <= T::min_positive_value() {
        return Err(ControllerError::Infeasible(format!(
            "constraint violated by {violation} with zero control authority"
        )));
    }
    let f = violation / norm_sq;
    Ok(u_ref.iter().zip(c_u).map(|(u, c)| *u - f * *c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec() -> SafetyIndexSpec<f64> {
        SafetyIndexSpec::default()
    }

    #[test]
    fn boundary() {
        let v = safety_index_eval(&spec(), 0.02, 0.0);
        assert_eq!(v.terms.0, 0.0);
        assert_eq!(v.terms.1, 0.0);
        assert_eq!(v.phi, 0.0);
        assert!(!v.safe());
    }

    #[test]
    fn safe_far_away() {
        let v = safety_index_eval(&spec(), 0.05, 0.0);
        assert!((v.terms.0 + 0.03).abs() < 1e-12);
        assert!((v.terms.1 + 0.21).abs() < 1e-12);
        assert!((v.phi + 0.21).abs() < 1e-12);
        assert!(v.safe());
    }

    #[test]
    fn unsafe_close_and_approaching() {
        let v = safety_index_eval(&spec(), 0.01, -0.1);
        assert!((v.terms.0 - 0.01).abs() < 1e-12);
        assert!((v.terms.1 - 1.03).abs() < 1e-12);
        assert!((v.phi - 0.01).abs() < 1e-12);
        assert!(!v.safe());
    }

    #[test]
    fn conservative_uses_max() {
        let s = SafetyIndexSpec {
            conservative: true,
            ..spec()
        };
        let v = safety_index_eval(&s, 0.01, -0.1);
        assert!((v.phi - 1.03).abs() < 1e-12);
    }

    #[test]
    fn inactive_constraint_is_identity() {
        assert_eq!(
            safe_control_project(&[2.0, -1.0], -0.1, 5.0, &[1.0, 0.0], &spec()).unwrap(),
            vec![2.0, -1.0]
        );
    }

    #[test]
    fn half_space_projection() {
        let u = safe_control_project(&[2.0, 0.0], 0.0, 0.0, &[1.0, 0.0], &spec()).unwrap();
        assert!(u[0].abs() < 1e-15 && u[1].abs() < 1e-15);
    }

    #[test]
    fn zero_authority_is_infeasible() {
        assert!(matches!(
            safe_control_project(&[1.0], 0.5, 1.0, &[0.0], &spec()),
            Err(ControllerError::Infeasible(_))
        ));
        // Already satisfied: no authority needed.
        assert!(safe_control_project(&[1.0], 0.5, -1.0, &[0.0], &spec()).is_ok());
    }

    proptest! {
        #[test]
        fn projection_enforces_and_never_worsens(
            u in prop::collection::vec(-10.0f64..10.0, 2),
            c in prop::collection::vec(-3.0f64..3.0, 2),
            c0 in -5.0f64..5.0,
            phi in 0.0f64..2.0,
        ) {
            prop_assume!(c[0].abs() + c[1].abs() > 1e-3);
            let s = spec();
            let out = safe_control_project(&u, phi, c0, &c, &s).unwrap();
            let before = c0 + c[0] * u[0] + c[1] * u[1];
            let after = c0 + c[0] * out[0] + c[1] * out[1];
            prop_assert!(after <= -s.margin_eta * phi + 1e-9);
            prop_assert!(after <= before + 1e-12);
        }
    }
}
