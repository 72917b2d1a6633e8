use crate::controllers::{check_len, ControllerError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct PidGains<T> {
    pub kp: Vec<T>,
    pub ki: Vec<T>,
    pub kd: Vec<T>,
    /// Symmetric bound on each integral state (anti-windup).
    pub integral_limit: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PidState<T> {
    pub integral: Vec<T>,
    pub prev_error: Option<Vec<T>>,
}

impl<T: Scalar> PidState<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            integral: vec![T::zero(); dim],
            prev_error: None,
        }
    }
}

/// `u = kp·e + ki·∫e + kd·ė`; the integral is advanced (and clamped) before use,
/// the derivative is a backward difference (zero on the first call).
pub fn pid_eval<T: Scalar>(
    gains: &PidGains<T>,
    state: &PidState<T>,
    error: &[T],
    dt: T,
) -> Result<(Vec<T>, PidState<T>), ControllerError> {
    let n = error.len();
    check_len("PID kp", n, gains.kp.len())?;
    check_len("PID ki", n, gains.ki.len())?;
    check_len("PID kd", n, gains.kd.len())?;
    check_len("PID integral", n, state.integral.len())?;
    if !(dt > T::zero()) {
        return Err(ControllerError::InvalidSpec(
            "PID dt must be positive".into(),
        ));
    }
    let lim = gains.integral_limit.abs();
    let integral: Vec<T> = state
        .integral
        .iter()
        .zip(error)
        .map(|(i, e)| (*i + *e * dt).max(-lim).min(lim))
        .collect();
    let out = (0..n)
        .map(|i| {
            let d = match &state.prev_error {
                Some(p) if p.len() == n => (error[i] - p[i]) / dt,
                _ => T::zero(),
            };
            gains.kp[i] * error[i] + gains.ki[i] * integral[i] + gains.kd[i] * d
        })
        .collect();
    Ok((
        out,
        PidState {
            integral,
            prev_error: Some(error.to_vec()),
        },
    ))
}
