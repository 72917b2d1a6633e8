use crate::controllers::ControllerError;
use crate::scalar::Scalar;

/// Goal-terminal weight.
pub const W_GOAL: f64 = 10.0;
/// Obstacle hinge weight.
pub const W_OBS: f64 = 1000.0;
/// Relaxation of the diagonally preconditioned step (plain Jacobi oscillates on the chain term).
const RELAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle<T> {
    pub center: [T; 2],
    pub radius: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcSpec<T> {
    pub horizon: usize,
    pub step_length: T,
    pub goal: [T; 2],
    pub obstacles: Vec<Circle<T>>,
    pub clearance: T,
    pub iterations: usize,
}

impl<T: Scalar> MpcSpec<T> {
    pub fn validate(&self) -> Result<(), ControllerError> {
        if self.horizon < 2 {
            return Err(ControllerError::InvalidSpec(format!(
                "horizon must be at least 2, got {}",
                self.horizon
            )));
        }
        if !(self.step_length > T::zero()) {
            return Err(ControllerError::InvalidSpec(
                "step_length must be positive".into(),
            ));
        }
        if self.iterations < 1 {
            return Err(ControllerError::InvalidSpec(
                "iterations must be at least 1".into(),
            ));
        }
        if self.clearance < T::zero() {
            return Err(ControllerError::InvalidSpec(
                "clearance must be non-negative".into(),
            ));
        }
        let finite = self.goal.iter().all(|v| v.is_finite())
            && self
                .obstacles
                .iter()
                .all(|o| o.center.iter().all(|v| v.is_finite()) && o.radius.is_finite());
        if !finite {
            return Err(ControllerError::InvalidSpec(
                "goal and obstacles must be finite".into(),
            ));
        }
        Ok(())
    }
}

fn sub<T: Scalar>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm<T: Scalar>(a: [T; 2]) -> T {
    a[0].hypot(a[1])
}

/// Waypoints `p₁..p_N` from projected gradient descent started on the straight line to the goal.
pub fn mpc_plan<T: Scalar>(
    state: [T; 2],
    spec: &MpcSpec<T>,
) -> Result<Vec<[T; 2]>, ControllerError> {
    mpc_plan_from(state, spec, None)
}

/// Same as [`mpc_plan`], optionally starting the descent from `warm` (length `horizon`).
pub fn mpc_plan_from<T: Scalar>(
    state: [T; 2],
    spec: &MpcSpec<T>,
    warm: Option<&[[T; 2]]>,
) -> Result<Vec<[T; 2]>, ControllerError> {
    spec.validate()?;
    if !state.iter().all(|v| v.is_finite()) {
        return Err(ControllerError::InvalidSpec("state must be finite".into()));
    }
    let n = spec.horizon;
    let mut p: Vec<[T; 2]> = Vec::with_capacity(n + 1);
    p.push(state);
    match warm {
        Some(w) if w.len() == n => p.extend_from_slice(w),
        _ => {
            let d = sub(spec.goal, state);
            for k in 1..=n {
                let f = T::lit(k as f64 / n as f64);
                p.push([state[0] + f * d[0], state[1] + f * d[1]]);
            }
        }
    }
    clamp_steps(&mut p, spec.step_length);

    // Tie-break direction for points exactly in line with an obstacle centre.
    let heading = {
        let d = sub(spec.goal, state);
        let len = norm(d);
        if len > T::zero() {
            [d[0] / len, d[1] / len]
        } else {
            [T::one(), T::zero()]
        }
    };
    let left = [-heading[1], heading[0]];

    let two = T::lit(2.0);
    let w_goal = T::lit(W_GOAL);
    let w_obs = T::lit(W_OBS);
    let relax = T::lit(RELAX);
    let mut next = p.clone();
    for _ in 0..spec.iterations {
        for k in 1..=n {
            let mut g = [two * (p[k][0] - p[k - 1][0]), two * (p[k][1] - p[k - 1][1])];
            let mut diag = two;
            if k < n {
                g[0] -= two * (p[k + 1][0] - p[k][0]);
                g[1] -= two * (p[k + 1][1] - p[k][1]);
                diag += two;
            } else {
                g[0] += two * w_goal * (p[k][0] - spec.goal[0]);
                g[1] += two * w_goal * (p[k][1] - spec.goal[1]);
                diag += two * w_goal;
            }
            for o in &spec.obstacles {
                let rel = sub(p[k], o.center);
                let dist = norm(rel);
                let h = spec.clearance + o.radius - dist;
                if h <= T::zero() {
                    continue;
                }
                let cross = rel[0] * heading[1] - rel[1] * heading[0];
                let dir = if dist <= T::lit(1e-12) || cross.abs() <= T::lit(1e-9) * dist {
                    left
                } else {
                    [rel[0] / dist, rel[1] / dist]
                };
                g[0] -= two * w_obs * h * dir[0];
                g[1] -= two * w_obs * h * dir[1];
                diag += two * w_obs;
            }
            next[k] = [p[k][0] - relax * g[0] / diag, p[k][1] - relax * g[1] / diag];
        }
        clamp_steps(&mut next, spec.step_length);
        std::mem::swap(&mut p, &mut next);
        next[0] = p[0];
    }
    p.remove(0);
    Ok(p)
}

fn clamp_steps<T: Scalar>(p: &mut [[T; 2]], step: T) {
    for k in 1..p.len() {
        let d = sub(p[k], p[k - 1]);
        let len = norm(d);
        if len > step {
            let f = step / len;
            p[k] = [p[k - 1][0] + f * d[0], p[k - 1][1] + f * d[1]];
        }
    }
}
