use serde::{Deserialize, Serialize};

use super::runner::RunLog;
use super::{EnvSpec, SimError, WipeSpec};
use crate::controllers::{safety_index_eval, SafetyIndexSpec};

fn col(log: &RunLog, channel: &str, index: usize) -> Result<Vec<f64>, String> {
    log.series(channel, index)
        .ok_or_else(|| format!("log lacks {channel}[{index}]"))
}

/// Kind-specific task-success predicate over a completed log.
pub fn evaluate_success(spec: &EnvSpec, log: &RunLog) -> (bool, String) {
    if log.is_empty() {
        return (false, "empty log".into());
    }
    let r = match spec {
        EnvSpec::CartpoleArm(s) => balance(
            log,
            s.success.angle_tol,
            s.success.settle_after,
            s.success.cart_limit,
        ),
        EnvSpec::Arm2dPickplace(s) => pickplace(log, s.goal, s.success.goal_tol, s.success.d_min),
        EnvSpec::Door(s) => door(log, s.success.target_angle, s.success.torque_limit),
        EnvSpec::Wipe(s) => wipe(log, s),
    };
    match r {
        Ok(ok) => ok,
        Err(e) => (false, e),
    }
}

fn balance(log: &RunLog, tol: f64, after: f64, cart_limit: f64) -> Result<(bool, String), String> {
    let theta = col(log, "pole_theta", 0)?;
    let cart = col(log, "cart_pos", 1)?;
    for (t, th) in log.time.iter().zip(&theta) {
        if *t > after && !(th.abs() < tol) {
            return Ok((
                false,
                format!("pole angle {th:.4} rad exceeds {tol} rad at t={t:.3} s"),
            ));
        }
    }
    let (i, worst) = cart
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, b), (i, c)| {
            if c.abs() > b {
                (i, c.abs())
            } else {
                (bi, b)
            }
        });
    if !(worst < cart_limit) {
        return Ok((
            false,
            format!(
                "cart excursion {worst:.4} m exceeds {cart_limit} m at t={:.3} s",
                log.time[i]
            ),
        ));
    }
    if log.time.last().is_none_or(|t| *t <= after) {
        return Ok((false, format!("run ends before t={after} s")));
    }
    Ok((
        true,
        format!("balanced: |theta| < {tol} rad after {after} s, cart excursion {worst:.4} m"),
    ))
}

fn pickplace(log: &RunLog, goal: [f64; 2], tol: f64, d_min: f64) -> Result<(bool, String), String> {
    for k in 0..log.channel_dim("d") {
        let d = col(log, "d", k)?;
        if let Some(i) = d.iter().position(|x| !(*x >= d_min)) {
            return Ok((
                false,
                format!(
                    "safety violated at t={:.3} s: d[{k}] = {:.4} m < {d_min} m",
                    log.time[i], d[i]
                ),
            ));
        }
    }
    let x = col(log, "ee_pose", 3)?;
    let y = col(log, "ee_pose", 4)?;
    let n = x.len() - 1;
    let err = (x[n] - goal[0]).hypot(y[n] - goal[1]);
    if !(err <= tol) {
        return Ok((
            false,
            format!("final end-effector error {err:.4} m exceeds {tol} m"),
        ));
    }
    Ok((
        true,
        format!("reached goal within {err:.4} m, clearance kept"),
    ))
}

fn door(log: &RunLog, target: f64, limit: f64) -> Result<(bool, String), String> {
    let angle = col(log, "door_angle", 0)?;
    let final_angle = *angle.last().expect("non-empty");
    let peak = peak_torque(log);
    if !(final_angle >= target) {
        return Ok((
            false,
            format!("door opened to {final_angle:.4} rad, target {target} rad"),
        ));
    }
    if !(peak < limit) {
        return Ok((
            false,
            format!("peak joint torque {peak:.3} N m exceeds {limit} N m"),
        ));
    }
    Ok((
        true,
        format!("door at {final_angle:.4} rad, peak joint torque {peak:.3} N m"),
    ))
}

/// Largest joint-torque magnitude in the log.
pub(crate) fn peak_torque(log: &RunLog) -> f64 {
    let n = log.channel_dim("actuation");
    (0..n)
        .filter_map(|i| log.series("actuation", i))
        .flatten()
        .fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn wipe(log: &RunLog, s: &WipeSpec) -> Result<(bool, String), String> {
    let force = col(log, "normal_force", 0)?;
    let target = s.success.force_target;
    let band = s.success.band * target.abs();
    let contact: Vec<f64> = force.iter().copied().filter(|f| *f > 0.0).collect();
    if contact.is_empty() {
        return Ok((false, "no contact with the board".into()));
    }
    let within = contact
        .iter()
        .filter(|f| (**f - target).abs() <= band)
        .count() as f64
        / contact.len() as f64;
    let (x, y) = (col(log, "ee_pose", 3)?, col(log, "ee_pose", 4)?);
    let (px, py) = (col(log, "path_point", 0)?, col(log, "path_point", 1)?);
    let rms = ((0..x.len())
        .map(|i| (x[i] - px[i]).powi(2) + (y[i] - py[i]).powi(2))
        .sum::<f64>()
        / x.len() as f64)
        .sqrt();
    let summary = format!(
        "force within {:.0}% of {target} N for {:.1}% of contact time, path RMS error {rms:.4} m",
        s.success.band * 100.0,
        within * 100.0
    );
    let ok = within >= s.success.fraction && rms < s.success.path_rms;
    Ok((ok, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyCertificate {
    pub certified: bool,
    /// First offending tick.
    pub first_violation: Option<usize>,
    /// Obstacle index of the first violation.
    pub obstacle: Option<usize>,
    pub ticks_checked: usize,
    pub warning: Option<String>,
}

const BOUNDARY_TOL: f64 = 1e-9;

/// Evaluates the safety index over every tick and obstacle of the log.
/// Certified iff `φ < 0` everywhere, allowing `0 ≤ φ ≤ 1e-9` at ticks whose
/// neighbours are strictly safe.
pub fn certify_safety(
    log: &RunLog,
    spec: &SafetyIndexSpec<f64>,
) -> Result<SafetyCertificate, SimError> {
    let k = log.channel_dim("d");
    if k == 0 || log.channel_dim("d_dot") != k {
        return Err(SimError::Log(
            "safety certificate needs d[i] and d_dot[i] columns".into(),
        ));
    }
    if log.is_empty() {
        return Ok(SafetyCertificate {
            certified: true,
            first_violation: None,
            obstacle: None,
            ticks_checked: 0,
            warning: Some("empty log: certified vacuously".into()),
        });
    }
    let mut first: Option<(usize, usize)> = None;
    for j in 0..k {
        let d = log.series("d", j).expect("column counted");
        let dd = log.series("d_dot", j).expect("column counted");
        let phi: Vec<f64> = d
            .iter()
            .zip(&dd)
            .map(|(a, b)| safety_index_eval(spec, *a, *b).phi)
            .collect();
        let strictly_safe = |i: usize| phi.get(i).is_none_or(|p| *p < 0.0);
        for (i, p) in phi.iter().enumerate() {
            let violation = if *p < 0.0 {
                false
            } else if *p <= BOUNDARY_TOL {
                !(strictly_safe(i.wrapping_sub(1)) && strictly_safe(i + 1))
            } else {
                true
            };
            if violation {
                if first.is_none_or(|(t, _)| i < t) {
                    first = Some((i, j));
                }
                break;
            }
        }
    }
    Ok(SafetyCertificate {
        certified: first.is_none(),
        first_violation: first.map(|f| f.0),
        obstacle: first.map(|f| f.1),
        ticks_checked: log.len(),
        warning: None,
    })
}
