use crate::blueprint::instantiate::{
    linear_model, lqr_spec, number, safety_spec, vec2, vec6, vector,
};
use crate::blueprint::{Blueprint, Section, TemplateRef};
use crate::controllers::hybrid::wrench_to_torque;
use crate::controllers::lqr::lqr_eval_into;
use crate::controllers::{
    hybrid_wrench, lqr_make, mpc_plan_from, pid_eval, safe_control_project, stiffness_eval,
    trajectory_eval, Circle, ControllerError, HybridSpec, Keyframe, LqrGain, MpcSpec, PidGains,
    PidState, SafetyIndexSpec, StiffnessSpec, TrajectorySpec,
};
use crate::measurement::MeasurementSchema;
use crate::numerics::Matrix;

/// Offsets of the channels an operational-space controller reads.
#[derive(Clone, Debug)]
pub(crate) struct OpSpace {
    ee_pose: usize,
    ee_vel: usize,
    jacobian: usize,
    gravity: usize,
    joints: usize,
}

impl OpSpace {
    fn locate(schema: &MeasurementSchema) -> Result<Self, String> {
        let at = |name: &str| {
            schema
                .locate(name)
                .map(|(o, _)| o)
                .ok_or_else(|| format!("channel '{name}' missing"))
        };
        Ok(OpSpace {
            ee_pose: at("ee_pose")?,
            ee_vel: at("ee_vel")?,
            jacobian: at("jacobian")?,
            gravity: at("gravity_torque")?,
            joints: schema.actuation_dim(),
        })
    }

    fn pose(&self, y: &[f64]) -> [f64; 6] {
        std::array::from_fn(|i| y[self.ee_pose + i])
    }

    fn vel(&self, y: &[f64]) -> [f64; 6] {
        std::array::from_fn(|i| y[self.ee_vel + i])
    }

    fn jacobian(&self, y: &[f64]) -> Matrix<f64> {
        Matrix::from_row_slice(
            6,
            self.joints,
            &y[self.jacobian..self.jacobian + 6 * self.joints],
        )
        .expect("jacobian channel is 6 x joints")
    }

    fn gravity<'a>(&self, y: &'a [f64]) -> &'a [f64] {
        &y[self.gravity..self.gravity + self.joints]
    }

    fn torque(&self, y: &[f64], w: &[f64; 6], out: &mut Vec<f64>) -> Result<(), ControllerError> {
        let tau = wrench_to_torque(&self.jacobian(y), w, self.gravity(y))?;
        out.clear();
        out.extend_from_slice(&tau);
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub(crate) struct SafeChannels {
    d: usize,
    d_dot: usize,
    drift: usize,
    gain: usize,
    slots: usize,
}

#[derive(Clone, Debug)]
pub(crate) enum Instance {
    Null {
        dim: usize,
    },
    Lqr {
        gain: LqrGain<f64>,
    },
    Pid {
        gains: PidGains<f64>,
        state: PidState<f64>,
        dt: f64,
    },
    Trajectory {
        spec: TrajectorySpec<f64>,
    },
    Stiffness {
        kp: [f64; 6],
        kd: [f64; 6],
        op: OpSpace,
    },
    Hybrid {
        selection: [f64; 6],
        kp: [f64; 6],
        kd: [f64; 6],
        op: OpSpace,
    },
    Mpc {
        spec: MpcSpec<f64>,
        slots: usize,
        warm: Option<Vec<[f64; 2]>>,
    },
    Safe {
        kp: f64,
        kd: f64,
        spec: SafetyIndexSpec<f64>,
        op: OpSpace,
        ch: SafeChannels,
    },
}

impl Instance {
    /// Instantiates the controller of `section`; `period` is its sampling period.
    pub(crate) fn build(
        bp: &Blueprint,
        section: Section,
        schema: &MeasurementSchema,
        period: f64,
    ) -> Result<Instance, String> {
        let t: &TemplateRef = bp.template(section).expect("controller section");
        let p = &t.params;
        let int = |name: &str| number(p, name) as usize;
        Ok(match t.template.as_str() {
            "NullController" => Instance::Null {
                dim: int("output_dim"),
            },
            "LQRController" => {
                let model = linear_model(&bp.task_model)?.ok_or("the task model is not linear")?;
                let spec = lqr_spec(t);
                let gain = lqr_make(&spec, &model, period)
                    .map_err(|e| format!("LQR synthesis failed: {e}"))?;
                Instance::Lqr { gain }
            }
            "PIDController" => {
                let gains = PidGains {
                    kp: vector(p, "kp"),
                    ki: vector(p, "ki"),
                    kd: vector(p, "kd"),
                    integral_limit: number(p, "integral_limit"),
                };
                let state = PidState::new(gains.kp.len());
                Instance::Pid {
                    gains,
                    state,
                    dt: period,
                }
            }
            "CartesianTrajectoryController" => {
                let rows = p
                    .get("keyframes")
                    .and_then(|v| v.as_matrix())
                    .unwrap_or(&[]);
                let keyframes = rows
                    .iter()
                    .map(|r| Keyframe {
                        time: r[0],
                        pose: std::array::from_fn(|i| r[i + 1]),
                    })
                    .collect();
                let spec = TrajectorySpec::new(keyframes).map_err(|e| e.to_string())?;
                Instance::Trajectory { spec }
            }
            "CartesianStiffnessController" => Instance::Stiffness {
                kp: vec6(p, "kp"),
                kd: vec6(p, "kd"),
                op: OpSpace::locate(schema)?,
            },
            "HybridPositionForceController" => {
                let selection = vec6(p, "selection");
                let spec = HybridSpec {
                    selection,
                    force_target: [0.0; 6],
                    pose_target: [0.0; 6],
                    kp: vec6(p, "kp"),
                    kd: vec6(p, "kd"),
                };
                spec.validate().map_err(|e| e.to_string())?;
                Instance::Hybrid {
                    selection,
                    kp: spec.kp,
                    kd: spec.kd,
                    op: OpSpace::locate(schema)?,
                }
            }
            "KinematicTrajectoryMPC" => {
                let spec = MpcSpec {
                    horizon: int("horizon"),
                    step_length: number(p, "step_length"),
                    goal: vec2(p, "goal"),
                    obstacles: vec![],
                    clearance: number(p, "clearance"),
                    iterations: int("iterations"),
                };
                spec.validate().map_err(|e| e.to_string())?;
                Instance::Mpc {
                    spec,
                    slots: int("obstacle_slots"),
                    warm: None,
                }
            }
            "SafeController" => {
                let spec = safety_spec(t);
                spec.validate().map_err(|e| e.to_string())?;
                let at = |name: &str| {
                    schema
                        .locate(name)
                        .map(|(o, _)| o)
                        .ok_or_else(|| format!("channel '{name}' missing"))
                };
                let ch = SafeChannels {
                    d: at("d")?,
                    d_dot: at("d_dot")?,
                    drift: at("d_ddot_drift")?,
                    gain: at("d_ddot_gain")?,
                    slots: int("obstacle_slots"),
                };
                Instance::Safe {
                    kp: number(p, "kp"),
                    kd: number(p, "kd"),
                    spec,
                    op: OpSpace::locate(schema)?,
                    ch,
                }
            }
            other => return Err(format!("{other} is not a controller template")),
        })
    }

    pub(crate) fn output_dim(&self) -> usize {
        match self {
            Instance::Null { dim } => *dim,
            Instance::Lqr { gain } => gain.u0.len(),
            Instance::Pid { gains, .. } => gains.kp.len(),
            Instance::Trajectory { .. } => 12,
            Instance::Mpc { .. } => 2,
            Instance::Stiffness { op, .. }
            | Instance::Hybrid { op, .. }
            | Instance::Safe { op, .. } => op.joints,
        }
    }

    /// Evaluates on converter output `input` and measurements `y` at time `t`.
    pub(crate) fn eval(
        &mut self,
        input: &[f64],
        y: &[f64],
        t: f64,
        out: &mut Vec<f64>,
    ) -> Result<(), ControllerError> {
        match self {
            Instance::Null { dim } => {
                out.clear();
                out.resize(*dim, 0.0);
            }
            Instance::Lqr { gain } => lqr_eval_into(gain, input, out)?,
            Instance::Pid { gains, state, dt } => {
                let (u, next) = pid_eval(gains, state, input, *dt)?;
                *state = next;
                out.clear();
                out.extend_from_slice(&u);
            }
            Instance::Trajectory { spec } => {
                let (pose, twist) = trajectory_eval(spec, t);
                out.clear();
                out.extend_from_slice(&pose);
                out.extend_from_slice(&twist);
            }
            Instance::Stiffness { kp, kd, op } => {
                let spec = StiffnessSpec {
                    kp: *kp,
                    kd: *kd,
                    target_pose: std::array::from_fn(|i| input[i]),
                    target_velocity: std::array::from_fn(|i| input[6 + i]),
                };
                let w = stiffness_eval(&spec, &op.pose(y), &op.vel(y));
                op.torque(y, &w, out)?;
            }
            Instance::Hybrid {
                selection,
                kp,
                kd,
                op,
            } => {
                let spec = HybridSpec {
                    selection: *selection,
                    force_target: std::array::from_fn(|i| input[i]),
                    pose_target: std::array::from_fn(|i| input[6 + i]),
                    kp: *kp,
                    kd: *kd,
                };
                let w = hybrid_wrench(&spec, &op.pose(y), &op.vel(y));
                op.torque(y, &w, out)?;
            }
            Instance::Mpc { spec, slots, warm } => {
                spec.obstacles.clear();
                for k in 0..*slots {
                    let o = &input[2 + 3 * k..5 + 3 * k];
                    if o[2] > 0.0 {
                        spec.obstacles.push(Circle {
                            center: [o[0], o[1]],
                            radius: o[2],
                        });
                    }
                }
                let plan = mpc_plan_from([input[0], input[1]], spec, warm.as_deref())?;
                out.clear();
                out.extend_from_slice(&plan[0]);
                let mut next = plan[1..].to_vec();
                next.push(*plan.last().expect("non-empty plan"));
                *warm = Some(next);
            }
            Instance::Safe {
                kp,
                kd,
                spec,
                op,
                ch,
            } => safe_eval(*kp, *kd, spec, op, ch, input, y, out)?,
        }
        Ok(())
    }
}

/// Planar PD on the translational axes, then the minimum-norm projection for
/// the most critical obstacle on the rate-shaped index
/// `quad·(d_ref² − d²) − rate·ḋ`, whose rate is affine in the joint torque.
#[allow(clippy::too_many_arguments)]
fn safe_eval(
    kp: f64,
    kd: f64,
    spec: &SafetyIndexSpec<f64>,
    op: &OpSpace,
    ch: &SafeChannels,
    input: &[f64],
    y: &[f64],
    out: &mut Vec<f64>,
) -> Result<(), ControllerError> {
    let pose = op.pose(y);
    let vel = op.vel(y);
    let mut w = [0.0; 6];
    for i in 0..2 {
        w[3 + i] = kp * (input[i] - pose[3 + i]) - kd * vel[3 + i];
    }
    op.torque(y, &w, out)?;
    let n = op.joints;
    let mut worst: Option<(usize, f64)> = None;
    for k in 0..ch.slots {
        let d = y[ch.d + k];
        let phi = spec.quad_coeff * (spec.d_ref_sq - d * d) - spec.rate_coeff * y[ch.d_dot + k];
        if worst.is_none_or(|(_, p)| phi > p) {
            worst = Some((k, phi));
        }
    }
    let Some((k, phi)) = worst else { return Ok(()) };
    let d = y[ch.d + k];
    let d_dot = y[ch.d_dot + k];
    let c0 = -2.0 * spec.quad_coeff * d * d_dot - spec.rate_coeff * y[ch.drift + k];
    let c_u: Vec<f64> = (0..n)
        .map(|j| -spec.rate_coeff * y[ch.gain + k * n + j])
        .collect();
    match safe_control_project(out, phi, c0, &c_u, spec) {
        Ok(u) => {
            out.clear();
            out.extend_from_slice(&u);
        }
        Err(ControllerError::Infeasible(_)) => {
            // No authority over the distance rate: hold gravity compensation.
            out.clear();
            out.extend_from_slice(op.gravity(y));
        }
        Err(e) => return Err(e),
    }
    Ok(())
}
