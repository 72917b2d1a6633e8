use std::sync::OnceLock;

use super::params::{Bound, Dim, ParamDefault, ParamKind, ParamSchema, Params};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TemplateKind {
    Model,
    Controller,
}

/// Dimension of a port, possibly derived from parameters or the environment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PortDim {
    Fixed(usize),
    /// Rows (axis 0) or columns (axis 1) of a matrix parameter.
    ParamAxis(&'static str, u8),
    /// Value of an integer parameter.
    ParamValue(&'static str),
    /// `base + per * k` where `k` is an integer parameter.
    Slots {
        base: usize,
        per: usize,
        param: &'static str,
    },
    /// Number of actuated joints of the environment.
    Actuation,
}

impl PortDim {
    pub fn resolve(&self, params: &Params, actuation: usize) -> Option<usize> {
        let int = |name: &str| {
            params
                .get(name)
                .and_then(|v| v.as_number())
                .map(|x| x as usize)
        };
        match *self {
            PortDim::Fixed(n) => Some(n),
            PortDim::ParamAxis(name, axis) => params.get(name).map(|v| {
                let (r, c) = v.shape();
                if axis == 0 {
                    r
                } else {
                    c
                }
            }),
            PortDim::ParamValue(name) => int(name),
            PortDim::Slots { base, per, param } => int(param).map(|k| base + per * k),
            PortDim::Actuation => Some(actuation),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            PortDim::Fixed(n) => n.to_string(),
            PortDim::ParamAxis(p, 0) => format!("rows({p})"),
            PortDim::ParamAxis(p, _) => format!("cols({p})"),
            PortDim::ParamValue(p) => p.to_string(),
            PortDim::Slots { base, per, param } => format!("{base}+{per}*{param}"),
            PortDim::Actuation => "n_joints".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PortSpec {
    pub dim: PortDim,
    pub semantics: &'static str,
}

/// A measurement channel a controller reads directly.
#[derive(Clone, Debug)]
pub struct ChannelRequirement {
    pub name: &'static str,
    pub dim: PortDim,
    /// Multiplied by the number of joints (Jacobian-shaped channels).
    pub per_joint: bool,
}

impl ChannelRequirement {
    pub fn resolve(&self, params: &Params, actuation: usize) -> Option<usize> {
        self.dim
            .resolve(params, actuation)
            .map(|n| if self.per_joint { n * actuation } else { n })
    }
}

#[derive(Clone, Debug)]
pub struct TemplateDescriptor {
    pub name: &'static str,
    pub kind: TemplateKind,
    pub aliases: &'static [&'static str],
    pub summary: &'static str,
    pub params: Vec<ParamSchema>,
    /// Controllers: input vector. Models: control input.
    pub input: PortSpec,
    /// Controllers: output vector. Models: measured output.
    pub output: PortSpec,
    /// Models only: state dimension.
    pub state: Option<PortDim>,
    pub requires_channels: Vec<ChannelRequirement>,
    /// True when the controller is built from a linear task model.
    pub needs_linear_model: bool,
    /// Models that can be turned into a linear state-space model.
    pub linear: bool,
}

impl TemplateDescriptor {
    pub fn param(&self, name: &str) -> Option<&ParamSchema> {
        self.params.iter().find(|p| p.name == name)
    }
}

#[derive(Debug)]
pub struct Registry {
    templates: Vec<TemplateDescriptor>,
}

impl Registry {
    /// The built-in template library.
    pub fn standard() -> &'static Registry {
        static REG: OnceLock<Registry> = OnceLock::new();
        REG.get_or_init(|| Registry {
            templates: standard_templates(),
        })
    }

    /// A registry over an explicit template list (names must be unique).
    pub fn new(templates: Vec<TemplateDescriptor>) -> Registry {
        Registry { templates }
    }

    pub fn templates(&self) -> &[TemplateDescriptor] {
        &self.templates
    }

    /// Looks a template up by canonical name or alias.
    pub fn lookup(&self, name: &str) -> Option<&TemplateDescriptor> {
        self.templates
            .iter()
            .find(|t| t.name == name || t.aliases.contains(&name))
    }
}

const fn p(
    name: &'static str,
    kind: ParamKind,
    unit: &'static str,
    doc: &'static str,
) -> ParamSchema {
    ParamSchema::new(name, kind, unit, doc)
}

const SCALAR: ParamKind = ParamKind::Scalar;
const V2: ParamKind = ParamKind::Vector(Dim::Fixed(2));
const V6: ParamKind = ParamKind::Vector(Dim::Fixed(6));

fn port(dim: PortDim, semantics: &'static str) -> PortSpec {
    PortSpec { dim, semantics }
}

fn op_space_channels() -> Vec<ChannelRequirement> {
    vec![
        ChannelRequirement {
            name: "ee_pose",
            dim: PortDim::Fixed(6),
            per_joint: false,
        },
        ChannelRequirement {
            name: "ee_vel",
            dim: PortDim::Fixed(6),
            per_joint: false,
        },
        ChannelRequirement {
            name: "jacobian",
            dim: PortDim::Fixed(6),
            per_joint: true,
        },
        ChannelRequirement {
            name: "gravity_torque",
            dim: PortDim::Actuation,
            per_joint: false,
        },
    ]
}

fn model(
    name: &'static str,
    summary: &'static str,
    params: Vec<ParamSchema>,
    input: PortDim,
    state: PortDim,
) -> TemplateDescriptor {
    TemplateDescriptor {
        name,
        kind: TemplateKind::Model,
        aliases: &[],
        summary,
        params,
        input: port(input, "control input"),
        output: port(state, "full state"),
        state: Some(state),
        requires_channels: vec![],
        needs_linear_model: false,
        linear: false,
    }
}

fn controller(
    name: &'static str,
    summary: &'static str,
    params: Vec<ParamSchema>,
    input: PortSpec,
    output: PortSpec,
) -> TemplateDescriptor {
    TemplateDescriptor {
        name,
        kind: TemplateKind::Controller,
        aliases: &[],
        summary,
        params,
        input,
        output,
        state: None,
        requires_channels: vec![],
        needs_linear_model: false,
        linear: false,
    }
}

fn standard_templates() -> Vec<TemplateDescriptor> {
    use Bound::*;
    use ParamDefault as D;
    let mut linear = model(
        "LinearModel",
        "Continuous-time linear state-space model x' = Ax + Bu, y = Cx + Du.",
        vec![
            p(
                "A",
                ParamKind::Matrix(Dim::Any, Dim::SameAs("A", 0)),
                "",
                "state matrix",
            ),
            p(
                "B",
                ParamKind::Matrix(Dim::SameAs("A", 0), Dim::Any),
                "",
                "input matrix",
            ),
            p(
                "C",
                ParamKind::Matrix(Dim::Any, Dim::SameAs("A", 0)),
                "",
                "output matrix",
            ),
            p(
                "D",
                ParamKind::Matrix(Dim::SameAs("C", 0), Dim::SameAs("B", 1)),
                "",
                "feedthrough matrix",
            ),
        ],
        PortDim::ParamAxis("B", 1),
        PortDim::ParamAxis("A", 0),
    );
    linear.output = port(PortDim::ParamAxis("C", 0), "output y");
    linear.linear = true;

    let mut cartpole = model(
        "CartPoleLinearModel",
        "Cart-pole linearized about the upright equilibrium; state (x, x', theta, theta').",
        vec![
            p("m_cart", SCALAR, "kg", "cart mass")
                .bound(Positive)
                .default(D::Number(0.1)),
            p("m_pole", SCALAR, "kg", "pole mass")
                .bound(Positive)
                .default(D::Number(0.1)),
            p("l_pole", SCALAR, "m", "pole length")
                .bound(Positive)
                .default(D::Number(0.5)),
            p("gravity", SCALAR, "m/s^2", "gravitational acceleration")
                .bound(NonNegative)
                .default(D::Number(9.81)),
        ],
        PortDim::Fixed(1),
        PortDim::Fixed(4),
    );
    cartpole.linear = true;

    let arm = model(
        "Arm2DModel",
        "Planar two-link arm with uniform rods; state (q, q').",
        vec![
            p("link_lengths", V2, "m", "link lengths")
                .bound(Positive)
                .default(D::Vector(&[0.5, 0.5])),
            p("link_masses", V2, "kg", "link masses")
                .bound(Positive)
                .default(D::Vector(&[1.0, 0.8])),
            p(
                "joint_damping",
                SCALAR,
                "N m s/rad",
                "viscous joint damping",
            )
            .bound(NonNegative)
            .default(D::Number(0.05)),
            p("gravity", SCALAR, "m/s^2", "gravitational acceleration")
                .bound(NonNegative)
                .default(D::Number(9.81)),
        ],
        PortDim::Fixed(2),
        PortDim::Fixed(4),
    );

    let door = model(
        "DoorModel",
        "Hinged door with viscous hinge damping; state (angle, rate).",
        vec![
            p("hinge_inertia", SCALAR, "kg m^2", "inertia about the hinge")
                .bound(Positive)
                .default(D::Number(2.0 * 0.25 / 3.0)),
            p("hinge_damping", SCALAR, "N m s/rad", "hinge damping")
                .bound(NonNegative)
                .default(D::Number(0.5)),
            p("handle_radius", SCALAR, "m", "hinge to handle distance")
                .bound(Positive)
                .default(D::Number(0.5)),
            p("handle_height", SCALAR, "m", "handle height")
                .bound(NonNegative)
                .default(D::Number(1.0)),
            p("door_mass", SCALAR, "kg", "door mass")
                .bound(Positive)
                .default(D::Number(2.0)),
        ],
        PortDim::Fixed(1),
        PortDim::Fixed(2),
    );

    let contact = model(
        "ContactModel",
        "Penalty contact: normal force from penetration and its rate, Coulomb friction.",
        vec![
            p("stiffness", SCALAR, "N/m", "contact stiffness")
                .bound(Positive)
                .default(D::Number(2000.0)),
            p("damping", SCALAR, "N s/m", "contact damping")
                .bound(NonNegative)
                .default(D::Number(20.0)),
            p("friction_coeff", SCALAR, "", "Coulomb friction coefficient")
                .bound(NonNegative)
                .default(D::Number(0.2)),
        ],
        PortDim::Fixed(1),
        PortDim::Fixed(1),
    );

    let null_model = model(
        "NullModel",
        "No model.",
        vec![],
        PortDim::Fixed(0),
        PortDim::Fixed(0),
    );

    let mut lqr = controller(
        "LQRController",
        "Discrete LQR about (x0, u0) on the ZOH-discretized task model; u = u0 - K (z - x0).",
        vec![
            p(
                "Q",
                ParamKind::Matrix(Dim::Any, Dim::SameAs("Q", 0)),
                "",
                "state weight (symmetric PSD)",
            ),
            p(
                "R",
                ParamKind::Matrix(Dim::Any, Dim::SameAs("R", 0)),
                "",
                "input weight (symmetric PD)",
            ),
            p(
                "x0",
                ParamKind::Vector(Dim::SameAs("Q", 0)),
                "",
                "operating state",
            )
            .default(D::Zeros),
            p(
                "u0",
                ParamKind::Vector(Dim::SameAs("R", 0)),
                "",
                "operating input",
            )
            .default(D::Zeros),
        ],
        port(PortDim::ParamAxis("Q", 0), "task-model state estimate"),
        port(PortDim::ParamAxis("R", 0), "task control"),
    );
    lqr.needs_linear_model = true;

    let pid = controller(
        "PIDController",
        "Per-axis PID on an error vector; the integral is clamped to +/- integral_limit.",
        vec![
            p("kp", ParamKind::Vector(Dim::Any), "", "proportional gains"),
            p(
                "ki",
                ParamKind::Vector(Dim::SameAs("kp", 0)),
                "",
                "integral gains",
            )
            .default(D::Zeros),
            p(
                "kd",
                ParamKind::Vector(Dim::SameAs("kp", 0)),
                "",
                "derivative gains",
            )
            .default(D::Zeros),
            p("integral_limit", SCALAR, "", "integral clamp")
                .bound(Positive)
                .default(D::Number(1000.0)),
        ],
        port(PortDim::ParamAxis("kp", 0), "error"),
        port(PortDim::ParamAxis("kp", 0), "command"),
    );

    let mut traj = controller(
        "CartesianTrajectoryController",
        "Cubic Hermite interpolation of keyframes [t, rx, ry, rz, x, y, z]; outputs target pose and twist.",
        vec![p("keyframes", ParamKind::Matrix(Dim::Any, Dim::Fixed(7)), "s, rad, m", "rows of time then 6D pose")],
        port(PortDim::Fixed(0), "none (driven by time)"),
        port(PortDim::Fixed(12), "target pose (6) then target twist (6)"),
    );
    traj.aliases = &["CartesianInterpolationController"];

    let mut stiffness = controller(
        "CartesianStiffnessController",
        "Cartesian spring-damper: tau = J^T (Kp (p* - p) + Kd (v* - v)) + g(q).",
        vec![
            p("kp", V6, "N/m, N m/rad", "stiffness per axis").bound(NonNegative),
            p("kd", V6, "N s/m, N m s/rad", "damping per axis").bound(NonNegative),
        ],
        port(PortDim::Fixed(12), "target pose (6) then target twist (6)"),
        port(PortDim::Actuation, "joint torques"),
    );
    stiffness.requires_channels = op_space_channels();

    let mut hybrid = controller(
        "HybridPositionForceController",
        "Selection-matrix hybrid control: force on selected axes, stiffness on the rest, plus gravity compensation.",
        vec![
            p("selection", V6, "", "1 = force-controlled axis, 0 = position-controlled"),
            p("kp", V6, "N/m, N m/rad", "stiffness per axis").bound(NonNegative),
            p("kd", V6, "N s/m, N m s/rad", "damping per axis").bound(NonNegative),
        ],
        port(PortDim::Fixed(12), "target wrench (6) then target pose (6)"),
        port(PortDim::Actuation, "joint torques"),
    );
    hybrid.aliases = &["PoseForceController"];
    hybrid.requires_channels = op_space_channels();

    let mut mpc = controller(
        "KinematicTrajectoryMPC",
        "Planar kinematic waypoint planner avoiding circular obstacles; outputs the next waypoint.",
        vec![
            p("horizon", ParamKind::Integer, "", "number of waypoints").default(D::Number(20.0)),
            p("step_length", SCALAR, "m", "maximum waypoint spacing")
                .bound(Positive)
                .default(D::Number(0.02)),
            p("goal", V2, "m", "goal position"),
            p("clearance", SCALAR, "m", "obstacle clearance")
                .bound(NonNegative)
                .default(D::Number(0.05)),
            p(
                "iterations",
                ParamKind::Integer,
                "",
                "solver iterations per call",
            )
            .default(D::Number(30.0)),
            p(
                "obstacle_slots",
                ParamKind::Integer,
                "",
                "obstacle entries in the input",
            )
            .default(D::Number(1.0)),
        ],
        port(
            PortDim::Slots {
                base: 2,
                per: 3,
                param: "obstacle_slots",
            },
            "position (2) then (cx, cy, r) per obstacle; r <= 0 marks an empty slot",
        ),
        port(PortDim::Fixed(2), "next waypoint"),
    );
    mpc.aliases = &["KinematicTrajectoryModelPredictiveController"];

    let mut safe = controller(
        "SafeController",
        "Planar PD to a target point with the joint torque projected onto the safe half-space of the distance index.",
        vec![
            p("kp", SCALAR, "N/m", "translational stiffness").bound(NonNegative).default(D::Number(200.0)),
            p("kd", SCALAR, "N s/m", "translational damping").bound(NonNegative).default(D::Number(30.0)),
            p("d_min", SCALAR, "m", "minimum distance").bound(NonNegative).default(D::Number(0.02)),
            p("quad_coeff", SCALAR, "", "quadratic distance coefficient").bound(NonNegative).default(D::Number(100.0)),
            p("d_ref_sq", SCALAR, "m^2", "squared reference distance").bound(NonNegative).default(D::Number(0.0004)),
            p("rate_coeff", SCALAR, "s", "distance-rate coefficient").bound(NonNegative).default(D::Number(10.0)),
            p("margin_eta", SCALAR, "1/s", "decay margin").bound(NonNegative).default(D::Number(1.0)),
            p("obstacle_slots", ParamKind::Integer, "", "distance channel entries").default(D::Number(1.0)),
        ],
        port(PortDim::Fixed(2), "target position"),
        port(PortDim::Actuation, "joint torques"),
    );
    safe.requires_channels = op_space_channels();
    safe.requires_channels.extend([
        ChannelRequirement {
            name: "d",
            dim: PortDim::ParamValue("obstacle_slots"),
            per_joint: false,
        },
        ChannelRequirement {
            name: "d_dot",
            dim: PortDim::ParamValue("obstacle_slots"),
            per_joint: false,
        },
        ChannelRequirement {
            name: "d_ddot_drift",
            dim: PortDim::ParamValue("obstacle_slots"),
            per_joint: false,
        },
        ChannelRequirement {
            name: "d_ddot_gain",
            dim: PortDim::ParamValue("obstacle_slots"),
            per_joint: true,
        },
    ]);

    let null = controller(
        "NullController",
        "Outputs zeros.",
        vec![p("output_dim", ParamKind::Integer, "", "output dimension")],
        port(PortDim::Fixed(0), "none"),
        port(PortDim::ParamValue("output_dim"), "zeros"),
    );

    vec![
        linear, cartpole, arm, door, contact, null_model, lqr, pid, traj, stiffness, hybrid, mpc,
        safe, null,
    ]
}

/// Human-readable listing of every built-in template.
pub fn library_summary() -> String {
    Registry::standard().summary()
}

impl Registry {
    /// Listing of every template (alphabetical within models, then
    /// controllers): ports, parameters with shapes and units, channels read.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for kind in [TemplateKind::Model, TemplateKind::Controller] {
            out.push_str(match kind {
                TemplateKind::Model => "# Models\n",
                TemplateKind::Controller => "\n# Controllers\n",
            });
            let mut sorted: Vec<&TemplateDescriptor> =
                self.templates.iter().filter(|t| t.kind == kind).collect();
            sorted.sort_by_key(|t| t.name);
            for t in sorted {
                out.push_str(&format!("\n## {}\n{}\n", t.name, t.summary));
                if !t.aliases.is_empty() {
                    out.push_str(&format!("aliases: {}\n", t.aliases.join(", ")));
                }
                match kind {
                    TemplateKind::Model => {
                        if let Some(s) = t.state {
                            out.push_str(&format!("state: {}\n", s.label()));
                        }
                        out.push_str(&format!(
                            "input: {} ({})\n",
                            t.input.dim.label(),
                            t.input.semantics
                        ));
                    }
                    TemplateKind::Controller => {
                        out.push_str(&format!(
                            "input: {} ({})\n",
                            t.input.dim.label(),
                            t.input.semantics
                        ));
                        out.push_str(&format!(
                            "output: {} ({})\n",
                            t.output.dim.label(),
                            t.output.semantics
                        ));
                    }
                }
                if t.needs_linear_model {
                    out.push_str("requires: a linear task model\n");
                }
                if !t.requires_channels.is_empty() {
                    let chans: Vec<String> = t
                        .requires_channels
                        .iter()
                        .map(|c| {
                            let d = c.dim.label();
                            if c.per_joint {
                                format!("{}[{}*n_joints]", c.name, d)
                            } else {
                                format!("{}[{}]", c.name, d)
                            }
                        })
                        .collect();
                    out.push_str(&format!("reads channels: {}\n", chans.join(", ")));
                }
                if !t.params.is_empty() {
                    let names: Vec<&str> = t.params.iter().map(|p| p.name).collect();
                    out.push_str(&format!("parameters: {}\n", names.join(", ")));
                }
                for prm in &t.params {
                    let unit = if prm.unit.is_empty() {
                        String::new()
                    } else {
                        format!(" [{}]", prm.unit)
                    };
                    let default = match prm.default {
                        Some(ParamDefault::Number(x)) => format!(" (default {x})"),
                        Some(ParamDefault::Vector(v)) => format!(" (default {v:?})"),
                        Some(ParamDefault::Zeros) => " (default zeros)".into(),
                        None => String::new(),
                    };
                    out.push_str(&format!(
                        "- {}: {}{} {}{}\n",
                        prm.name,
                        prm.kind_label(),
                        unit,
                        prm.doc,
                        default
                    ));
                }
            }
        }
        out
    }
}
