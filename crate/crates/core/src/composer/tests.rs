use std::sync::Arc;

use super::*;
use crate::measurement::{ChannelSpec, MeasurementBundle, MeasurementSchema};

const BALANCE: &str = include_str!("../../fixtures/blueprints/balance.json");

fn schema() -> Arc<MeasurementSchema> {
    let ch = ChannelSpec::new;
    Arc::new(MeasurementSchema::new(
        vec![
            ch("pole_theta", 1, "rad"),
            ch("pole_omega", 1, "rad/s"),
            ch("cart_pos", 3, "m"),
            ch("cart_vel", 3, "m/s"),
            ch("joint_q", 2, "rad"),
            ch("joint_qd", 2, "rad/s"),
            ch("ee_pose", 6, "rad|m"),
            ch("ee_vel", 6, "rad/s|m/s"),
            ch("gravity_torque", 2, "N m"),
            ch("jacobian", 12, "m"),
        ],
        2,
    ))
}

/// Upright, centred cart with an arbitrary but consistent arm reading.
fn equilibrium(schema: &Arc<MeasurementSchema>) -> MeasurementBundle {
    let mut b = MeasurementBundle::zeros(schema.clone());
    b.set("cart_pos", &[0.0, 0.0, 0.3]);
    b.set("ee_pose", &[1.9, 0.0, 0.0, 0.0, 0.0, 0.3]);
    b.set("gravity_torque", &[3.7, -1.25]);
    b.set(
        "jacobian",
        &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.3, -0.1, 0.2, 0.5],
    );
    b
}

#[test]
fn null_system_outputs_zeros() {
    let s = schema();
    let mut sys = ControlSystem::null_system(s.clone());
    let mut b = equilibrium(&s);
    for k in 0..50 {
        b.set("pole_theta", &[k as f64 * 0.01]);
        assert_eq!(sys.step(&b, k as f64 * 1e-3).unwrap(), &[0.0, 0.0]);
    }
    assert_eq!(sys.actuation_dim(), 2);
    let three = Arc::new(MeasurementSchema::new(
        vec![ChannelSpec::new("x", 1, "")],
        3,
    ));
    let mut sys = ControlSystem::null_system(three.clone());
    assert_eq!(
        sys.step(&MeasurementBundle::zeros(three), 0.0).unwrap(),
        &[0.0; 3]
    );
}

#[test]
fn balance_equilibrium_is_gravity_compensation() {
    let s = schema();
    let bp = Blueprint::parse(BALANCE).unwrap();
    let mut sys = ControlSystem::build(&bp, s.clone()).unwrap();
    assert_eq!(sys.actuation_dim(), 2);
    let b = equilibrium(&s);
    let u = sys.step(&b, 0.0).unwrap().to_vec();
    assert!(
        (u[0] - 3.7).abs() < 1e-9 && (u[1] + 1.25).abs() < 1e-9,
        "{u:?}"
    );
}

#[test]
fn divisor_clock_and_hold() {
    let s = schema();
    let bp = Blueprint::parse(BALANCE).unwrap();
    let mut sys = ControlSystem::build(&bp, s.clone()).unwrap();
    let mut b = equilibrium(&s);
    let mut held = Vec::new();
    for k in 0..95u64 {
        b.set("pole_theta", &[0.01 * (k as f64).sin()]);
        sys.step(&b, k as f64 * 1e-3).unwrap();
        if k % 10 == 0 {
            held = sys.task_control().to_vec();
        } else {
            assert_eq!(sys.task_control(), &held[..]);
        }
    }
    assert_eq!(sys.task_evaluations(), 10);
    assert_eq!(sys.tick(), 95);
}

#[test]
fn deterministic() {
    let s = schema();
    let bp = Blueprint::parse(BALANCE).unwrap();
    let mut a = ControlSystem::build(&bp, s.clone()).unwrap();
    let mut c = ControlSystem::build(&bp, s.clone()).unwrap();
    let mut b = equilibrium(&s);
    for k in 0..200 {
        b.set("pole_theta", &[0.1 * (k as f64 * 0.05).cos()]);
        b.set("cart_vel", &[0.0, 0.02 * k as f64, 0.0]);
        let before = b.clone();
        let ua = a.step(&b, 0.0).unwrap().to_vec();
        let uc = c.step(&b, 0.0).unwrap().to_vec();
        assert_eq!(b, before);
        assert_eq!(
            ua.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            uc.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }
}

#[test]
fn zero_input_weight_names_section() {
    let bp = Blueprint::parse(&BALANCE.replace("\"R\": [[0.01]]", "\"R\": [[0.0]]")).unwrap();
    let err = ControlSystem::build(&bp, schema()).unwrap_err();
    assert_eq!(err.section(), Some(Section::TaskController));
    assert!(err.to_string().starts_with("task_controller"), "{err}");
}

#[test]
fn invalid_blueprint_rejected() {
    let mut bp = Blueprint::parse(BALANCE).unwrap();
    std::mem::swap(
        &mut bp.task_input_converter,
        &mut bp.tracking_input_converter,
    );
    assert!(matches!(
        ControlSystem::build(&bp, schema()),
        Err(ComposeError::Invalid(_))
    ));
}

#[test]
fn non_finite_output_is_fatal() {
    let s = schema();
    let bp = Blueprint::parse(BALANCE).unwrap();
    let mut sys = ControlSystem::build(&bp, s.clone()).unwrap();
    let mut b = equilibrium(&s);
    b.set("pole_theta", &[f64::NAN]);
    let err = sys.step(&b, 0.0).unwrap_err();
    match err {
        ComposeError::NonFinite {
            section,
            dump,
            tick,
            ..
        } => {
            assert_eq!(section, Section::TaskController);
            assert_eq!(tick, 0);
            assert!(dump.contains("pole_theta = [NaN]"));
        }
        e => panic!("{e}"),
    }
}

#[test]
fn schema_mismatch() {
    let mut sys = ControlSystem::null_system(schema());
    let other = Arc::new(MeasurementSchema::new(
        vec![ChannelSpec::new("x", 1, "")],
        2,
    ));
    assert_eq!(
        sys.step(&MeasurementBundle::zeros(other), 0.0).unwrap_err(),
        ComposeError::SchemaMismatch
    );
}

#[test]
fn many_ticks_reuse_buffers() {
    let s = schema();
    let bp = Blueprint::parse(BALANCE).unwrap();
    let mut sys = ControlSystem::build(&bp, s.clone()).unwrap();
    let b = equilibrium(&s);
    sys.step(&b, 0.0).unwrap();
    let caps = (
        sys.v.capacity(),
        sys.u.capacity(),
        sys.scratch.capacity(),
        sys.z_in.capacity(),
        sys.u_in.capacity(),
    );
    for _ in 0..100_000 {
        sys.step(&b, 0.0).unwrap();
    }
    assert_eq!(
        caps,
        (
            sys.v.capacity(),
            sys.u.capacity(),
            sys.scratch.capacity(),
            sys.z_in.capacity(),
            sys.u_in.capacity()
        )
    );
}
