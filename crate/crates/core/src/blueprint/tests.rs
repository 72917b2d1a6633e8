use super::*;
use crate::measurement::{ChannelSpec, MeasurementSchema};

const BALANCE: &str = include_str!("../../fixtures/blueprints/balance.json");

fn cartpole_schema() -> MeasurementSchema {
    let ch = ChannelSpec::new;
    MeasurementSchema::new(
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
    )
}

#[test]
fn balance_fixture_parses() {
    let bp = Blueprint::parse(BALANCE).unwrap();
    assert_eq!(bp.task_controller.template, "LQRController");
    // alias in the file resolves to the canonical name
    assert_eq!(
        bp.tracking_controller.template,
        "HybridPositionForceController"
    );
    assert_eq!(
        bp.task_controller.params["x0"],
        ParamValue::Vector(vec![0.0; 4])
    );
    assert_eq!(bp.rates.task_rate_divisor, 10);
    assert!(validate_blueprint(&bp, &cartpole_schema()).is_empty());
}

#[test]
fn canonical_round_trip() {
    let bp = Blueprint::parse(BALANCE).unwrap();
    let a = bp.to_canonical();
    let b = bp.to_canonical();
    assert_eq!(a, b);
    let again = Blueprint::parse(&a).unwrap();
    assert_eq!(again, bp);
    assert_eq!(again.to_canonical(), a);
    assert!(a.contains("\"task_rate_divisor\": 10,"));
    assert!(a.contains("[0.0, 0.0, 100.0, 0.0]"));
}

#[test]
fn unknown_template() {
    let doc = BALANCE.replace("\"LQRController\"", "\"FooController\"");
    let err = Blueprint::parse(&doc).unwrap_err();
    assert!(err.to_string().contains("unknown template"), "{err}");
    assert!(err.to_string().contains("task_controller"));
}

#[test]
fn shape_violation_and_aggregation() {
    let doc = BALANCE
        .replace("\"R\": [[0.01]]", "\"R\": [[0.01], [0.0]]")
        .replace("out[0] = meas(cart_pos, 1);", "out[0] = meas(cart_pos 1);")
        .replace("out[4] = task(0);", "out[4] = task(;");
    let err = Blueprint::parse(&doc).unwrap_err();
    let all = err.errors();
    assert_eq!(all.len(), 3, "{err}");
    assert!(matches!(all[0], BlueprintError::Param { param, .. } if param == "R"));
    assert!(matches!(
        all[1],
        BlueprintError::Converter {
            section: Section::TaskInputConverter,
            ..
        }
    ));
    assert!(matches!(
        all[2],
        BlueprintError::Converter {
            section: Section::TrackingInputConverter,
            ..
        }
    ));
}

#[test]
fn malformed_json_reports_position() {
    let err = Blueprint::parse("{\n  \"format\": 1,\n  oops\n}").unwrap_err();
    assert!(matches!(err, BlueprintError::Json { line: 3, .. }), "{err}");
    let err = Blueprint::parse(&BALANCE.replace("\"format\": 1", "\"format\": 2")).unwrap_err();
    assert!(matches!(err, BlueprintError::Format(_)));
}

#[test]
fn swapped_converters_flag_both_ports() {
    let mut bp = Blueprint::parse(BALANCE).unwrap();
    std::mem::swap(
        &mut bp.task_input_converter,
        &mut bp.tracking_input_converter,
    );
    let issues = validate_blueprint(&bp, &cartpole_schema());
    assert!(
        issues
            .iter()
            .any(|i| i.section == Section::TaskInputConverter
                && i.message.contains("dimension mismatch")),
        "{issues:?}"
    );
    assert!(
        issues
            .iter()
            .any(|i| i.section == Section::TrackingInputConverter
                && i.message.contains("dimension mismatch")),
        "{issues:?}"
    );
}

#[test]
fn actuation_mismatch() {
    let mut bp = Blueprint::parse(BALANCE).unwrap();
    bp.replace_section(
        Section::TrackingController,
        r#"{"template": "NullController", "params": {"output_dim": 6}}"#,
    )
    .unwrap();
    let issues = validate_blueprint(&bp, &cartpole_schema());
    assert!(
        issues
            .iter()
            .any(|i| i.message.contains("actuation dimension mismatch")),
        "{issues:?}"
    );
}

#[test]
fn missing_channel_and_model_checks() {
    let mut bp = Blueprint::parse(BALANCE).unwrap();
    let schema = MeasurementSchema::new(
        cartpole_schema()
            .channels()
            .iter()
            .filter(|c| c.name != "jacobian")
            .cloned()
            .collect(),
        2,
    );
    let issues = validate_blueprint(&bp, &schema);
    assert!(
        issues.iter().any(|i| i.message.contains("'jacobian'")),
        "{issues:?}"
    );

    bp.replace_section(Section::TaskModel, r#"{"template": "DoorModel"}"#)
        .unwrap();
    let issues = validate_blueprint(&bp, &cartpole_schema());
    assert!(
        issues
            .iter()
            .any(|i| i.section == Section::TaskModel && i.message.contains("linear")),
        "{issues:?}"
    );

    bp.rates.tracking_dt = 0.02;
    let issues = validate_blueprint(&bp, &cartpole_schema());
    assert!(issues.iter().any(|i| i.section == Section::Rates));
}

#[test]
fn registry_completeness() {
    for name in [
        "LQRController",
        "HybridPositionForceController",
        "PoseForceController",
        "CartesianTrajectoryController",
        "CartesianInterpolationController",
        "CartesianStiffnessController",
        "KinematicTrajectoryMPC",
        "SafeController",
        "LinearModel",
    ] {
        assert!(Registry::standard().lookup(name).is_some(), "{name}");
    }
}

#[test]
fn section_replacement() {
    let mut bp = Blueprint::parse(BALANCE).unwrap();
    let text = bp.section_text(Section::TaskController);
    let mut other = Blueprint::null(2);
    other
        .replace_section(Section::TaskController, &text)
        .unwrap();
    assert_eq!(other.task_controller, bp.task_controller);
    assert!(bp
        .replace_section(Section::Rates, "{\"tracking_dt\": 0.002}")
        .is_ok());
    assert_eq!(bp.rates.task_rate_divisor, 10);
    assert!(bp
        .replace_section(Section::TaskInputConverter, "dim 1; out[0] = nope(")
        .is_err());
}

#[test]
fn param_paths() {
    let mut bp = Blueprint::parse(BALANCE).unwrap();
    let p: ParamPath = "task_controller.Q[2][2]".parse().unwrap();
    assert_eq!(bp.get_param(&p), Some(100.0));
    bp.set_param(&p, 300.0).unwrap();
    assert_eq!(bp.get_param(&p), Some(300.0));
    let off: ParamPath = "task_controller.Q[0][1]".parse().unwrap();
    bp.set_param(&off, 0.5).unwrap();
    assert_eq!(
        bp.get_param(&"task_controller.Q[1][0]".parse().unwrap()),
        Some(0.5)
    );
    assert!(bp
        .set_param(&"task_controller.Q[9][9]".parse().unwrap(), 1.0)
        .is_err());
    assert!(bp
        .set_param(&"task_controller.Z".parse().unwrap(), 1.0)
        .is_err());
}

#[test]
fn null_blueprint_validates() {
    let bp = Blueprint::null(2);
    assert!(validate_blueprint(&bp, &cartpole_schema()).is_empty());
    let text = bp.to_canonical();
    assert_eq!(Blueprint::parse(&text).unwrap(), bp);
}
