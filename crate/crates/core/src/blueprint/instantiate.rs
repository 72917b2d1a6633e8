//! Conversions from template parameters to the typed model parameters.

use super::document::TemplateRef;
use super::params::Params;
use crate::controllers::{LqrSpec, SafetyIndexSpec};
use crate::models::{
    cartpole_linearize, Arm2DParams, CartPoleParams, ContactParams, DoorParams, LinearModelParams,
};
use crate::numerics::Matrix;

pub(crate) fn number(params: &Params, name: &str) -> f64 {
    params
        .get(name)
        .and_then(|v| v.as_number())
        .unwrap_or(f64::NAN)
}

pub(crate) fn vector(params: &Params, name: &str) -> Vec<f64> {
    params
        .get(name)
        .and_then(|v| v.as_vector())
        .map(<[f64]>::to_vec)
        .unwrap_or_default()
}

pub(crate) fn vec2(params: &Params, name: &str) -> [f64; 2] {
    let v = vector(params, name);
    [
        v.first().copied().unwrap_or(f64::NAN),
        v.get(1).copied().unwrap_or(f64::NAN),
    ]
}

pub(crate) fn vec6(params: &Params, name: &str) -> [f64; 6] {
    let v = vector(params, name);
    std::array::from_fn(|i| v.get(i).copied().unwrap_or(f64::NAN))
}

pub(crate) fn matrix(params: &Params, name: &str) -> Matrix<f64> {
    let rows = params
        .get(name)
        .and_then(|v| v.as_matrix())
        .map(<[Vec<f64>]>::to_vec)
        .unwrap_or_default();
    if rows.is_empty() {
        return Matrix::zeros(0, 0);
    }
    Matrix::from_rows(&rows).unwrap_or_else(|_| Matrix::zeros(0, 0))
}

pub fn cartpole_params(t: &TemplateRef) -> CartPoleParams<f64> {
    let p = &t.params;
    CartPoleParams {
        m_cart: number(p, "m_cart"),
        m_pole: number(p, "m_pole"),
        l_pole: number(p, "l_pole"),
        gravity: number(p, "gravity"),
    }
}

pub fn arm2d_params(t: &TemplateRef) -> Arm2DParams<f64> {
    let p = &t.params;
    Arm2DParams {
        link_lengths: vec2(p, "link_lengths"),
        link_masses: vec2(p, "link_masses"),
        joint_damping: number(p, "joint_damping"),
        gravity: number(p, "gravity"),
    }
}

pub fn door_params(t: &TemplateRef) -> DoorParams<f64> {
    let p = &t.params;
    DoorParams {
        hinge_inertia: number(p, "hinge_inertia"),
        hinge_damping: number(p, "hinge_damping"),
        handle_radius: number(p, "handle_radius"),
        handle_height: number(p, "handle_height"),
        door_mass: number(p, "door_mass"),
    }
}

pub fn contact_params(t: &TemplateRef) -> ContactParams<f64> {
    let p = &t.params;
    ContactParams {
        stiffness: number(p, "stiffness"),
        damping: number(p, "damping"),
        friction_coeff: number(p, "friction_coeff"),
    }
}

pub fn lqr_spec(t: &TemplateRef) -> LqrSpec<f64> {
    let p = &t.params;
    LqrSpec {
        q: matrix(p, "Q"),
        r: matrix(p, "R"),
        x0: vector(p, "x0"),
        u0: vector(p, "u0"),
    }
}

pub fn safety_spec(t: &TemplateRef) -> SafetyIndexSpec<f64> {
    let p = &t.params;
    SafetyIndexSpec {
        d_min: number(p, "d_min"),
        quad_coeff: number(p, "quad_coeff"),
        d_ref_sq: number(p, "d_ref_sq"),
        rate_coeff: number(p, "rate_coeff"),
        margin_eta: number(p, "margin_eta"),
        conservative: false,
    }
}

/// Linear state-space form of a model template; `Ok(None)` for models
/// without one.
pub fn linear_model(t: &TemplateRef) -> Result<Option<LinearModelParams<f64>>, String> {
    match t.template.as_str() {
        "LinearModel" => {
            let p = &t.params;
            LinearModelParams::new(
                matrix(p, "A"),
                matrix(p, "B"),
                matrix(p, "C"),
                matrix(p, "D"),
            )
            .map(Some)
            .map_err(|e| e.to_string())
        }
        "CartPoleLinearModel" => {
            let (a, b) = cartpole_linearize(&cartpole_params(t)).map_err(|e| e.to_string())?;
            LinearModelParams::state_output(a, b)
                .map(Some)
                .map_err(|e| e.to_string())
        }
        _ => Ok(None),
    }
}
