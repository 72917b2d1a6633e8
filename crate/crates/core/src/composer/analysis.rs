use crate::blueprint::instantiate::{linear_model, lqr_spec, safety_spec};
use crate::blueprint::{Blueprint, Section};
use crate::controllers::{lqr_make, SafetyIndexSpec};
use crate::numerics::{certify_stability, StabilityCertificate, StabilityKind};

/// Period at which the gain is re-solved for the continuous-time check.
pub const FINE_DT: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct LqrAnalysis {
    /// `A_d − B_d·K` at the task controller's period.
    pub discrete: StabilityCertificate<f64>,
    /// `A − B·K` with `K` solved at [`FINE_DT`].
    pub continuous: StabilityCertificate<f64>,
}

/// Closed-loop eigenvalues of an LQR task controller on its linear task
/// model; `Ok(None)` if the blueprint has no LQR task controller.
pub fn analyze_lqr(bp: &Blueprint) -> Result<Option<LqrAnalysis>, String> {
    if bp.task_controller.template != "LQRController" {
        return Ok(None);
    }
    let model = linear_model(&bp.task_model)?.ok_or("the task model is not linear")?;
    let spec = lqr_spec(&bp.task_controller);
    let gain = lqr_make(&spec, &model, bp.rates.task_dt()).map_err(|e| e.to_string())?;
    let discrete = certify_stability(&gain.a_d, &gain.b_d, &gain.k, StabilityKind::Discrete)
        .map_err(|e| e.to_string())?;
    let fine = lqr_make(&spec, &model, FINE_DT).map_err(|e| e.to_string())?;
    let continuous = certify_stability(&model.a, &model.b, &fine.k, StabilityKind::Continuous)
        .map_err(|e| e.to_string())?;
    Ok(Some(LqrAnalysis {
        discrete,
        continuous,
    }))
}

/// Safety-index parameters of the first SafeController in the blueprint.
pub fn safety_index_of(bp: &Blueprint) -> Option<SafetyIndexSpec<f64>> {
    [Section::TrackingController, Section::TaskController]
        .into_iter()
        .filter_map(|s| bp.template(s))
        .find(|t| t.template == "SafeController")
        .map(safety_spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balance_fixture_is_stable() {
        let bp = Blueprint::parse(include_str!("../../fixtures/blueprints/balance.json")).unwrap();
        let a = analyze_lqr(&bp).unwrap().unwrap();
        assert!(a.discrete.stable && a.discrete.spectral_radius() < 1.0);
        assert!(a.continuous.stable && a.continuous.max_real_part() < 0.0);
        assert_eq!(a.discrete.eigenvalues.len(), 4);
        assert!(safety_index_of(&bp).is_none());
    }

    #[test]
    fn non_lqr_blueprints() {
        let bp =
            Blueprint::parse(include_str!("../../fixtures/blueprints/pickplace.json")).unwrap();
        assert_eq!(analyze_lqr(&bp), Ok(None));
        let s = safety_index_of(&bp).unwrap();
        assert_eq!(s.margin_eta, 20.0);
    }
}
