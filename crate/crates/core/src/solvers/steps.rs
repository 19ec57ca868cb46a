use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{op_norm_power, Geometry, PowerOptions, Projector, GRAD_NORM_SQ_BOUND};
use crate::physics::{lipschitz_bound, PhysicsParams};

/// Primal and dual step sizes, `τ = relax · 2 / L` and `σ = 1 / (τ ‖KKᵀ‖)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepSizes {
    pub tau: f64,
    pub sigma: f64,
    pub relax: f64,
    pub norm_kkt: f64,
}

impl StepSizes {
    pub fn from_lipschitz(lipschitz: f64, norm_kkt: f64, relax: f64) -> Result<Self> {
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::invalid(format!("Lipschitz constant must be positive, got {lipschitz}")));
        }
        if !(relax > 0.0 && relax <= 1.0) {
            return Err(Error::invalid(format!("relax must lie in (0, 1], got {relax}")));
        }
        let tau = relax * 2.0 / lipschitz;
        let mut steps = Self::from_tau(tau, norm_kkt)?;
        steps.relax = relax;
        Ok(steps)
    }

    /// Steps for a given primal step, e.g. when the smooth term is absent.
    pub fn from_tau(tau: f64, norm_kkt: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::invalid(format!("tau must be positive, got {tau}")));
        }
        if !(norm_kkt.is_finite() && norm_kkt > 0.0) {
            return Err(Error::invalid(format!("‖KKᵀ‖ must be positive, got {norm_kkt}")));
        }
        let steps = Self { tau, sigma: 1.0 / (tau * norm_kkt), relax: 1.0, norm_kkt };
        steps.validate()?;
        Ok(steps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("step sizes must be positive and finite"));
        }
        if self.tau * self.sigma * self.norm_kkt > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "tau*sigma*‖KKᵀ‖ = {} exceeds 1",
                self.tau * self.sigma * self.norm_kkt
            )));
        }
        Ok(())
    }

    /// Steps for the CT problem on `geom`: `‖A‖` by power iteration and the
    /// analytic bound 8 for `‖∇∇ᵀ‖`.
    pub fn for_problem(geom: &Geometry, params: &PhysicsParams, relax: f64) -> Result<Self> {
        let norm_a = op_norm_power(&Projector::new(geom), PowerOptions::default())?;
        Self::from_lipschitz(lipschitz_bound(params, norm_a), GRAD_NORM_SQ_BOUND, relax)
    }
}
