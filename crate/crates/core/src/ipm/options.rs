use crate::{Error, Result};

/// Solver settings. Defaults follow common primal-dual interior-point practice.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct IpmOptions {
    /// Scaled KKT error at which the solve stops.
    pub tol: f64,
    pub max_iter: usize,
    pub mu_init: f64,
    /// Linear barrier reduction factor κ_μ.
    pub mu_shrink: f64,
    /// Superlinear barrier reduction exponent θ_μ.
    pub mu_power: f64,
    /// Barrier subproblem tolerance factor: μ is reduced once `E_μ ≤ kappa_eps · μ`.
    pub kappa_eps: f64,
    /// Fraction-to-boundary factor τ.
    pub tau: f64,
    /// First nonzero primal regularization δ_w.
    pub delta_init: f64,
    pub delta_growth: f64,
    pub delta_max: f64,
    /// Constraint regularization δ_c applied when the KKT matrix has zero pivots.
    pub delta_c: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Smallest accepted backtracking step.
    pub alpha_min: f64,
    /// Iteration budget of the feasibility restoration phase.
    pub restoration_iter: usize,
    /// Wall-clock limit in seconds; `f64::INFINITY` disables it.
    pub time_limit_s: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 3000,
            mu_init: 0.1,
            mu_shrink: 0.2,
            mu_power: 1.5,
            kappa_eps: 10.0,
            tau: 0.995,
            delta_init: 1e-4,
            delta_growth: 10.0,
            delta_max: 1e40,
            delta_c: 1e-8,
            armijo: 1e-4,
            alpha_min: 1e-14,
            restoration_iter: 30,
            time_limit_s: f64::INFINITY,
        }
    }
}

impl IpmOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::InvalidSpec(alloc::format!(
                "invalid solver option: {what}"
            )))
        };
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad("tau must lie in (0, 1)");
        }
        if !(self.mu_shrink > 0.0 && self.mu_shrink < 1.0) {
            return bad("mu_shrink must lie in (0, 1)");
        }
        if !(self.mu_power > 1.0) {
            return bad("mu_power must exceed 1");
        }
        if !(self.mu_init > 0.0) {
            return bad("mu_init must be positive");
        }
        if !(self.delta_init > 0.0 && self.delta_growth > 1.0 && self.delta_max > self.delta_init) {
            return bad("regularization schedule must grow from a positive seed");
        }
        if !(self.armijo > 0.0 && self.armijo < 0.5) {
            return bad("armijo must lie in (0, 0.5)");
        }
        Ok(())
    }

    /// Barrier update `max(tol/10, min(κ_μ μ, μ^θ_μ))`.
    pub fn next_mu(&self, mu: f64) -> f64 {
        (self.tol / 10.0).max((self.mu_shrink * mu).min(crate::math::powf(mu, self.mu_power)))
    }

    pub fn mu_min(&self) -> f64 {
        self.tol / 10.0
    }
}
