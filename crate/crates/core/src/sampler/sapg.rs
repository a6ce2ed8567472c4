//! Stochastic-approximation updates of the MRF hyperparameters.
//!
//! The gradient of the log marginal likelihood in a prior parameter is the
//! posterior expectation of the score minus its prior expectation. Both are
//! replaced by single states: the main chain for the posterior and the
//! companion prior chains for the prior. Steps follow `δ_u = δ₀ u^(−decay)`
//! and every iterate is projected back onto a box.

use serde::{Deserialize, Serialize};

use crate::state::HyperParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SapgConfig {
    /// Initial steps; `None` picks the step so that the first update moves
    /// the parameter by `first_step_fraction` of its value.
    pub delta0_eps: Option<f64>,
    pub delta0_beta_n: Option<f64>,
    pub delta0_beta_l: Option<f64>,
    pub delta0_beta_0: Option<f64>,
    pub delta0_c: Option<f64>,
    pub first_step_fraction: f64,
    pub decay: f64,
    pub eps_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub c_min: f64,
    pub c_max: f64,
    /// Freeze `θ` at the mean of the iterates over this trailing fraction of
    /// the burn-in instead of the last iterate (0 disables averaging).
    pub average_fraction: f64,
}

impl Default for SapgConfig {
    fn default() -> Self {
        Self {
            delta0_eps: None,
            delta0_beta_n: None,
            delta0_beta_l: None,
            delta0_beta_0: None,
            delta0_c: None,
            first_step_fraction: 0.05,
            decay: 0.8,
            eps_max: 50.0,
            beta_min: 1e-3,
            beta_max: 5.0,
            c_min: 1.0 + 1e-3,
            c_max: 100.0,
            average_fraction: 0.0,
        }
    }
}

/// Gradient estimate, one entry per adapted parameter.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ThetaGradient {
    pub eps: f64,
    pub beta_n: f64,
    pub beta_l: f64,
    pub beta_0: f64,
    pub c: Vec<f64>,
}

/// Resolved initial steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SapgSteps {
    pub eps: f64,
    pub beta_n: f64,
    pub beta_l: f64,
    pub beta_0: f64,
    pub c: Vec<f64>,
}

fn auto(given: Option<f64>, value: f64, grad: f64, fraction: f64) -> f64 {
    given.unwrap_or_else(|| if grad.abs() > 1e-12 { fraction * value.abs().max(1e-3) / grad.abs() } else { 0.0 })
}

impl SapgSteps {
    pub fn unresolved(n_endmember: usize) -> Self {
        Self { eps: 0.0, beta_n: 0.0, beta_l: 0.0, beta_0: 0.0, c: vec![0.0; n_endmember] }
    }

    /// Fixes `δ₀` for every parameter that has none yet, from the
    /// configuration or, when it is left open, from the current gradient.
    /// A parameter whose gradient is still zero stays unresolved.
    pub fn resolve(&mut self, cfg: &SapgConfig, theta: &HyperParams, g: &ThetaGradient) {
        let f = cfg.first_step_fraction;
        let fill = |slot: &mut f64, given: Option<f64>, value: f64, grad: f64| {
            if *slot == 0.0 {
                *slot = auto(given, value, grad, f);
            }
        };
        fill(&mut self.eps, cfg.delta0_eps, theta.eps, g.eps);
        fill(&mut self.beta_n, cfg.delta0_beta_n, theta.beta_n, g.beta_n);
        fill(&mut self.beta_l, cfg.delta0_beta_l, theta.beta_l, g.beta_l);
        fill(&mut self.beta_0, cfg.delta0_beta_0, theta.beta_0, g.beta_0);
        for ((slot, &c), &gc) in self.c.iter_mut().zip(&theta.c).zip(&g.c) {
            fill(slot, cfg.delta0_c, c, gc);
        }
    }
}

/// Projects `θ` onto the box.
pub fn project(theta: &mut HyperParams, cfg: &SapgConfig) {
    theta.eps = theta.eps.clamp(0.0, cfg.eps_max);
    theta.beta_n = theta.beta_n.clamp(cfg.beta_min, cfg.beta_max);
    theta.beta_l = theta.beta_l.clamp(cfg.beta_min, cfg.beta_max);
    theta.beta_0 = theta.beta_0.clamp(0.0, 1.0);
    for c in &mut theta.c {
        *c = c.clamp(cfg.c_min, cfg.c_max);
    }
}

/// `θ_{u+1} = Proj[θ_u + δ₀ u^(−decay) ĝ]`.
pub fn sapg_update_hyperparams(theta: &HyperParams, g: &ThetaGradient, steps: &SapgSteps, u: usize, cfg: &SapgConfig) -> HyperParams {
    let k = (u.max(1) as f64).powf(-cfg.decay);
    let mut next = theta.clone();
    next.eps += k * steps.eps * g.eps;
    next.beta_n += k * steps.beta_n * g.beta_n;
    next.beta_l += k * steps.beta_l * g.beta_l;
    next.beta_0 += k * steps.beta_0 * g.beta_0;
    for ((c, s), gc) in next.c.iter_mut().zip(&steps.c).zip(&g.c) {
        *c += k * s * gc;
    }
    project(&mut next, cfg);
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta() -> HyperParams {
        HyperParams::new(1.0, 0.05, 0.2, 0.3, 0.3, 0.9, vec![3.0, 5.0]).unwrap()
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let cfg = SapgConfig::default();
        let g = ThetaGradient { c: vec![0.0, 0.0], ..Default::default() };
        let steps = SapgSteps { eps: 1.0, beta_n: 1.0, beta_l: 1.0, beta_0: 1.0, c: vec![1.0, 1.0] };
        assert_eq!(sapg_update_hyperparams(&theta(), &g, &steps, 7, &cfg), theta());
    }

    #[test]
    fn shape_is_projected_to_lower_bound() {
        let cfg = SapgConfig::default();
        let g = ThetaGradient { c: vec![-100.0, 0.0], ..Default::default() };
        let steps = SapgSteps { eps: 1.0, beta_n: 1.0, beta_l: 1.0, beta_0: 1.0, c: vec![1.0, 1.0] };
        let next = sapg_update_hyperparams(&theta(), &g, &steps, 1, &cfg);
        assert_eq!(next.c[0], 1.0 + 1e-3);
        assert_eq!(next.c[1], 5.0);
    }

    #[test]
    fn automatic_steps_move_five_percent_first() {
        let cfg = SapgConfig::default();
        let g = ThetaGradient { eps: 4.0, beta_n: -2.0, beta_l: 1.0, beta_0: 0.5, c: vec![10.0, -3.0] };
        let mut steps = SapgSteps::unresolved(2);
        steps.resolve(&cfg, &theta(), &g);
        let next = sapg_update_hyperparams(&theta(), &g, &steps, 1, &cfg);
        assert!((next.eps / 0.2 - 1.05).abs() < 1e-12);
        assert!((next.beta_n / 0.3 - 0.95).abs() < 1e-12);
        assert!((next.c[1] / 5.0 - 0.95).abs() < 1e-12);
    }
}
