//! ROF baseline: `min_u ‖∇u‖₁ + (1/2λ)‖u - u°‖₂²`.
//!
//! Runs the Step-2 dual kernel with a zero matching field, so `u = u° - λ∇*p`.

use serde::{Deserialize, Serialize};

use crate::calculus::{adjoint_grad, grad, iso_l1, l2};
use crate::dual::{
    check_lambda, check_loop, fixed_point_loop, resolve_tau, ScalarDual, SolveStats,
};
use crate::error::Result;
use crate::field::{ChannelField, ScalarField, VectorField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RofConfig {
    pub lambda: f64,
    pub tau: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for RofConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            tau: None,
            max_iters: 200,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RofResult {
    pub u: ScalarField,
    pub p: VectorField,
    pub stats: SolveStats,
}

pub fn rof_objective(u: &ScalarField, u0: &ScalarField, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let fit = l2(&u.minus(u0));
    Ok(iso_l1(&grad(u)) + fit * fit / (2.0 * lambda))
}

pub fn rof_denoise(u_noisy: &ScalarField, cfg: &RofConfig) -> Result<RofResult> {
    rof_denoise_observed(u_noisy, cfg, |_, _| {})
}

pub fn rof_denoise_observed(
    u_noisy: &ScalarField,
    cfg: &RofConfig,
    observer: impl FnMut(usize, &VectorField),
) -> Result<RofResult> {
    check_lambda(cfg.lambda)?;
    check_loop(cfg.max_iters, cfg.tol)?;
    let (tau, tau_overridden) = resolve_tau(cfg.tau, u_noisy.shape().ndim())?;
    let op = ScalarDual {
        drift: u_noisy.scaled(-1.0 / cfg.lambda),
        tau,
    };
    let out = fixed_point_loop(
        VectorField::zeros(u_noisy.shape().clone()),
        cfg.max_iters,
        cfg.tol,
        |p, k| op.step(p, k),
        observer,
    )?;
    let u = u_noisy.plus_scaled(-cfg.lambda, &adjoint_grad(&out.p));
    let stats = SolveStats {
        iters: out.iters,
        final_change: out.final_change,
        converged: out.converged,
        kkt_residual: op.kkt_residual(&out.p),
        objective: rof_objective(&u, u_noisy, cfg.lambda)?,
        tau,
        tau_overridden,
    };
    Ok(RofResult { u, p: out.p, stats })
}
