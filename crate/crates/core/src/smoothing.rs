//! Step 1: smoothing of the gradient field.
//!
//! Solves `min_{g = ∇u} ‖∇g‖₁ + (1/2λ)‖g - g°‖₂²` with `g° = ∇u°` through its
//! dual minimum-distance problem `min_{‖p‖∞≤1} ‖g° - λΠ∇*p‖₂`, iterating
//!
//! ```text
//! p ← clip(p - τ ∇(Π∇*p - g°/λ))
//! ```
//!
//! from `p = 0` and recovering `g = g° - λΠ∇*p`.

use serde::{Deserialize, Serialize};

use crate::calculus::{adjoint_grad_tensor, grad, grad_vec, iso_l1, l2};
use crate::dual::{
    check_lambda, check_loop, clipped_step, fixed_point_loop, kkt_residual, resolve_tau, SolveStats,
};
use crate::error::{Error, Result};
use crate::field::{ChannelField, ScalarField, TensorField, VectorField};
use crate::spectral::PoissonPlan;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step1Config {
    pub lambda: f64,
    /// `None` selects `1/(2d)`.
    pub tau: Option<f64>,
    pub max_iters: usize,
    /// Stop once `‖p^{k+1} - p^k‖∞ ≤ tol`.
    pub tol: f64,
}

impl Default for Step1Config {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            tau: None,
            max_iters: 200,
            tol: 1e-6,
        }
    }
}

impl Step1Config {
    fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        check_loop(self.max_iters, self.tol)
    }
}

#[derive(Clone, Debug)]
pub struct Step1Result {
    /// Smoothed gradient field.
    pub g: VectorField,
    /// Final dual variable.
    pub p: TensorField,
    pub stats: SolveStats,
}

/// The Step-1 dual map for a fixed `g°` and `λ`.
#[derive(Clone, Debug)]
pub struct SmoothingOperator {
    plan: PoissonPlan,
    g0: VectorField,
    g0_over_lambda: VectorField,
    lambda: f64,
    tau: f64,
}

impl SmoothingOperator {
    pub fn new(g0: &VectorField, lambda: f64, tau: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::param(format!(
                "tau must be positive and finite, got {tau}"
            )));
        }
        Ok(Self {
            plan: PoissonPlan::new(g0.shape())?,
            g0: g0.clone(),
            g0_over_lambda: g0.scaled(1.0 / lambda),
            lambda,
            tau,
        })
    }

    /// `Π∇*p`
    pub fn projected_adjoint(&self, p: &TensorField) -> Result<VectorField> {
        self.plan.project(&adjoint_grad_tensor(p))
    }

    /// `w = ∇(Π∇*p - g°/λ)`, shared by the update and the KKT residual.
    pub fn direction(&self, p: &TensorField) -> Result<TensorField> {
        Ok(grad_vec(
            &self.projected_adjoint(p)?.minus(&self.g0_over_lambda),
        ))
    }

    /// One semi-implicit update; `iteration` labels a divergence error.
    pub fn iterate(&self, p: &TensorField, iteration: usize) -> Result<TensorField> {
        clipped_step(p, &self.direction(p)?, self.tau, iteration)
    }

    pub fn kkt_residual(&self, p: &TensorField) -> Result<f64> {
        Ok(kkt_residual(&self.direction(p)?, p))
    }

    /// `g° - λΠ∇*p`
    pub fn primal(&self, p: &TensorField) -> Result<VectorField> {
        Ok(self
            .g0
            .plus_scaled(-self.lambda, &self.projected_adjoint(p)?))
    }

    /// Value of the dual minimum-distance objective `‖g° - λΠ∇*p‖₂`.
    pub fn distance(&self, p: &TensorField) -> Result<f64> {
        Ok(l2(&self.primal(p)?))
    }
}

/// A single update `clip(p - τ∇(Π∇*p - g0/λ))`.
pub fn step1_iterate(p: &TensorField, g0: &VectorField, cfg: &Step1Config) -> Result<TensorField> {
    cfg.validate()?;
    let (tau, _) = resolve_tau(cfg.tau, g0.shape().ndim())?;
    SmoothingOperator::new(g0, cfg.lambda, tau)?.iterate(p, 1)
}

/// `‖∇g‖₁ + (1/2λ)‖g - g0‖₂²`
pub fn step1_objective(g: &VectorField, g0: &VectorField, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if g.shape() != g0.shape() {
        return Err(Error::dim("g and g0 have different shapes"));
    }
    let fit = l2(&g.minus(g0));
    Ok(iso_l1(&grad_vec(g)) + fit * fit / (2.0 * lambda))
}

pub fn step1_kkt_residual(p: &TensorField, g0: &VectorField, lambda: f64) -> Result<f64> {
    if p.shape() != g0.shape() {
        return Err(Error::dim("p and g0 have different shapes"));
    }
    SmoothingOperator::new(g0, lambda, 1.0)?.kkt_residual(p)
}

pub fn smooth_gradient_field(u_noisy: &ScalarField, cfg: &Step1Config) -> Result<Step1Result> {
    smooth_gradient_field_observed(u_noisy, cfg, |_, _| {})
}

/// As [`smooth_gradient_field`], calling `observer(k, &p^k)` after every
/// iteration.
pub fn smooth_gradient_field_observed(
    u_noisy: &ScalarField,
    cfg: &Step1Config,
    observer: impl FnMut(usize, &TensorField),
) -> Result<Step1Result> {
    cfg.validate()?;
    let (tau, tau_overridden) = resolve_tau(cfg.tau, u_noisy.shape().ndim())?;
    let g0 = grad(u_noisy);
    let op = SmoothingOperator::new(&g0, cfg.lambda, tau)?;
    let out = fixed_point_loop(
        TensorField::zeros(u_noisy.shape().clone()),
        cfg.max_iters,
        cfg.tol,
        |p, k| op.iterate(p, k),
        observer,
    )?;
    let g = op.primal(&out.p)?;
    let stats = SolveStats {
        iters: out.iters,
        final_change: out.final_change,
        converged: out.converged,
        kkt_residual: op.kkt_residual(&out.p)?,
        objective: step1_objective(&g, &g0, cfg.lambda)?,
        tau,
        tau_overridden,
    };
    Ok(Step1Result { g, p: out.p, stats })
}
