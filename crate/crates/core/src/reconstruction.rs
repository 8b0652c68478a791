//! Step 2: image reconstruction from the smoothed gradient field.
//!
//! Minimises the vector-matching energy
//! `‖∇u‖₁ + (1/2λ)‖u - u°‖₂² - ⟨∇u, g/|g|⟩`, equivalently
//! `‖∇u‖₁ + (1/2λ)‖u + λm - u°‖₂²` with the frozen matching field
//! `m = ∇·(g/|g|)`. The dual iteration is
//!
//! ```text
//! p ← clip(p - τ ∇(m + ∇*p - u°/λ))
//! ```
//!
//! and the image is recovered as `u = u° - λ(∇*p + m)`.

use serde::{Deserialize, Serialize};

use crate::calculus::{adjoint_grad, divergence, grad, inner, iso_l1, l2, pointwise_normalize};
use crate::dual::{
    check_lambda, check_loop, fixed_point_loop, resolve_tau, ScalarDual, SolveStats,
};
use crate::error::{Error, Result};
use crate::field::{ChannelField, ScalarField, VectorField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step2Config {
    pub lambda: f64,
    /// `None` selects `1/(2d)`.
    pub tau: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    /// Floor on `|g|` when normalising the smoothed field.
    pub eps: f64,
}

impl Default for Step2Config {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            tau: None,
            max_iters: 200,
            tol: 1e-6,
            eps: 1e-8,
        }
    }
}

impl Step2Config {
    fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        check_loop(self.max_iters, self.tol)?;
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(Error::param(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Step2Result {
    pub u: ScalarField,
    pub p: VectorField,
    pub stats: SolveStats,
}

/// `m = ∇·(g / max(|g|, eps))`
pub fn matching_field(g: &VectorField, eps: f64) -> Result<ScalarField> {
    Ok(divergence(&pointwise_normalize(g, eps)?))
}

fn check_shapes(u: &ScalarField, other: &impl ChannelField, what: &str) -> Result<()> {
    if u.shape() != other.shape() {
        return Err(Error::dim(format!(
            "{what}: {:?} vs {:?}",
            u.shape().dims(),
            other.shape().dims()
        )));
    }
    Ok(())
}

fn dual_operator(u0: &ScalarField, m: &ScalarField, lambda: f64, tau: f64) -> ScalarDual {
    ScalarDual {
        drift: m.plus_scaled(-1.0 / lambda, u0),
        tau,
    }
}

/// A single update `clip(p - τ∇(m + ∇*p - u0/λ))`.
pub fn step2_iterate(
    p: &VectorField,
    u0: &ScalarField,
    m: &ScalarField,
    cfg: &Step2Config,
) -> Result<VectorField> {
    cfg.validate()?;
    check_shapes(u0, p, "u0 and p")?;
    check_shapes(u0, m, "u0 and m")?;
    let (tau, _) = resolve_tau(cfg.tau, u0.shape().ndim())?;
    dual_operator(u0, m, cfg.lambda, tau).step(p, 1)
}

/// `‖∇u‖₁ + (1/2λ)‖u - u0‖₂² - ⟨∇u, g/max(|g|, eps)⟩`
pub fn step2_objective(
    u: &ScalarField,
    u0: &ScalarField,
    g: &VectorField,
    lambda: f64,
    eps: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    check_shapes(u, u0, "u and u0")?;
    check_shapes(u, g, "u and g")?;
    let du = grad(u);
    let fit = l2(&u.minus(u0));
    Ok(iso_l1(&du) + fit * fit / (2.0 * lambda) - inner(&du, &pointwise_normalize(g, eps)?)?)
}

pub fn step2_kkt_residual(
    p: &VectorField,
    u0: &ScalarField,
    m: &ScalarField,
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    check_shapes(u0, p, "u0 and p")?;
    check_shapes(u0, m, "u0 and m")?;
    Ok(dual_operator(u0, m, lambda, 1.0).kkt_residual(p))
}

pub fn reconstruct(
    u_noisy: &ScalarField,
    g: &VectorField,
    cfg: &Step2Config,
) -> Result<Step2Result> {
    reconstruct_observed(u_noisy, g, cfg, |_, _| {})
}

/// As [`reconstruct`], calling `observer(k, &p^k)` after every iteration.
pub fn reconstruct_observed(
    u_noisy: &ScalarField,
    g: &VectorField,
    cfg: &Step2Config,
    observer: impl FnMut(usize, &VectorField),
) -> Result<Step2Result> {
    cfg.validate()?;
    check_shapes(u_noisy, g, "u_noisy and g")?;
    let (tau, tau_overridden) = resolve_tau(cfg.tau, u_noisy.shape().ndim())?;
    let m = matching_field(g, cfg.eps)?;
    let op = dual_operator(u_noisy, &m, cfg.lambda, tau);
    let out = fixed_point_loop(
        VectorField::zeros(u_noisy.shape().clone()),
        cfg.max_iters,
        cfg.tol,
        |p, k| op.step(p, k),
        observer,
    )?;
    let u = u_noisy.plus_scaled(-cfg.lambda, &adjoint_grad(&out.p).plus(&m));
    let stats = SolveStats {
        iters: out.iters,
        final_change: out.final_change,
        converged: out.converged,
        kkt_residual: op.kkt_residual(&out.p),
        objective: step2_objective(&u, u_noisy, g, cfg.lambda, cfg.eps)?,
        tau,
        tau_overridden,
    };
    Ok(Step2Result { u, p: out.p, stats })
}
