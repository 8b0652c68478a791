//! Pieces shared by the three dual (Chambolle-type) solvers: step-size
//! resolution, the fixed-point loop and the scalar-image dual operator.

use serde::{Deserialize, Serialize};

use crate::calculus::{
    adjoint_grad, grad, linf_pointwise, max_abs, pointwise_norm, pointwise_unit_clip,
};
use crate::error::{Error, Result};
use crate::field::{ChannelField, ScalarField, VectorField};

/// The step size that makes every iteration map non-expansive on a
/// `d`-dimensional grid.
pub fn default_tau(d: usize) -> f64 {
    1.0 / (2.0 * d as f64)
}

/// Resolved step and whether it exceeds the guaranteed-safe bound.
pub(crate) fn resolve_tau(tau: Option<f64>, d: usize) -> Result<(f64, bool)> {
    let safe = default_tau(d);
    match tau {
        None => Ok((safe, false)),
        Some(t) if t > 0.0 && t.is_finite() => Ok((t, t > safe * (1.0 + 1e-12))),
        Some(t) => Err(Error::param(format!(
            "tau must be positive and finite, got {t}"
        ))),
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!(
            "lambda must be positive and finite, got {lambda}"
        )))
    }
}

pub(crate) fn check_loop(max_iters: usize, tol: f64) -> Result<()> {
    if max_iters == 0 {
        return Err(Error::param("max_iters must be at least 1"));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::param(format!("tol must be nonnegative, got {tol}")));
    }
    Ok(())
}

/// Convergence summary of one dual solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iters: usize,
    /// `‖p^{k+1} - p^k‖∞` at the last iteration.
    pub final_change: f64,
    pub converged: bool,
    pub kkt_residual: f64,
    pub objective: f64,
    pub tau: f64,
    /// `tau` is above `1/(2d)`, so non-expansiveness is not guaranteed.
    pub tau_overridden: bool,
}

pub(crate) struct LoopOutcome<P> {
    pub p: P,
    pub iters: usize,
    pub final_change: f64,
    pub converged: bool,
}

/// Runs `p ← step(p)` from `p0` until the pointwise change drops to `tol` or
/// `max_iters` is reached. `observer` sees every iterate with its index.
pub(crate) fn fixed_point_loop<P: ChannelField>(
    p0: P,
    max_iters: usize,
    tol: f64,
    mut step: impl FnMut(&P, usize) -> Result<P>,
    mut observer: impl FnMut(usize, &P),
) -> Result<LoopOutcome<P>> {
    let mut p = p0;
    let mut change = f64::INFINITY;
    for k in 1..=max_iters {
        let next = step(&p, k)?;
        change = linf_pointwise(&next.minus(&p));
        p = next;
        observer(k, &p);
        if change <= tol {
            return Ok(LoopOutcome {
                p,
                iters: k,
                final_change: change,
                converged: true,
            });
        }
    }
    Ok(LoopOutcome {
        p,
        iters: max_iters,
        final_change: change,
        converged: false,
    })
}

/// `clip(p - τ w)`, failing if the unclipped step is not finite.
pub(crate) fn clipped_step<P: ChannelField>(p: &P, w: &P, tau: f64, iteration: usize) -> Result<P> {
    let q = p.plus_scaled(-tau, w);
    if !q.is_finite() {
        return Err(Error::Divergence {
            iteration,
            detail: "dual update produced a non-finite value".into(),
        });
    }
    Ok(pointwise_unit_clip(&q))
}

/// `‖w + |w|·p‖_max`, the residual of the KKT conditions of the dual
/// minimum-distance problems.
pub(crate) fn kkt_residual<P: ChannelField>(w: &P, p: &P) -> f64 {
    let norms = pointwise_norm(w);
    let len = norms.len();
    let mut r = w.clone();
    for (c, chunk) in r.as_mut_slice().chunks_exact_mut(len).enumerate() {
        let pc = p.channel(c);
        for ((x, n), pv) in chunk.iter_mut().zip(&norms).zip(pc) {
            *x += n * pv;
        }
    }
    max_abs(&r)
}

/// Dual map for problems of the form `min_{‖p‖∞≤1} ‖λ(∇*p + drift)‖`, i.e.
/// `p ← clip(p - τ ∇(drift + ∇*p))`. Step 2 uses `drift = m - u°/λ`, ROF
/// uses `drift = -u°/λ`.
#[derive(Clone, Debug)]
pub(crate) struct ScalarDual {
    pub drift: ScalarField,
    pub tau: f64,
}

impl ScalarDual {
    pub fn direction(&self, p: &VectorField) -> VectorField {
        grad(&self.drift.plus(&adjoint_grad(p)))
    }

    pub fn step(&self, p: &VectorField, iteration: usize) -> Result<VectorField> {
        clipped_step(p, &self.direction(p), self.tau, iteration)
    }

    pub fn kkt_residual(&self, p: &VectorField) -> f64 {
        kkt_residual(&self.direction(p), p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Shape;

    #[test]
    fn tau_resolution() {
        assert_eq!(resolve_tau(None, 3).unwrap(), (1.0 / 6.0, false));
        assert_eq!(resolve_tau(Some(0.1), 3).unwrap(), (0.1, false));
        assert_eq!(resolve_tau(Some(0.5), 3).unwrap(), (0.5, true));
        assert!(resolve_tau(Some(0.0), 2).is_err());
        assert!(resolve_tau(Some(f64::NAN), 2).is_err());
    }

    #[test]
    fn loop_parameter_checks() {
        assert!(check_loop(0, 1e-6).is_err());
        assert!(check_loop(10, -1.0).is_err());
        assert!(check_loop(10, f64::NAN).is_err());
        assert!(check_lambda(0.0).is_err());
        assert!(check_lambda(-1.0).is_err());
        assert!(check_lambda(0.1).is_ok());
    }

    #[test]
    fn non_finite_step_is_reported_with_iteration() {
        let s = Shape::new(vec![2, 2]).unwrap();
        let p = VectorField::zeros(s.clone());
        let w = VectorField::from_channels(s, vec![vec![f64::MAX; 4], vec![f64::MAX; 4]]).unwrap();
        match clipped_step(&p, &w, 1e10, 7) {
            Err(Error::Divergence { iteration, .. }) => assert_eq!(iteration, 7),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn kkt_residual_vanishes_when_w_opposes_saturated_p() {
        let s = Shape::new(vec![2, 2]).unwrap();
        let p = VectorField::from_channels(s.clone(), vec![vec![0.6; 4], vec![0.8; 4]]).unwrap();
        let w = p.scaled(-2.5);
        assert!(kkt_residual(&w, &p) < 1e-15);
        assert!(kkt_residual(&p.scaled(2.0), &p) > 1.0);
    }
}
