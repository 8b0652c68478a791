//! Orchestration of the two-step TV-Stokes model and the ROF baseline on
//! whole volumes, including intensity normalisation and reporting.

use std::time::Instant;

use crate::dual::default_tau;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::io::Volume;
use crate::metrics::{psnr, staircase_metric};
use crate::reconstruction::{reconstruct, Step2Config, Step2Result};
use crate::report::{ConfigEcho, Metrics, Model, Normalization, RunReport, StepReport, TauEcho};
use crate::rof::{rof_denoise, RofConfig};
use crate::smoothing::{smooth_gradient_field, Step1Config, Step1Result};
use crate::spectral::grad_operator_norm;

/// Settings for one denoising run. `lambda1`/`lambda2` drive the two
/// TV-Stokes steps, `lambda` the ROF baseline; all are in normalised units.
#[derive(Clone, Debug, PartialEq)]
pub struct DenoiseConfig {
    pub model: Model,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda: f64,
    /// `None` selects `1/(2d)`.
    pub tau: Option<f64>,
    pub max_iters: usize,
    pub tol: f64,
    pub eps: f64,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            model: Model::TvStokes,
            lambda1: 0.1,
            lambda2: 0.1,
            lambda: 0.1,
            tau: None,
            max_iters: 200,
            tol: 1e-6,
            eps: 1e-8,
        }
    }
}

impl DenoiseConfig {
    pub fn step1(&self) -> Step1Config {
        Step1Config {
            lambda: self.lambda1,
            tau: self.tau,
            max_iters: self.max_iters,
            tol: self.tol,
        }
    }

    pub fn step2(&self) -> Step2Config {
        Step2Config {
            lambda: self.lambda2,
            tau: self.tau,
            max_iters: self.max_iters,
            tol: self.tol,
            eps: self.eps,
        }
    }

    pub fn rof(&self) -> RofConfig {
        RofConfig {
            lambda: self.lambda,
            tau: self.tau,
            max_iters: self.max_iters,
            tol: self.tol,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TvStokesOutput {
    pub step1: Step1Result,
    pub step2: Step2Result,
}

/// Step 1 on `u_noisy`, then Step 2 guided by the smoothed gradient field.
pub fn tvstokes_denoise(
    u_noisy: &ScalarField,
    step1: &Step1Config,
    step2: &Step2Config,
) -> Result<TvStokesOutput> {
    let step1 = smooth_gradient_field(u_noisy, step1)?;
    let step2 = reconstruct(u_noisy, &step1.g, step2)?;
    Ok(TvStokesOutput { step1, step2 })
}

/// Runs the configured model on an in-memory field.
pub fn denoise(
    u_noisy: &ScalarField,
    cfg: &DenoiseConfig,
) -> Result<(ScalarField, Vec<StepReport>)> {
    match cfg.model {
        Model::TvStokes => {
            let out = tvstokes_denoise(u_noisy, &cfg.step1(), &cfg.step2())?;
            let steps = vec![
                StepReport {
                    name: "smoothing".into(),
                    stats: out.step1.stats,
                },
                StepReport {
                    name: "reconstruction".into(),
                    stats: out.step2.stats,
                },
            ];
            Ok((out.step2.u, steps))
        }
        Model::Rof => {
            let out = rof_denoise(u_noisy, &cfg.rof())?;
            Ok((
                out.u,
                vec![StepReport {
                    name: "rof".into(),
                    stats: out.stats,
                }],
            ))
        }
    }
}

fn echo(cfg: &DenoiseConfig, u: &ScalarField, resolved_tau: f64, overridden: bool) -> ConfigEcho {
    let d = u.shape().ndim();
    let norm = grad_operator_norm(u.shape());
    let tvs = cfg.model == Model::TvStokes;
    ConfigEcho {
        lambda1: tvs.then_some(cfg.lambda1),
        lambda2: tvs.then_some(cfg.lambda2),
        lambda: (!tvs).then_some(cfg.lambda),
        tau: TauEcho {
            requested: cfg
                .tau
                .map_or_else(|| "auto".to_string(), |t| t.to_string()),
            resolved: resolved_tau,
            safe_bound: default_tau(d),
            spectral_bound: 2.0 / (norm * norm),
            overridden,
        },
        max_iters: cfg.max_iters,
        tol: cfg.tol,
        eps: tvs.then_some(cfg.eps),
    }
}

/// Denoises a loaded volume.
///
/// When the header declares a `value_range`, samples are mapped affinely to
/// `[0, 1]` before solving and mapped back afterwards. If `reference` is
/// given, the report carries the PSNR (in raw units, against `peak`) and the
/// staircase measure of the output.
pub fn run_denoise(
    volume: &Volume,
    cfg: &DenoiseConfig,
    reference: Option<&ScalarField>,
    peak: f64,
) -> Result<(ScalarField, RunReport)> {
    if let Some(r) = reference {
        if r.shape() != volume.field.shape() {
            return Err(Error::dim(format!(
                "reference {:?} does not match input {:?}",
                r.shape().dims(),
                volume.field.shape().dims()
            )));
        }
    }
    let start = Instant::now();
    let normalization = volume.header.value_range.map(|[lo, hi]| Normalization {
        offset: lo,
        scale: hi - lo,
    });
    let input = match normalization {
        Some(n) => volume.field.map(|v| (v - n.offset) / n.scale),
        None => volume.field.clone(),
    };
    let (out, steps) = denoise(&input, cfg)?;
    let out = match normalization {
        Some(n) => out.map(|v| v * n.scale + n.offset),
        None => out,
    };
    let metrics = match reference {
        Some(r) => {
            let p = psnr(r, &out, peak)?;
            Some(Metrics {
                psnr_db: p.is_finite().then_some(p),
                staircase: staircase_metric(&out).ok(),
            })
        }
        None => None,
    };
    let first = &steps[0].stats;
    let report = RunReport {
        model: cfg.model,
        input: None,
        dims: volume.field.shape().dims().to_vec(),
        config: echo(cfg, &input, first.tau, first.tau_overridden),
        steps,
        normalization,
        metrics,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Shape;
    use crate::io::{DType, VolumeHeader};

    #[test]
    fn constant_volume_passes_through() {
        let shape = Shape::new(vec![4, 5, 6]).unwrap();
        let field = ScalarField::constant(shape.clone(), 0.42);
        let vol = Volume {
            header: VolumeHeader::new(shape.dims().to_vec(), DType::F64),
            field: field.clone(),
        };
        for model in [Model::TvStokes, Model::Rof] {
            let cfg = DenoiseConfig {
                model,
                ..Default::default()
            };
            let (out, report) = run_denoise(&vol, &cfg, None, 1.0).unwrap();
            assert_eq!(out, field);
            assert!(report.steps.iter().all(|s| s.stats.iters == 1));
            assert_eq!(report.config.tau.requested, "auto");
            assert_eq!(report.config.tau.resolved, 1.0 / 6.0);
        }
    }

    #[test]
    fn normalisation_is_recorded_and_undone() {
        let shape = Shape::new(vec![4, 4]).unwrap();
        let field = ScalarField::constant(shape.clone(), 100.0);
        let mut header = VolumeHeader::new(vec![4, 4], DType::F32);
        header.value_range = Some([0.0, 200.0]);
        let vol = Volume {
            header,
            field: field.clone(),
        };
        let (out, report) =
            run_denoise(&vol, &DenoiseConfig::default(), Some(&field), 255.0).unwrap();
        assert_eq!(out, field);
        assert_eq!(
            report.normalization,
            Some(Normalization {
                offset: 0.0,
                scale: 200.0
            })
        );
        assert_eq!(report.metrics.unwrap().psnr_db, None);
    }

    #[test]
    fn reference_shape_is_checked() {
        let shape = Shape::new(vec![4, 4]).unwrap();
        let vol = Volume {
            header: VolumeHeader::new(vec![4, 4], DType::F64),
            field: ScalarField::zeros(shape),
        };
        let other = ScalarField::zeros(Shape::new(vec![4, 5]).unwrap());
        assert!(run_denoise(&vol, &DenoiseConfig::default(), Some(&other), 1.0).is_err());
    }
}
