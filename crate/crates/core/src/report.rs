//! Machine-readable run reports.

use serde::{Deserialize, Serialize};

use crate::dual::SolveStats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    TvStokes,
    Rof,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::TvStokes => "tvstokes",
            Model::Rof => "rof",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    /// `"smoothing"`, `"reconstruction"` or `"rof"`.
    pub name: String,
    #[serde(flatten)]
    pub stats: SolveStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauEcho {
    /// `"auto"` or the value given on the command line.
    pub requested: String,
    pub resolved: f64,
    /// `1/(2d)`
    pub safe_bound: f64,
    /// `2/‖∇‖₂²`, a sharper estimate of the non-expansive range.
    pub spectral_bound: f64,
    pub overridden: bool,
}

/// Parameters the run used, in normalised intensity units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub lambda: Option<f64>,
    pub tau: TauEcho,
    pub max_iters: usize,
    pub tol: f64,
    pub eps: Option<f64>,
}

/// `normalised = (raw - offset) / scale`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub offset: f64,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `None` encodes an infinite PSNR (identical fields).
    pub psnr_db: Option<f64>,
    /// `None` when an axis is shorter than 3.
    pub staircase: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: Model,
    pub input: Option<String>,
    pub dims: Vec<usize>,
    pub config: ConfigEcho,
    pub steps: Vec<StepReport>,
    pub normalization: Option<Normalization>,
    pub metrics: Option<Metrics>,
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
