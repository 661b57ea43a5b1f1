use std::path::{Path, PathBuf};

use physimetrics_core::bodymodel::BodyModel;
use physimetrics_core::kinematics::{IkConfig, Skeleton};
use physimetrics_core::losses::LossConfig;
use physimetrics_core::metrics::MetricConfig;
use physimetrics_core::representation::RepTolerances;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Settings shared by every subcommand, read from `--config`.
///
/// Relative paths resolve against the config file's directory. Absent paths
/// select the built-in 22-joint skeleton and body model.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub skeleton: Option<PathBuf>,
    pub body: Option<PathBuf>,
    pub loss: LossConfig,
    pub metrics: MetricConfig,
    pub ik: IkConfig,
    pub tolerances: RepTolerances,
    /// Replaces the frame rate stored in input files.
    pub fps: Option<f64>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(path, None, e.to_string()))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::parse(path, None, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.skeleton, &mut cfg.body].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        for p in [&self.skeleton, &self.body].into_iter().flatten() {
            if !p.is_file() {
                return Err(CliError::Invariant(format!("config references missing file {}", p.display())));
            }
        }
        let inv = |e: physimetrics_core::Error| CliError::Invariant(format!("config: {e}"));
        self.loss.validate().map_err(inv)?;
        self.metrics.validate().map_err(inv)?;
        if let Some(fps) = self.fps {
            if !(fps > 0.0) || !fps.is_finite() {
                return Err(CliError::Invariant(format!("config: fps must be positive, got {fps}")));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("velocity_residual", t.velocity_residual),
            ("mpjpe_mm", t.mpjpe_mm),
            ("bone_length", t.bone_length),
            ("ik.damping", self.ik.damping),
            ("ik.tolerance", self.ik.tolerance),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Invariant(format!("config: {name} must be positive, got {v}")));
            }
        }
        if self.ik.max_iterations == 0 {
            return Err(CliError::Invariant("config: ik.max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Configuration plus the skeleton and body model it selects.
#[derive(Debug, Clone)]
pub struct Context {
    pub cfg: RunConfig,
    pub skeleton: Skeleton<f64>,
    pub body: BodyModel<f64>,
}

impl Context {
    pub fn new(cfg: RunConfig) -> CliResult<Self> {
        let skeleton = match &cfg.skeleton {
            Some(p) => Skeleton::load(p).map_err(|e| CliError::from_core(p, e))?,
            None => Skeleton::smpl22(),
        };
        let body = match &cfg.body {
            Some(p) => BodyModel::load(p, &skeleton).map_err(|e| CliError::from_core(p, e))?,
            None => BodyModel::default_for(&skeleton).map_err(|e| CliError::Invariant(format!("built-in body model: {e}")))?,
        };
        Ok(Self { cfg, skeleton, body })
    }

    pub fn load(config: Option<&Path>) -> CliResult<Self> {
        let cfg = match config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        Self::new(cfg)
    }
}
