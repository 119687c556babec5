use std::path::Path;

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};
use texcollect_core::curation::DEFAULT_MAX_ITER;
use texcollect_core::lbp::LbpConfig;
use texcollect_core::{CropSpec, FeatureConfig, Metric};

/// Every tunable of a run. Values come from the defaults, then an optional
/// JSON config file, then command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub levels: u32,
    pub gtdm_levels: u32,
    pub gtdm_k: usize,
    pub eps: f64,
    pub lbp_points: usize,
    pub lbp_radius: usize,
    pub lbp_uniform_threshold: u32,
    pub window: usize,
    pub stride: usize,
    pub n: Option<usize>,
    pub seed: u64,
    pub max_iter: usize,
    pub k: Vec<usize>,
    pub trials: usize,
    pub train_fraction: f64,
    pub metric: Metric,
}

impl Default for RunConfig {
    fn default() -> Self {
        let lbp = LbpConfig::default();
        Self {
            levels: 256,
            gtdm_levels: 32,
            gtdm_k: 1,
            eps: 1e-6,
            lbp_points: lbp.points,
            lbp_radius: lbp.radius,
            lbp_uniform_threshold: lbp.uniform_threshold,
            window: 128,
            stride: 64,
            n: None,
            seed: 0,
            max_iter: DEFAULT_MAX_ITER,
            k: vec![1, 3, 5],
            trials: 10,
            train_fraction: 0.4,
            metric: Metric::Euclidean,
        }
    }
}

/// Flag values; `None` leaves the lower-precedence value in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub levels: Option<u32>,
    pub gtdm_levels: Option<u32>,
    pub gtdm_k: Option<usize>,
    pub eps: Option<f64>,
    pub lbp_radius: Option<usize>,
    pub window: Option<usize>,
    pub stride: Option<usize>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub max_iter: Option<usize>,
    pub k: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub train_fraction: Option<f64>,
    pub metric: Option<Metric>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Defaults, overlaid by `file` when given, overlaid by `flags`.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let mut cfg = match file {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        cfg.apply(flags);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = o.$field.clone() { self.$field = v; })*
            };
        }
        take!(
            levels,
            gtdm_levels,
            gtdm_k,
            eps,
            lbp_radius,
            window,
            stride,
            seed,
            max_iter,
            k,
            trials,
            train_fraction,
            metric
        );
        if o.n.is_some() {
            self.n = o.n;
        }
    }

    pub fn features(&self) -> Result<FeatureConfig> {
        let cfg = FeatureConfig {
            levels: self.levels,
            gtdm_levels: self.gtdm_levels,
            gtdm_k: self.gtdm_k,
            eps: self.eps,
            lbp: LbpConfig {
                points: self.lbp_points,
                radius: self.lbp_radius,
                uniform_threshold: self.lbp_uniform_threshold,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn crop(&self) -> Result<CropSpec> {
        Ok(CropSpec::new(self.window, self.stride)?)
    }

    pub fn validate_evaluation(&self) -> Result<()> {
        ensure!(
            !self.k.is_empty(),
            "at least one neighbor count is required"
        );
        ensure!(
            self.k.iter().all(|&k| k >= 1),
            "neighbor counts must be >= 1"
        );
        ensure!(self.trials >= 1, "at least one trial is required");
        ensure!(
            self.train_fraction > 0.0 && self.train_fraction < 1.0,
            "train fraction must lie in (0, 1)"
        );
        Ok(())
    }
}
