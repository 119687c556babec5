//! The 18-dimensional texture descriptor, per-dimension min-max normalization
//! and the distances used to compare descriptors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gtdm::{self, DEFAULT_EPS};
use crate::histogram::{hist_features, histogram};
use crate::image::GrayImage;
use crate::lbp::{lbp_histogram, LbpConfig};

pub const FEATURE_DIM: usize = 18;

/// Column names in vector order.
pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "coarseness",
    "complexity",
    "strength",
    "mean",
    "skewness",
    "kurtosis",
    "energy",
    "entropy",
    "lbp0",
    "lbp1",
    "lbp2",
    "lbp3",
    "lbp4",
    "lbp5",
    "lbp6",
    "lbp7",
    "lbp8",
    "lbp9",
];

/// Extraction parameters, persisted next to every feature table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Intensity levels images are quantized to on load (histogram and LBP path).
    pub levels: u32,
    /// Levels the GTDM path re-bins to; bounds the table size.
    pub gtdm_levels: u32,
    pub gtdm_k: usize,
    pub eps: f64,
    pub lbp: LbpConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            levels: 256,
            gtdm_levels: 32,
            gtdm_k: 1,
            eps: DEFAULT_EPS,
            lbp: LbpConfig::default(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 || self.gtdm_levels < 2 {
            return Err(Error::InvalidLevels(self.levels.min(self.gtdm_levels)));
        }
        if self.gtdm_k < 1 {
            return Err(Error::InvalidConfig("GTDM half-size K must be >= 1".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "eps must be a small positive number, got {}",
                self.eps
            )));
        }
        self.lbp.validate()?;
        if self.lbp.label_count() != FEATURE_DIM - 8 {
            return Err(Error::InvalidConfig(format!(
                "the descriptor holds 10 LBP labels, P = {} gives {}",
                self.lbp.points,
                self.lbp.label_count()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub id: String,
    pub values: [f64; FEATURE_DIM],
}

impl FeatureVector {
    pub fn new(id: impl Into<String>, values: [f64; FEATURE_DIM]) -> Self {
        Self {
            id: id.into(),
            values,
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// The LBP label-probability block.
    pub fn lbp_block(&self) -> &[f64] {
        &self.values[8..]
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Computes the descriptor of one image.
///
/// The histogram and LBP blocks use `img` at its own level count; the GTDM
/// block re-bins to `cfg.gtdm_levels` first when that is coarser.
pub fn extract_features(
    img: &GrayImage,
    id: impl Into<String>,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    cfg.validate()?;
    let lbp = lbp_histogram(img, &cfg.lbp)?;
    let gtdm_img = if cfg.gtdm_levels < img.levels() {
        img.requantize(cfg.gtdm_levels)?
    } else {
        img.clone()
    };
    let table = gtdm::compute_gtdm(&gtdm_img, cfg.gtdm_k)?;
    let hist = hist_features(&histogram(img));

    let mut values = [0.0; FEATURE_DIM];
    values[0] = gtdm::coarseness(&table, cfg.eps);
    values[1] = gtdm::complexity(&table);
    values[2] = gtdm::strength(&table, cfg.eps);
    values[3] = hist.mean;
    values[4] = hist.skewness;
    values[5] = hist.kurtosis;
    values[6] = hist.energy;
    values[7] = hist.entropy;
    values[8..].copy_from_slice(&lbp.probs);
    Ok(FeatureVector::new(id, values))
}

/// Per-dimension range of a candidate pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBounds {
    pub min: [f64; FEATURE_DIM],
    pub max: [f64; FEATURE_DIM],
}

pub fn fit_bounds(pool: &[FeatureVector]) -> Result<NormalizationBounds> {
    let first = pool.first().ok_or(Error::EmptyPool)?;
    let mut bounds = NormalizationBounds {
        min: first.values,
        max: first.values,
    };
    for v in &pool[1..] {
        for d in 0..FEATURE_DIM {
            bounds.min[d] = bounds.min[d].min(v.values[d]);
            bounds.max[d] = bounds.max[d].max(v.values[d]);
        }
    }
    Ok(bounds)
}

/// Maps each dimension through `(x - min) / (max - min)`.
///
/// Dimensions with `min == max` map to 0. Vectors outside the fitted pool may
/// land outside `[0, 1]`; they are not clamped.
pub fn normalize(v: &FeatureVector, b: &NormalizationBounds) -> FeatureVector {
    let mut values = [0.0; FEATURE_DIM];
    for (d, out) in values.iter_mut().enumerate() {
        let range = b.max[d] - b.min[d];
        if range > 0.0 {
            *out = (v.values[d] - b.min[d]) / range;
        }
    }
    FeatureVector::new(v.id.clone(), values)
}

pub fn normalize_all(pool: &[FeatureVector], b: &NormalizationBounds) -> Vec<FeatureVector> {
    pool.iter().map(|v| normalize(v, b)).collect()
}

/// Soergel distance `Σ|a_k - b_k| / Σ max(a_k, b_k)`; 0 when the denominator is 0.
pub fn soergel(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let (num, den) = a.iter().zip(b).fold((0.0, 0.0), |(num, den), (&x, &y)| {
        (num + (x - y).abs(), den + x.max(y))
    });
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
