//! First-order statistics of the intensity histogram.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Normalized level histogram with its population mean and variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    p: Vec<f64>,
    mean: f64,
    variance: f64,
}

impl Histogram {
    /// Builds a histogram from a probability vector indexed by level.
    pub fn from_probabilities(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig(
                "histogram probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "histogram probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self::build(p))
    }

    fn build(p: Vec<f64>) -> Self {
        let mean = p.iter().enumerate().map(|(i, &pi)| i as f64 * pi).sum();
        let variance = central_moment(&p, mean, 2);
        Self { p, mean, variance }
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

fn central_moment(p: &[f64], mean: f64, order: i32) -> f64 {
    p.iter()
        .enumerate()
        .map(|(i, &pi)| (i as f64 - mean).powi(order) * pi)
        .sum()
}

pub fn histogram(img: &GrayImage) -> Histogram {
    let mut counts = vec![0u64; img.levels() as usize];
    for &px in img.pixels() {
        counts[px as usize] += 1;
    }
    let total = img.pixels().len() as f64;
    Histogram::build(counts.iter().map(|&c| c as f64 / total).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramFeatures {
    pub mean: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub energy: f64,
    pub entropy: f64,
}

/// Mean, skewness, excess kurtosis, energy and entropy (bits).
///
/// A single-level histogram has zero spread; its skewness is reported as 0
/// and its kurtosis as -3 so the features stay finite.
pub fn hist_features(h: &Histogram) -> HistogramFeatures {
    let sigma = h.variance.sqrt();
    let (skewness, kurtosis) = if sigma > 0.0 {
        (
            central_moment(&h.p, h.mean, 3) / sigma.powi(3),
            central_moment(&h.p, h.mean, 4) / sigma.powi(4) - 3.0,
        )
    } else {
        (0.0, -3.0)
    };
    let energy = h.p.iter().map(|p| p * p).sum();
    let entropy =
        -h.p.iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>();
    HistogramFeatures {
        mean: h.mean,
        skewness,
        kurtosis,
        energy,
        // -0.0 for a single mass point
        entropy: entropy + 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_image() {
        let img = GrayImage::from_fn(4, 3, 8, |_, _| 5).unwrap();
        let h = histogram(&img);
        assert_eq!(h.p()[5], 1.0);
        assert_eq!(h.mean(), 5.0);
        assert_eq!(h.variance(), 0.0);
        let f = hist_features(&h);
        assert_eq!(f.energy, 1.0);
        assert_eq!(f.entropy, 0.0);
        assert!(f.entropy.is_sign_positive());
        assert_eq!(f.skewness, 0.0);
        assert_eq!(f.kurtosis, -3.0);
    }

    #[test]
    fn two_point_symmetric() {
        let img = GrayImage::from_fn(4, 2, 4, |_, y| y as u16).unwrap();
        let h = histogram(&img);
        assert_eq!(&h.p()[..2], &[0.5, 0.5]);
        assert_eq!(h.mean(), 0.5);
        assert_eq!(h.variance(), 0.25);
        let f = hist_features(&h);
        assert_eq!(f.skewness, 0.0);
        assert!((f.kurtosis + 2.0).abs() < 1e-12);
        assert_eq!(f.energy, 0.5);
        assert_eq!(f.entropy, 1.0);
    }

    #[test]
    fn sixteen_distinct_levels() {
        let img = GrayImage::from_fn(4, 4, 16, |x, y| (y * 4 + x) as u16).unwrap();
        let h = histogram(&img);
        assert!(h.p().iter().all(|&p| p == 1.0 / 16.0));
        assert_eq!(h.mean(), 7.5);
        let f = hist_features(&h);
        assert!((f.entropy - 4.0).abs() < 1e-12);
        assert!((f.energy - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_gaussian_has_near_zero_excess_kurtosis() {
        let (mu, sd) = (127.5, 20.0);
        let w: Vec<f64> = (0..256)
            .map(|i| (-0.5 * ((i as f64 - mu) / sd).powi(2)).exp())
            .collect();
        let total: f64 = w.iter().sum();
        let h = Histogram::from_probabilities(w.iter().map(|v| v / total).collect()).unwrap();
        let f = hist_features(&h);
        assert!(f.kurtosis.abs() < 0.1, "kurtosis {}", f.kurtosis);
        assert!(f.skewness.abs() < 1e-9);
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(Histogram::from_probabilities(vec![0.5, 0.6]).is_err());
        assert!(Histogram::from_probabilities(vec![]).is_err());
        assert!(Histogram::from_probabilities(vec![-0.5, 1.5]).is_err());
    }

    fn arb_probs() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0u32..50, 2..24).prop_filter_map("all zero", |counts| {
            let total: u32 = counts.iter().sum();
            (total > 0).then(|| {
                counts
                    .iter()
                    .map(|&c| f64::from(c) / f64::from(total))
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn symmetric_histograms_have_zero_skewness(half in proptest::collection::vec(1u32..20, 1..10)) {
            let mut counts = half.clone();
            counts.extend(half.iter().rev());
            let total: u32 = counts.iter().sum();
            let h = Histogram::from_probabilities(
                counts.iter().map(|&c| f64::from(c) / f64::from(total)).collect()
            ).unwrap();
            prop_assert!(hist_features(&h).skewness.abs() < 1e-12);
        }

        #[test]
        fn energy_and_entropy_bounds(p in arb_probs()) {
            let g = p.len() as f64;
            let single = p.iter().filter(|&&v| v > 0.0).count() == 1;
            let f = hist_features(&Histogram::from_probabilities(p).unwrap());
            prop_assert!(f.energy > 0.0 && f.energy <= 1.0 + 1e-12);
            prop_assert!(f.entropy >= 0.0 && f.entropy <= g.log2() + 1e-12);
            prop_assert_eq!(single, f.entropy == 0.0);
            prop_assert_eq!(single, (f.energy - 1.0).abs() < 1e-15);
        }

        #[test]
        fn reflection_negates_skewness(p in arb_probs()) {
            let reflected: Vec<f64> = p.iter().rev().copied().collect();
            let a = hist_features(&Histogram::from_probabilities(p).unwrap());
            let b = hist_features(&Histogram::from_probabilities(reflected).unwrap());
            prop_assert!((a.skewness + b.skewness).abs() < 1e-9);
            prop_assert!((a.kurtosis - b.kurtosis).abs() < 1e-9);
            prop_assert!((a.energy - b.energy).abs() < 1e-12);
            prop_assert!((a.entropy - b.entropy).abs() < 1e-12);
        }

        #[test]
        fn uniform_maximizes_entropy(p in arb_probs()) {
            let g = p.len();
            let uniform = hist_features(&Histogram::from_probabilities(vec![1.0 / g as f64; g]).unwrap());
            let f = hist_features(&Histogram::from_probabilities(p).unwrap());
            prop_assert!(f.entropy <= uniform.entropy + 1e-12);
        }
    }
}
