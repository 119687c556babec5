//! Stratified train/test splitting and k-nearest-neighbor evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{euclidean, soergel, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Soergel,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => euclidean(a, b),
            Metric::Soergel => soergel(a, b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Soergel => "soergel",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "soergel" => Ok(Metric::Soergel),
            other => Err(Error::InvalidConfig(format!(
                "unknown metric {other:?}, expected euclidean or soergel"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    pub vector: FeatureVector,
    pub label: String,
}

impl LabeledVector {
    pub fn new(vector: FeatureVector, label: impl Into<String>) -> Self {
        Self {
            vector,
            label: label.into(),
        }
    }
}

/// Training share of a class: `ceil(fraction * size)`, kept within `1..size`
/// so every class lands in both partitions.
pub fn train_count(size: usize, fraction: f64) -> usize {
    // the slack keeps products like 0.1 * 30 = 3.0000000000000004 from rounding up
    let raw = (fraction * size as f64 - 1e-9).ceil() as usize;
    raw.clamp(1, size.saturating_sub(1).max(1))
}

/// Stratified split: each class is shuffled with the seeded RNG and its first
/// [`train_count`] members go to training. Classes are visited in label order
/// and members keep their input order before shuffling.
pub fn split(
    data: &[LabeledVector],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledVector>, Vec<LabeledVector>)> {
    let (train, test) = split_indices(data, train_fraction, seed)?;
    Ok((
        train.into_iter().map(|i| data[i].clone()).collect(),
        test.into_iter().map(|i| data[i].clone()).collect(),
    ))
}

fn split_indices(
    data: &[LabeledVector],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut classes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, item) in data.iter().enumerate() {
        classes.entry(item.label.as_str()).or_default().push(i);
    }
    if let Some((label, members)) = classes.iter().find(|(_, m)| m.len() < 2) {
        return Err(Error::ClassTooSmall {
            label: label.to_string(),
            size: members.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for members in classes.values_mut() {
        members.shuffle(&mut rng);
        let cut = train_count(members.len(), train_fraction);
        train.extend_from_slice(&members[..cut]);
        test.extend_from_slice(&members[cut..]);
    }
    Ok((train, test))
}

/// Majority label among the `k` nearest training vectors.
///
/// Equal distances keep training-set order. A tied vote goes to the tied label
/// whose closest member ranks first.
pub fn knn_predict<'a>(
    train: &'a [LabeledVector],
    query: &[f64],
    k: usize,
    metric: Metric,
) -> Result<&'a str> {
    let refs: Vec<&LabeledVector> = train.iter().collect();
    knn_predict_refs(&refs, query, k, metric)
}

fn knn_predict_refs<'a>(
    train: &[&'a LabeledVector],
    query: &[f64],
    k: usize,
    metric: Metric,
) -> Result<&'a str> {
    if train.is_empty() {
        return Err(Error::EmptyPool);
    }
    if k == 0 || k > train.len() {
        return Err(Error::InvalidCount {
            requested: k,
            available: train.len(),
        });
    }
    let mut ranked: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, t)| (metric.distance(query, t.vector.as_slice()), i))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    // (votes, rank of first appearance) per label
    let mut votes: Vec<(&str, usize, usize)> = Vec::new();
    for (rank, &(_, i)) in ranked.iter().take(k).enumerate() {
        let label = train[i].label.as_str();
        match votes.iter_mut().find(|(l, _, _)| *l == label) {
            Some(entry) => entry.1 += 1,
            None => votes.push((label, 1, rank)),
        }
    }
    let (label, _, _) = votes
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
        .expect("k >= 1");
    Ok(label)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub k: usize,
    pub metric: Metric,
    pub trials: usize,
    pub train_fraction: f64,
    /// Fraction of correctly classified test vectors, one entry per trial.
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator) of the trial accuracies.
    pub stddev: f64,
}

fn mean_and_stddev(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Repeated stratified KNN evaluation; trial `t` splits with seed `base_seed + t`.
pub fn evaluate(
    data: &[LabeledVector],
    k: usize,
    trials: usize,
    train_fraction: f64,
    base_seed: u64,
    metric: Metric,
) -> Result<AccuracyReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig(
            "at least one trial is required".into(),
        ));
    }
    let mut accuracies = Vec::with_capacity(trials);
    for t in 0..trials {
        let (train_idx, test_idx) =
            split_indices(data, train_fraction, base_seed.wrapping_add(t as u64))?;
        let train: Vec<&LabeledVector> = train_idx.iter().map(|&i| &data[i]).collect();
        let correct = test_idx
            .par_iter()
            .map(|&i| {
                let q = &data[i];
                knn_predict_refs(&train, q.vector.as_slice(), k, metric)
                    .map(|label| usize::from(label == q.label))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum::<usize>();
        let acc = if test_idx.is_empty() {
            1.0
        } else {
            correct as f64 / test_idx.len() as f64
        };
        accuracies.push(acc);
    }
    let (mean, stddev) = mean_and_stddev(&accuracies);
    Ok(AccuracyReport {
        k,
        metric,
        trials,
        train_fraction,
        accuracies,
        mean,
        stddev,
    })
}

/// Plain-text accuracy table with one row per neighbor count, as percentages.
pub fn render_table(method: &str, reports: &[AccuracyReport]) -> String {
    let header = format!("{method} (mean ± stddev %)");
    let width = header.len().max(16);
    let mut out = String::new();
    let _ = writeln!(out, "{:<6}  {:<width$}", "k", header);
    for r in reports {
        let cell = format!("{:.2} ± {:.2}", 100.0 * r.mean, 100.0 * r.stddev);
        let _ = writeln!(out, "{:<6}  {:<width$}", format!("{}NN", r.k), cell);
    }
    out
}
