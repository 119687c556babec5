//! Diversity-driven dataset curation.
//!
//! K-means over Soergel distance on normalized descriptors: seeded random
//! initial centers drawn from the pool, nearest-center assignment, arithmetic
//! mean updates, and a final snap of every center to its nearest unused real
//! candidate. The Fisher measure scores how spread out a selection is.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{soergel, FeatureVector, FEATURE_DIM};

pub const DEFAULT_MAX_ITER: usize = 100;

type Center = [f64; FEATURE_DIM];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationResult {
    /// Ids of the selected candidates, one per cluster in cluster order.
    pub selected: Vec<String>,
    /// Pool positions of the selected candidates.
    pub selected_indices: Vec<usize>,
    pub final_centers: Vec<Center>,
    /// Number of center updates performed.
    pub iterations: usize,
    /// False when `max_iter` stopped the loop before assignments settled.
    pub converged: bool,
    pub fisher: f64,
    pub seed: u64,
}

/// Current clustering: one center per cluster and each candidate's cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub centers: Vec<Center>,
    pub assignment: Vec<usize>,
    pub iteration: usize,
}

/// Nearest center under Soergel distance; ties go to the lowest cluster index.
pub fn nearest(point: &[f64], centers: &[Center]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = soergel(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

pub fn assign(pool: &[FeatureVector], centers: &[Center]) -> Vec<usize> {
    pool.par_iter()
        .map(|v| nearest(&v.values, centers).0)
        .collect()
}

/// Per-dimension arithmetic mean of the members.
pub fn cluster_mean<V: AsRef<[f64]>>(members: &[V]) -> Result<Vec<f64>> {
    let first = members.first().ok_or(Error::EmptyPool)?;
    let mut sum = vec![0.0; first.as_ref().len()];
    for m in members {
        for (acc, &x) in sum.iter_mut().zip(m.as_ref()) {
            *acc += x;
        }
    }
    let count = members.len() as f64;
    Ok(sum.into_iter().map(|s| s / count).collect())
}

/// `(1/C²) Σ_i Σ_j soergel(μ_i, μ_j)` over all ordered pairs, `i = j` included.
pub fn fisher<V: AsRef<[f64]>>(selected: &[V]) -> Result<f64> {
    if selected.is_empty() {
        return Err(Error::EmptyPool);
    }
    let c = selected.len() as f64;
    let total: f64 = selected
        .iter()
        .map(|a| {
            selected
                .iter()
                .map(|b| soergel(a.as_ref(), b.as_ref()))
                .sum::<f64>()
        })
        .sum();
    Ok(total / (c * c))
}

impl ClusterState {
    fn new(pool: &[FeatureVector], init: &[usize]) -> Self {
        let centers: Vec<Center> = init.iter().map(|&i| pool[i].values).collect();
        let assignment = assign(pool, &centers);
        Self {
            centers,
            assignment,
            iteration: 0,
        }
    }

    /// Replaces every center by the mean of its members.
    ///
    /// An empty cluster is reseeded with the candidate lying farthest from the
    /// center it is currently assigned to (ties to the lowest pool index), so
    /// the cluster count never drops.
    fn update_centers(&mut self, pool: &[FeatureVector]) {
        let k = self.centers.len();
        let mut sums = vec![[0.0; FEATURE_DIM]; k];
        let mut counts = vec![0usize; k];
        for (v, &c) in pool.iter().zip(&self.assignment) {
            counts[c] += 1;
            for (acc, x) in sums[c].iter_mut().zip(&v.values) {
                *acc += x;
            }
        }
        let mut empty = Vec::new();
        for c in 0..k {
            if counts[c] == 0 {
                empty.push(c);
            } else {
                let n = counts[c] as f64;
                self.centers[c] = sums[c].map(|s| s / n);
            }
        }
        if empty.is_empty() {
            return;
        }
        let mut spread: Vec<(usize, f64)> = pool
            .iter()
            .zip(&self.assignment)
            .enumerate()
            .map(|(i, (v, &c))| (i, soergel(&v.values, &self.centers[c])))
            .collect();
        spread.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (c, (i, _)) in empty.into_iter().zip(spread) {
            self.centers[c] = pool[i].values;
        }
    }
}

/// Selects `n` maximally spread candidates from a normalized pool.
pub fn curate(
    pool: &[FeatureVector],
    n: usize,
    seed: u64,
    max_iter: usize,
) -> Result<CurationResult> {
    if n == 0 || n > pool.len() {
        return Err(Error::InvalidCount {
            requested: n,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = rand::seq::index::sample(&mut rng, pool.len(), n).into_vec();

    let mut state = ClusterState::new(pool, &init);
    let mut converged = false;
    while state.iteration < max_iter {
        state.update_centers(pool);
        state.iteration += 1;
        let next = assign(pool, &state.centers);
        if next == state.assignment {
            converged = true;
            break;
        }
        state.assignment = next;
    }

    let selected_indices = snap_to_candidates(pool, &state.centers);
    let chosen: Vec<&[f64]> = selected_indices
        .iter()
        .map(|&i| pool[i].as_slice())
        .collect();
    Ok(CurationResult {
        selected: selected_indices
            .iter()
            .map(|&i| pool[i].id.clone())
            .collect(),
        fisher: fisher(&chosen)?,
        selected_indices,
        final_centers: state.centers,
        iterations: state.iteration,
        converged,
        seed,
    })
}

/// Each center, in order, takes its nearest not-yet-taken candidate.
fn snap_to_candidates(pool: &[FeatureVector], centers: &[Center]) -> Vec<usize> {
    let mut taken = vec![false; pool.len()];
    centers
        .iter()
        .map(|center| {
            let mut best = (usize::MAX, f64::INFINITY);
            for (i, v) in pool.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                let d = soergel(&v.values, center);
                if d < best.1 || best.0 == usize::MAX {
                    best = (i, d);
                }
            }
            taken[best.0] = true;
            best.0
        })
        .collect()
}
