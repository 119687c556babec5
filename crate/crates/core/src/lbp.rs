//! Rotation-invariant uniform local binary patterns.
//!
//! Neighbor `n` of `P` sits at angle `2πn/P` counter-clockwise from east on a
//! circle of radius `R`, sampled at the nearest pixel. For `P = 8, R = 1` this
//! is exactly the 3×3 ring in the order E, NE, N, NW, W, SW, S, SE.
//!
//! Bit `n` of a pattern is `1` when `g_n >= g_c`. The uniformity `U` counts
//! 0/1 transitions around the closed ring. Patterns with `U <= U_T` are
//! labelled with their bit count (`0..=P`); all others share label `P + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LbpConfig {
    pub points: usize,
    pub radius: usize,
    pub uniform_threshold: u32,
}

impl Default for LbpConfig {
    /// 3×3 ring with `U_T = P / 4`.
    fn default() -> Self {
        Self {
            points: 8,
            radius: 1,
            uniform_threshold: 2,
        }
    }
}

impl LbpConfig {
    pub const MAX_POINTS: usize = 32;

    pub fn new(points: usize, radius: usize, uniform_threshold: u32) -> Result<Self> {
        let cfg = Self {
            points,
            radius,
            uniform_threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(4..=Self::MAX_POINTS).contains(&self.points) {
            return Err(Error::InvalidConfig(format!(
                "LBP needs 4 <= P <= {}, got {}",
                Self::MAX_POINTS,
                self.points
            )));
        }
        if self.radius < 1 {
            return Err(Error::InvalidConfig("LBP radius must be >= 1".into()));
        }
        if self.uniform_threshold as usize > self.points {
            return Err(Error::InvalidConfig(format!(
                "LBP uniformity threshold {} exceeds P = {}",
                self.uniform_threshold, self.points
            )));
        }
        Ok(())
    }

    /// Labels `0..=P` for uniform patterns plus one for the rest.
    pub fn label_count(&self) -> usize {
        self.points + 2
    }

    /// `(dx, dy)` pixel offsets of the neighbors, `dy` growing downwards.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let r = self.radius as f64;
        (0..self.points)
            .map(|n| {
                let theta = std::f64::consts::TAU * n as f64 / self.points as f64;
                let dx = (r * theta.cos()).round() as isize;
                let dy = -(r * theta.sin()).round() as isize;
                (dx, dy)
            })
            .collect()
    }
}

/// Circular 0/1 transition count of the low `points` bits of `pattern`.
pub fn uniformity(pattern: u32, points: usize) -> u32 {
    let mask = if points == 32 {
        u32::MAX
    } else {
        (1u32 << points) - 1
    };
    let pattern = pattern & mask;
    let rotated = ((pattern >> 1) | (pattern << (points - 1))) & mask;
    (pattern ^ rotated).count_ones()
}

/// Rotation-invariant uniform label of a `cfg.points`-bit pattern.
pub fn riu_label(pattern: u32, cfg: &LbpConfig) -> usize {
    if uniformity(pattern, cfg.points) <= cfg.uniform_threshold {
        pattern.count_ones() as usize
    } else {
        cfg.points + 1
    }
}

/// Threshold pattern of `neighbors` (in ring order) against `center`.
pub fn pattern(center: u16, neighbors: &[u16]) -> u32 {
    neighbors
        .iter()
        .enumerate()
        .fold(0u32, |acc, (n, &g)| acc | (u32::from(g >= center) << n))
}

/// Labels a single neighborhood. `neighbors` must hold `cfg.points` values in ring order.
pub fn lbp_label(center: u16, neighbors: &[u16], cfg: &LbpConfig) -> usize {
    assert_eq!(
        neighbors.len(),
        cfg.points,
        "expected {} neighbor values",
        cfg.points
    );
    riu_label(pattern(center, neighbors), cfg)
}

/// Label probabilities over every pixel whose full neighborhood is in bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LbpHistogram {
    pub probs: Vec<f64>,
}

pub fn lbp_histogram(img: &GrayImage, cfg: &LbpConfig) -> Result<LbpHistogram> {
    cfg.validate()?;
    let offsets = cfg.offsets();
    let margin = offsets
        .iter()
        .map(|&(dx, dy)| dx.unsigned_abs().max(dy.unsigned_abs()))
        .max()
        .unwrap_or(0);
    let (w, h) = (img.width(), img.height());
    if w < 2 * margin + 1 || h < 2 * margin + 1 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            needed: format!(
                "LBP radius {} needs both sides >= {}",
                cfg.radius,
                2 * margin + 1
            ),
        });
    }

    // uniform labels only depend on the pattern; tabulate when it is small enough
    let table: Option<Vec<u8>> = (cfg.points <= 16).then(|| {
        (0..1u32 << cfg.points)
            .map(|p| riu_label(p, cfg) as u8)
            .collect()
    });

    let mut counts = vec![0u64; cfg.label_count()];
    let mut neighbors = vec![0u16; cfg.points];
    for y in margin..h - margin {
        for x in margin..w - margin {
            for (slot, &(dx, dy)) in neighbors.iter_mut().zip(&offsets) {
                *slot = img.get(x.wrapping_add_signed(dx), y.wrapping_add_signed(dy));
            }
            let pat = pattern(img.get(x, y), &neighbors);
            let label = match &table {
                Some(t) => t[pat as usize] as usize,
                None => riu_label(pat, cfg),
            };
            counts[label] += 1;
        }
    }
    let total = ((w - 2 * margin) * (h - 2 * margin)) as f64;
    Ok(LbpHistogram {
        probs: counts.iter().map(|&c| c as f64 / total).collect(),
    })
}
