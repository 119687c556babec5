//! Gray-tone difference matrix and the coarseness, complexity and strength
//! texture measures derived from it.
//!
//! For every interior pixel (one whose full `(2K+1)×(2K+1)` window lies inside
//! the image) the neighborhood mean excludes the center pixel and divides by
//! `W - 1`, where `W = (2K+1)²`. `s(i)` accumulates `|i - mean|` over interior
//! pixels of level `i`; `p(i)` is the fraction of interior pixels at level `i`.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Default regularizer for coarseness and strength.
pub const DEFAULT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GtdmTable {
    s: Vec<f64>,
    p: Vec<f64>,
    n: usize,
    k: usize,
}

impl GtdmTable {
    /// Assembles a table from explicit columns, checking the table invariants.
    pub fn from_parts(s: Vec<f64>, p: Vec<f64>, n: usize, k: usize) -> Result<Self> {
        if s.len() != p.len() || s.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "s and p must have the same non-zero length, got {} and {}",
                s.len(),
                p.len()
            )));
        }
        if s.iter().chain(&p).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidConfig(
                "s and p entries must be finite and non-negative".into(),
            ));
        }
        if s.iter().zip(&p).any(|(&si, &pi)| pi == 0.0 && si != 0.0) {
            return Err(Error::InvalidConfig("s(i) must be 0 where p(i) = 0".into()));
        }
        let total: f64 = p.iter().sum();
        if n > 0 && (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "p must sum to 1, sums to {total}"
            )));
        }
        Ok(Self { s, p, n, k })
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// Number of interior pixels that contributed.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Window half-size.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn levels(&self) -> usize {
        self.s.len()
    }

    fn occupied(&self) -> impl Iterator<Item = (usize, f64, f64)> + Clone + '_ {
        self.p
            .iter()
            .zip(&self.s)
            .enumerate()
            .filter(|(_, (&p, _))| p != 0.0)
            .map(|(i, (&p, &s))| (i, p, s))
    }
}

/// Computes the gray-tone difference matrix with window half-size `k`.
pub fn compute_gtdm(img: &GrayImage, k: usize) -> Result<GtdmTable> {
    let (w, h) = (img.width(), img.height());
    if w <= 2 * k || h <= 2 * k {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            needed: format!("GTDM with K={k} needs both sides > {}", 2 * k),
        });
    }
    let levels = img.levels() as usize;
    let side = 2 * k + 1;
    let neighbors = (side * side - 1) as u64;

    // summed-area table with a zero border: sat[(y+1)*(w+1) + x+1] = sum over [0..=x]x[0..=y]
    let stride = w + 1;
    let mut sat = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let mut row_sum = 0u64;
        for x in 0..w {
            row_sum += u64::from(img.get(x, y));
            sat[(y + 1) * stride + x + 1] = sat[y * stride + x + 1] + row_sum;
        }
    }

    // s(i) = sum |i*(W-1) - neighbor_sum| / (W-1); numerators stay integral
    let mut numer = vec![0u128; levels];
    let mut counts = vec![0u64; levels];
    for y in k..h - k {
        for x in k..w - k {
            let (x0, y0, x1, y1) = (x - k, y - k, x + k + 1, y + k + 1);
            let window = sat[y1 * stride + x1] + sat[y0 * stride + x0]
                - sat[y0 * stride + x1]
                - sat[y1 * stride + x0];
            let level = img.get(x, y);
            let neigh = window - u64::from(level);
            let scaled = u64::from(level) * neighbors;
            let i = level as usize;
            numer[i] += u128::from(scaled.abs_diff(neigh));
            counts[i] += 1;
        }
    }

    let n = (w - 2 * k) * (h - 2 * k);
    let s = numer
        .iter()
        .map(|&num| num as f64 / neighbors as f64)
        .collect();
    let p = counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(GtdmTable { s, p, n, k })
}

/// `(eps + Σ p_i s(i))^-1`.
pub fn coarseness(t: &GtdmTable, eps: f64) -> f64 {
    let weighted: f64 = t.p.iter().zip(&t.s).map(|(p, s)| p * s).sum();
    (eps + weighted).recip()
}

/// Sum over ordered level pairs with non-zero probability of
/// `|i-j| / (n (p_i + p_j)) * (p_i s(i) + p_j s(j))`.
pub fn complexity(t: &GtdmTable) -> f64 {
    let n = t.n as f64;
    let mut total = 0.0;
    for (i, pi, si) in t.occupied() {
        for (j, pj, sj) in t.occupied() {
            if i == j {
                continue;
            }
            total += i.abs_diff(j) as f64 / (n * (pi + pj)) * (pi * si + pj * sj);
        }
    }
    total
}

/// `Σ (p_i + p_j)(i - j)² / (eps + Σ s(i))`, pairs restricted to non-zero probabilities.
pub fn strength(t: &GtdmTable, eps: f64) -> f64 {
    let mut numer = 0.0;
    for (i, pi, _) in t.occupied() {
        for (j, pj, _) in t.occupied() {
            let d = i.abs_diff(j) as f64;
            numer += (pi + pj) * d * d;
        }
    }
    numer / (eps + t.s.iter().sum::<f64>())
}
