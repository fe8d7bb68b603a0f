//! Histogram thresholds by between-class variance maximization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Histogram, LEVELS};

/// Relative slack under which two variances count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// Three ordered thresholds splitting `[0, 255]` into four segments:
/// `[0, k_h1]`, `[k_h1 + 1, k_h2]`, `[k_h2 + 1, k_h3]`, `[k_h3 + 1, 255]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    k_h1: u8,
    k_h2: u8,
    k_h3: u8,
}

impl Partition {
    pub fn new(k_h1: u8, k_h2: u8, k_h3: u8) -> Result<Self> {
        if k_h1 < k_h2 && k_h2 < k_h3 {
            Ok(Self { k_h1, k_h2, k_h3 })
        } else {
            Err(Error::Partition(format!(
                "thresholds must satisfy k_h1 < k_h2 < k_h3, got ({k_h1}, {k_h2}, {k_h3})"
            )))
        }
    }

    /// Rounds real-valued thresholds half-up and validates them.
    pub fn from_reals(k_h1: f64, k_h2: f64, k_h3: f64) -> Result<Self> {
        let level = |v: f64| -> Result<u8> {
            let r = (v + 0.5).floor();
            if (0.0..=255.0).contains(&r) {
                Ok(r as u8)
            } else {
                Err(Error::Partition(format!("threshold {v} is outside [0, 255]")))
            }
        };
        Self::new(level(k_h1)?, level(k_h2)?, level(k_h3)?)
    }

    pub fn k_h1(&self) -> u8 {
        self.k_h1
    }

    pub fn k_h2(&self) -> u8 {
        self.k_h2
    }

    pub fn k_h3(&self) -> u8 {
        self.k_h3
    }

    /// Inclusive `(low, high)` bounds of the four segments. The last segment is empty
    /// (`low == 256`) when `k_h3 == 255`.
    pub fn segments(&self) -> [(usize, usize); 4] {
        let (a, b, c) = (self.k_h1 as usize, self.k_h2 as usize, self.k_h3 as usize);
        [(0, a), (a + 1, b), (b + 1, c), (c + 1, LEVELS - 1)]
    }
}

/// Between-class variance of splitting `[lo, hi]` after level `k`, using the PDF restricted to
/// that range. Classes without pixels contribute nothing.
pub fn between_class_variance(hist: &Histogram, lo: usize, hi: usize, k: usize) -> f64 {
    let (n, s) = hist.range_sums(lo, hi);
    let (n0, s0) = hist.range_sums(lo, k);
    class_variance(n, s, n0, s0)
}

fn class_variance(n: u64, s: u64, n0: u64, s0: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (n1, s1) = (n - n0, s - s0);
    let total = n as f64;
    let mean = s as f64 / total;
    let term = |count: u64, sum: u64| {
        if count == 0 {
            0.0
        } else {
            let w = count as f64 / total;
            let mu = sum as f64 / count as f64;
            w * (mu - mean) * (mu - mean)
        }
    };
    term(n0, s0) + term(n1, s1)
}

/// Threshold `k` in `[lo, hi - 1]` maximizing the between-class variance over `[lo, hi]`;
/// the smallest maximizer wins ties.
pub fn variance_split(hist: &Histogram, lo: usize, hi: usize) -> Result<u8> {
    if lo >= hi || hi >= LEVELS {
        return Err(Error::Segmentation(format!("cannot split the range [{lo}, {hi}]")));
    }
    let (n, s) = hist.range_sums(lo, hi);
    if n == 0 {
        return Err(Error::Segmentation(format!("no pixels in [{lo}, {hi}]")));
    }
    let counts = hist.counts();
    let (mut n0, mut s0) = (0u64, 0u64);
    let mut best_k = lo;
    let mut best = 0.0;
    for (k, &c) in counts.iter().enumerate().take(hi).skip(lo) {
        n0 += c;
        s0 += k as u64 * c;
        let sigma = class_variance(n, s, n0, s0);
        if sigma > best * (1.0 + TIE_TOLERANCE) {
            best = sigma;
            best_k = k;
        }
    }
    Ok(best_k as u8)
}

/// Nested three-threshold split: the global split first, then one split on each side.
pub fn mvsihe_partition(hist: &Histogram) -> Result<Partition> {
    let occupied = hist.occupied_bins();
    if occupied < 4 {
        return Err(Error::Partition(format!(
            "{occupied} occupied intensity levels, at least 4 are needed"
        )));
    }
    let k_h2 = variance_split(hist, 0, LEVELS - 1)? as usize;
    if k_h2 == 0 || k_h2 + 2 >= LEVELS {
        return Err(Error::Partition(format!(
            "global threshold {k_h2} leaves no room for a split on both sides"
        )));
    }
    let k_h1 = variance_split(hist, 0, k_h2)?;
    let k_h3 = variance_split(hist, k_h2 + 1, LEVELS - 1)?;
    Partition::new(k_h1, k_h2 as u8, k_h3)
}
