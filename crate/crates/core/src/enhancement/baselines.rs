//! Classic HE and the two-segment BBHE and DSIHE variants.

use crate::image::{compute_histogram, GrayImage, Histogram, LEVELS};

use super::equalization::{quantize, TransferMap};

/// Global equalization onto `[0, 255]`, anchored so the darkest occupied level maps to 0.
/// Images with a single level are returned unchanged.
pub fn classic_he(img: &GrayImage) -> GrayImage {
    let hist = compute_histogram(img);
    if hist.occupied_bins() <= 1 {
        return img.clone();
    }
    let total = hist.total();
    let first = hist.counts().iter().copied().find(|&c| c > 0).unwrap_or(0);
    let mut lut = [0u8; LEVELS];
    let mut cum = 0u64;
    for (v, out) in lut.iter_mut().enumerate() {
        cum += hist.count(v);
        let scaled = cum.saturating_sub(first) as f64 / (total - first) as f64;
        *out = quantize(scaled * 255.0);
    }
    img.map_levels(&lut)
}

/// Brightness-preserving bi-histogram equalization: split at the floored mean.
pub fn bbhe(img: &GrayImage) -> GrayImage {
    let hist = compute_histogram(img);
    let split = hist.mean().floor() as usize;
    two_segment(img, &hist, split)
}

/// Dualistic sub-image equalization: split at the median level.
pub fn dsihe(img: &GrayImage) -> GrayImage {
    let hist = compute_histogram(img);
    two_segment(img, &hist, median_level(&hist))
}

/// Smallest level whose cumulative count reaches half of the pixels.
pub fn median_level(hist: &Histogram) -> usize {
    let mut cum = 0u64;
    for v in 0..LEVELS {
        cum += hist.count(v);
        if 2 * cum >= hist.total() {
            return v;
        }
    }
    LEVELS - 1
}

fn two_segment(img: &GrayImage, hist: &Histogram, split: usize) -> GrayImage {
    let mut map = TransferMap::identity();
    equalize_range(hist, 0, split, &mut map);
    equalize_range(hist, split + 1, LEVELS - 1, &mut map);
    map.apply(img)
}

/// `lo + (hi - lo) * CDF(x)` over `[lo, hi]`; a range without pixels is left alone.
pub(crate) fn equalize_range(hist: &Histogram, lo: usize, hi: usize, map: &mut TransferMap) {
    let (n, _) = hist.range_sums(lo, hi);
    if n == 0 {
        return;
    }
    let span = (hi - lo) as f64;
    let mut cum = 0u64;
    for v in lo..=hi {
        cum += hist.count(v);
        map.mapping[v] = quantize(lo as f64 + span * cum as f64 / n as f64);
    }
}
