//! Per-segment bin modification, range-scoped equalization, normalization and fusing.

use crate::error::{Error, Result};
use crate::image::{GrayImage, Histogram, LEVELS};

use super::segmentation::Partition;

/// `floor(v + 0.5)`, the single rounding rule used for every quantization step.
#[inline]
pub fn round_half_up(v: f64) -> f64 {
    (v + 0.5).floor()
}

#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    round_half_up(v).clamp(0.0, 255.0) as u8
}

/// Hyperbolic-tangent bin modification that damps dominant bins.
pub fn modify_pdf(pdf_value: f64) -> f64 {
    pdf_value.tanh()
}

/// One of the four histogram segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SubHistogram {
    pub lowb: usize,
    pub upb: usize,
    /// Pixels falling into the segment.
    pub count: u64,
    /// Indexed by `level - lowb`.
    pub pdf: Vec<f64>,
    pub modified_pdf: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl SubHistogram {
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn levels(&self) -> std::ops::Range<usize> {
        self.lowb..(self.upb + 1).max(self.lowb)
    }

    fn build(hist: &Histogram, lowb: usize, upb: usize) -> Self {
        let (count, _) = hist.range_sums(lowb, upb);
        let levels = if lowb <= upb { upb - lowb + 1 } else { 0 };
        let mut pdf = vec![0.0; levels];
        if count > 0 {
            for (offset, p) in pdf.iter_mut().enumerate() {
                *p = hist.count(lowb + offset) as f64 / count as f64;
            }
        }
        let modified_pdf: Vec<f64> = pdf.iter().map(|&p| modify_pdf(p)).collect();
        let cdf = modified_pdf
            .iter()
            .scan(0.0, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect();
        Self {
            lowb,
            upb,
            count,
            pdf,
            modified_pdf,
            cdf,
        }
    }
}

pub fn build_sub_histograms(hist: &Histogram, partition: &Partition) -> [SubHistogram; 4] {
    partition
        .segments()
        .map(|(lowb, upb)| SubHistogram::build(hist, lowb, upb))
}

/// Output level for every input level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferMap {
    pub mapping: [u8; LEVELS],
}

impl TransferMap {
    pub fn identity() -> Self {
        let mut mapping = [0u8; LEVELS];
        for (i, m) in mapping.iter_mut().enumerate() {
            *m = i as u8;
        }
        Self { mapping }
    }

    pub fn apply(&self, img: &GrayImage) -> GrayImage {
        img.map_levels(&self.mapping)
    }

    pub fn is_monotone(&self) -> bool {
        self.mapping.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Equalizes each segment within its own `[lowb, upb]`, with the segment CDF normalized by its
/// final value. Empty segments keep their levels.
pub fn build_transfer_map(subs: &[SubHistogram]) -> TransferMap {
    let mut map = TransferMap::identity();
    for sub in subs.iter().filter(|s| !s.is_empty()) {
        let total = *sub.cdf.last().expect("non-empty segment has levels");
        let span = (sub.upb - sub.lowb) as f64;
        for (offset, &c) in sub.cdf.iter().enumerate() {
            map.mapping[sub.lowb + offset] = quantize(sub.lowb as f64 + span * c / total);
        }
    }
    map
}

/// Linear stretch of `[min, max]` onto `[0, 255]`; constant images are returned unchanged.
pub fn normalize_image(img: &GrayImage) -> GrayImage {
    let (lo, hi) = img.min_max();
    if lo == hi {
        return img.clone();
    }
    let (lo, range) = (f64::from(lo), f64::from(hi - lo));
    let mut lut = [0u8; LEVELS];
    for (v, out) in lut.iter_mut().enumerate() {
        *out = quantize((v as f64 - lo) / range * 255.0);
    }
    img.map_levels(&lut)
}

/// `delta * normalized + (1 - delta) * original`, per pixel.
pub fn fuse(normalized: &GrayImage, original: &GrayImage, delta: f64) -> Result<GrayImage> {
    if !normalized.same_dimensions(original) {
        return Err(Error::Parameter(format!(
            "cannot fuse {}x{} with {}x{}",
            normalized.width(),
            normalized.height(),
            original.width(),
            original.height()
        )));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Parameter(format!("fusing rate {delta} is outside [0, 1]")));
    }
    let data = normalized
        .pixels()
        .iter()
        .zip(original.pixels())
        .map(|(&n, &o)| quantize(delta * f64::from(n) + (1.0 - delta) * f64::from(o)))
        .collect();
    GrayImage::new(original.width(), original.height(), data)
}
