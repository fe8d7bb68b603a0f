//! Mean-and-variance sub-image histogram equalization (MVSIHE) and classic baselines.
//!
//! The pipeline runs in five stages: a nested variance-maximizing split of the histogram into
//! four segments, tanh bin modification, per-segment equalization, a min/max stretch, and a
//! fusing step that blends the result back with the input by a weight `delta`.

mod baselines;
mod equalization;
mod segmentation;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{compute_histogram, GrayImage};

pub use baselines::{bbhe, classic_he, dsihe, median_level};
pub use equalization::{
    build_sub_histograms, build_transfer_map, fuse, modify_pdf, normalize_image, round_half_up, SubHistogram,
    TransferMap,
};
pub use segmentation::{between_class_variance, mvsihe_partition, variance_split, Partition};

/// Where the segmentation thresholds come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionChoice {
    /// Nested variance maximization on the image's own histogram.
    Auto,
    Fixed(Partition),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnhancementParams {
    pub delta: f64,
    pub partition: PartitionChoice,
}

impl EnhancementParams {
    pub fn auto(delta: f64) -> Self {
        Self {
            delta,
            partition: PartitionChoice::Auto,
        }
    }

    pub fn fixed(delta: f64, partition: Partition) -> Self {
        Self {
            delta,
            partition: PartitionChoice::Fixed(partition),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.delta) {
            Ok(())
        } else {
            Err(Error::Parameter(format!("delta {} is outside [0, 1]", self.delta)))
        }
    }
}

/// Every intermediate product of one MVSIHE pass.
#[derive(Debug, Clone)]
pub struct MvsiheStages {
    pub partition: Partition,
    pub sub_histograms: [SubHistogram; 4],
    pub transfer_map: TransferMap,
    pub equalized: GrayImage,
    pub normalized: GrayImage,
    pub output: GrayImage,
}

pub fn mvsihe_stages(img: &GrayImage, params: &EnhancementParams) -> Result<MvsiheStages> {
    params.validate()?;
    let hist = compute_histogram(img);
    let partition = match params.partition {
        PartitionChoice::Auto => mvsihe_partition(&hist)?,
        PartitionChoice::Fixed(p) => p,
    };
    let sub_histograms = build_sub_histograms(&hist, &partition);
    let transfer_map = build_transfer_map(&sub_histograms);
    let equalized = transfer_map.apply(img);
    let normalized = normalize_image(&equalized);
    let output = fuse(&normalized, img, params.delta)?;
    Ok(MvsiheStages {
        partition,
        sub_histograms,
        transfer_map,
        equalized,
        normalized,
        output,
    })
}

pub fn mvsihe_enhance(img: &GrayImage, params: &EnhancementParams) -> Result<GrayImage> {
    mvsihe_stages(img, params).map(|s| s.output)
}
