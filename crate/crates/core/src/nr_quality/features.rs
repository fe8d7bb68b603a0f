//! The 36-value natural-scene-statistics feature vector shared by BRISQUE and NIQE.
//!
//! | slots   | content                                                          |
//! |---------|------------------------------------------------------------------|
//! | 0-1     | scale 1 MSCN GGD: shape, variance                                |
//! | 2-5     | scale 1 horizontal product AGGD: shape, mean, left var, right var |
//! | 6-9     | scale 1 vertical product AGGD                                    |
//! | 10-13   | scale 1 main-diagonal product AGGD                               |
//! | 14-17   | scale 1 anti-diagonal product AGGD                               |
//! | 18-35   | the same 18 values at scale 2 (2x2 block-mean downsample)         |

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::image::GrayImage;

use super::fit::{fit_aggd, fit_ggd};
use super::mscn::{mscn_decompose, pairwise_products, Field, GaussianWindow, MSCN_C};

pub const FEATURE_COUNT: usize = 36;
const PER_SCALE: usize = FEATURE_COUNT / 2;
pub const MIN_BRISQUE_SIZE: usize = 32;

/// Names of the feature slots in extraction order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "s1_ggd_shape",
    "s1_ggd_var",
    "s1_h_shape",
    "s1_h_mean",
    "s1_h_lvar",
    "s1_h_rvar",
    "s1_v_shape",
    "s1_v_mean",
    "s1_v_lvar",
    "s1_v_rvar",
    "s1_d1_shape",
    "s1_d1_mean",
    "s1_d1_lvar",
    "s1_d1_rvar",
    "s1_d2_shape",
    "s1_d2_mean",
    "s1_d2_lvar",
    "s1_d2_rvar",
    "s2_ggd_shape",
    "s2_ggd_var",
    "s2_h_shape",
    "s2_h_mean",
    "s2_h_lvar",
    "s2_h_rvar",
    "s2_v_shape",
    "s2_v_mean",
    "s2_v_lvar",
    "s2_v_rvar",
    "s2_d1_shape",
    "s2_d1_mean",
    "s2_d1_lvar",
    "s2_d1_rvar",
    "s2_d2_shape",
    "s2_d2_mean",
    "s2_d2_lvar",
    "s2_d2_rvar",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; FEATURE_COUNT] = values
            .try_into()
            .map_err(|_| Error::Model(format!("expected {FEATURE_COUNT} features, got {}", values.len())))?;
        Ok(Self(arr))
    }

    pub fn distance(&self, other: &FeatureVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for FeatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// GGD of the coefficients followed by AGGD of each neighbour product.
fn scale_features(coefficients: &Field, out: &mut [f64]) -> Result<()> {
    let ggd = fit_ggd(&coefficients.values)?;
    out[0] = ggd.shape;
    out[1] = ggd.variance;
    for (k, product) in pairwise_products(coefficients).iter().enumerate() {
        let a = fit_aggd(&product.values)?;
        out[2 + 4 * k..6 + 4 * k].copy_from_slice(&[a.shape, a.mean, a.left_variance, a.right_variance]);
    }
    Ok(())
}

/// Features from MSCN fields already computed at both scales.
pub fn nss_features(scale1: &Field, scale2: &Field) -> Result<FeatureVector> {
    for f in [scale1, scale2] {
        if f.width < 2 || f.height < 2 {
            return Err(Error::Metric(format!(
                "{}x{} coefficient field is too small for neighbour products",
                f.width, f.height
            )));
        }
    }
    let mut v = [0.0; FEATURE_COUNT];
    scale_features(scale1, &mut v[..PER_SCALE])?;
    scale_features(scale2, &mut v[PER_SCALE..])?;
    Ok(FeatureVector(v))
}

pub fn brisque_features(img: &GrayImage) -> Result<FeatureVector> {
    if img.width() < MIN_BRISQUE_SIZE || img.height() < MIN_BRISQUE_SIZE {
        return Err(Error::Metric(format!(
            "BRISQUE needs at least {MIN_BRISQUE_SIZE}x{MIN_BRISQUE_SIZE}, image is {}x{}",
            img.width(),
            img.height()
        )));
    }
    let window = GaussianWindow::default();
    let full = Field::from_image(img);
    let s1 = mscn_decompose(&full, MSCN_C, &window).coefficients;
    let s2 = mscn_decompose(&full.downsample(), MSCN_C, &window).coefficients;
    nss_features(&s1, &s2)
}
