//! No-reference quality: BRISQUE features and SVR scoring, NIQE, and the product fitness used
//! to steer the optimizer. Lower scores mean better quality throughout.

mod brisque;
mod features;
mod fit;
mod model_text;
mod mscn;
mod niqe;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

pub use brisque::{brisque_score, SvrModel};
pub use features::{brisque_features, nss_features, FeatureVector, FEATURE_COUNT, FEATURE_NAMES, MIN_BRISQUE_SIZE};
pub use fit::{fit_aggd, fit_ggd, ggd_ratio, AggdParams, GgdParams, DEGENERATE_SHAPE, SHAPE_MAX, SHAPE_MIN};
pub use mscn::{mscn, mscn_decompose, pairwise_products, Field, GaussianWindow, MscnDecomposition, MscnField, MSCN_C};
pub use niqe::{
    fit_mvg, mvg_distance, niqe_patch_features, niqe_score, patch_sharpness, Mvg, NiqeModel, PatchSharpness,
    DEFAULT_PATCH_SIZE, DEFAULT_THRESHOLD, EIGEN_FLOOR, MIN_PATCH_SIZE, MIN_TRAINING_VECTORS,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitnessMode {
    /// BRISQUE score times NIQE score.
    #[default]
    BrisqueNiqe,
    /// NIQE alone, for when no BRISQUE regressor is available.
    NiqeOnly,
}

/// Loaded quality models; immutable and shareable across threads.
#[derive(Debug, Clone)]
pub struct QualityModels {
    pub niqe: NiqeModel,
    pub svr: Option<SvrModel>,
}

impl QualityModels {
    pub fn check_mode(&self, mode: FitnessMode) -> Result<()> {
        if mode == FitnessMode::BrisqueNiqe && self.svr.is_none() {
            return Err(Error::Config("BRISQUE x NIQE fitness needs an SVR model".into()));
        }
        Ok(())
    }
}

const REFERENCE_NIQE: &str = include_str!("../../models/niqe_reference.txt");
const REFERENCE_SVR: &str = include_str!("../../models/brisque_reference.txt");

/// NIQE model trained on the bundled corpus of clean photographs.
pub fn reference_niqe() -> NiqeModel {
    NiqeModel::parse(REFERENCE_NIQE).expect("bundled NIQE model is valid")
}

/// Small BRISQUE regressor for regression tests; its absolute scores have no calibrated meaning.
pub fn reference_svr() -> SvrModel {
    SvrModel::parse(REFERENCE_SVR).expect("bundled SVR model is valid")
}

pub fn brisque(img: &GrayImage, model: &SvrModel) -> Result<f64> {
    brisque_score(&brisque_features(img)?, model)
}

/// Product of the two scores, with no normalization of either operand.
pub fn combine_scores(brisque: f64, niqe: f64) -> f64 {
    if niqe == 0.0 {
        0.0
    } else {
        brisque * niqe
    }
}

pub fn fitness(img: &GrayImage, models: &QualityModels, mode: FitnessMode) -> Result<f64> {
    models.check_mode(mode)?;
    let niqe = niqe_score(img, &models.niqe)?;
    match (mode, &models.svr) {
        (FitnessMode::BrisqueNiqe, Some(svr)) => Ok(combine_scores(brisque(img, svr)?, niqe)),
        _ => Ok(niqe),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_models_parse() {
        assert_eq!(reference_niqe().patch_size, DEFAULT_PATCH_SIZE);
        reference_svr().validate().unwrap();
    }

    #[test]
    fn product_rule() {
        assert_eq!(combine_scores(20.0, 4.0), 80.0);
        assert_eq!(combine_scores(1e9, 0.0), 0.0);
        assert_eq!(combine_scores(f64::INFINITY, 0.0), 0.0);
    }

    #[test]
    fn brisque_mode_needs_svr() {
        let mvg = Mvg {
            mean: nalgebra::DVector::zeros(FEATURE_COUNT),
            covariance: nalgebra::DMatrix::identity(FEATURE_COUNT, FEATURE_COUNT),
        };
        let models = QualityModels {
            niqe: NiqeModel::new(mvg, 32, 0.75).unwrap(),
            svr: None,
        };
        let img = GrayImage::from_fn(64, 64, |x, y| ((x * 37 + y * 11) % 251) as u8).unwrap();
        assert!(matches!(
            fitness(&img, &models, FitnessMode::BrisqueNiqe),
            Err(Error::Config(_))
        ));
        let niqe = fitness(&img, &models, FitnessMode::NiqeOnly).unwrap();
        assert_eq!(niqe, niqe_score(&img, &models.niqe).unwrap());
    }

    #[test]
    fn mode_serialization() {
        assert_eq!(serde_json::to_string(&FitnessMode::NiqeOnly).unwrap(), "\"niqe_only\"");
        assert_eq!(
            serde_json::from_str::<FitnessMode>("\"brisque_niqe\"").unwrap(),
            FitnessMode::BrisqueNiqe
        );
    }
}
