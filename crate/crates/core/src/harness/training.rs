//! NIQE model training from a directory of pristine images.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::load_image;
use crate::nr_quality::{fit_mvg, niqe_patch_features, FeatureVector, NiqeModel, MIN_TRAINING_VECTORS};

use super::batch::list_images;

/// Kept patch features of every image under `dir`, in path order. Unreadable images and
/// images with no usable patch are logged and skipped.
pub fn corpus_patch_features(dir: impl AsRef<Path>, patch_size: usize, threshold: f64) -> Result<Vec<FeatureVector>> {
    let files = list_images(dir)?;
    let per_image: Vec<Vec<FeatureVector>> = files
        .par_iter()
        .map(|(path, _)| {
            let feats = load_image(path).and_then(|img| niqe_patch_features(&img, patch_size, threshold));
            match feats {
                Ok(f) => Ok(f),
                Err(e @ Error::Parameter(_)) => Err(e),
                Err(e) => {
                    log::warn!("skipping {}: {e}", path.display());
                    Ok(Vec::new())
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(per_image.into_iter().flatten().collect())
}

pub fn train_niqe(corpus_dir: impl AsRef<Path>, patch_size: usize, threshold: f64) -> Result<NiqeModel> {
    let dir = corpus_dir.as_ref();
    let features = corpus_patch_features(dir, patch_size, threshold)?;
    if features.len() < MIN_TRAINING_VECTORS {
        return Err(Error::Training(format!(
            "{} yielded {} patches, {} short of the {MIN_TRAINING_VECTORS} needed",
            dir.display(),
            features.len(),
            MIN_TRAINING_VECTORS - features.len()
        )));
    }
    let model = NiqeModel::new(fit_mvg(&features)?, patch_size, threshold)?;
    if model.is_degenerate() {
        log::warn!("training patches are all identical; the NIQE model has zero covariance");
    }
    log::info!("trained NIQE model on {} patches", features.len());
    Ok(model)
}
