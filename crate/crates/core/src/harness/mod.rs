//! Experiment harness: coot-optimized MVSIHE on single images, batch comparison against the
//! baselines, seed-stability statistics and NIQE model training.

mod batch;
mod config;
mod stability;
mod training;

use crate::enhancement::{mvsihe_enhance, EnhancementParams, Partition};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::nr_quality::{fitness, FitnessMode, QualityModels};
use crate::optimizer::{self, ConvergenceTrace};

pub use batch::{batch_evaluate, batch_evaluate_with, list_images, BatchReport, BatchRow, Method, MethodAverage};
pub use config::{parameter_space, RunConfig, BASELINE_DELTA, PARAMETER_LOWER, PARAMETER_UPPER};
pub use stability::{spread, stability_run, MetricSpread, StabilityReport};
pub use training::{corpus_patch_features, train_niqe};

/// Fitness recorded for candidates whose enhancement or scoring failed. The optimizer only
/// accepts finite values, so the largest finite float stands in for infinity.
pub const FAILED_CANDIDATE: f64 = f64::MAX;

/// Rounds an optimizer position `(delta, k_h1, k_h2, k_h3)` into enhancement parameters.
pub fn position_to_params(position: &[f64]) -> Result<EnhancementParams> {
    let [delta, k1, k2, k3] = position else {
        return Err(Error::Parameter(format!(
            "expected a 4-dimensional position, got {}",
            position.len()
        )));
    };
    Ok(EnhancementParams::fixed(
        delta.clamp(0.0, 1.0),
        Partition::from_reals(*k1, *k2, *k3)?,
    ))
}

/// Quality fitness of `img` enhanced with `params`.
pub fn params_fitness(
    img: &GrayImage,
    params: &EnhancementParams,
    models: &QualityModels,
    mode: FitnessMode,
) -> Result<f64> {
    fitness(&mvsihe_enhance(img, params)?, models, mode)
}

#[derive(Debug, Clone)]
pub struct EnhanceOutcome {
    pub enhanced: GrayImage,
    pub params: EnhancementParams,
    pub trace: ConvergenceTrace,
    pub best_fitness: f64,
    pub initial_best_fitness: f64,
    pub evaluations: usize,
}

/// Searches MVSIHE parameters with the coot optimizer, minimizing the no-reference fitness.
pub fn enhance_one(img: &GrayImage, config: &RunConfig, models: &QualityModels) -> Result<EnhanceOutcome> {
    config.validate()?;
    models.check_mode(config.fitness_mode)?;
    let space = parameter_space(config)?;
    let objective = |pos: &[f64]| -> Result<f64> {
        let score = position_to_params(pos).and_then(|p| params_fitness(img, &p, models, config.fitness_mode));
        Ok(match score {
            Ok(v) if v.is_finite() => v,
            Ok(v) => {
                log::debug!("candidate {pos:?} scored {v}");
                FAILED_CANDIDATE
            }
            Err(e) => {
                log::debug!("candidate {pos:?} failed: {e}");
                FAILED_CANDIDATE
            }
        })
    };
    let result = optimizer::run(objective, &space, &config.coot)?;
    if result.best_fitness >= FAILED_CANDIDATE {
        return Err(Error::Enhancement(format!(
            "all {} candidates failed to enhance or score",
            result.evaluations
        )));
    }
    let params = position_to_params(&result.best_position)?;
    Ok(EnhanceOutcome {
        enhanced: mvsihe_enhance(img, &params)?,
        params,
        trace: result.trace,
        best_fitness: result.best_fitness,
        initial_best_fitness: result.initial_best_fitness,
        evaluations: result.evaluations,
    })
}

pub fn export_trace(trace: &ConvergenceTrace, path: impl AsRef<std::path::Path>) -> Result<()> {
    trace.write_csv(path)
}
