use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::PsnrDenominator;
use crate::nr_quality::{FitnessMode, NiqeModel, QualityModels, SvrModel};
use crate::optimizer::{CootConfig, SearchSpace};

/// Lower bounds of `(delta, k_h1, k_h2, k_h3)`.
pub const PARAMETER_LOWER: [f64; 4] = [0.0, 0.0, 51.0, 151.0];
/// Upper bounds of `(delta, k_h1, k_h2, k_h3)`.
pub const PARAMETER_UPPER: [f64; 4] = [1.0, 50.0, 150.0, 255.0];
/// Fusing rate of the fixed MVSIHE baseline.
pub const BASELINE_DELTA: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub coot: CootConfig,
    pub lower: [f64; 4],
    pub upper: [f64; 4],
    pub fitness_mode: FitnessMode,
    /// NIQE model file; the bundled reference model when absent.
    pub niqe_model: Option<PathBuf>,
    /// BRISQUE regressor file; the bundled reference model when absent.
    pub svr_model: Option<PathBuf>,
    pub psnr_denominator: PsnrDenominator,
    pub trace_path: Option<PathBuf>,
    pub report_path: Option<PathBuf>,
    /// Seed increment between stability runs; 0 reuses the base seed for every run.
    pub seed_stride: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            coot: CootConfig::default(),
            lower: PARAMETER_LOWER,
            upper: PARAMETER_UPPER,
            fitness_mode: FitnessMode::default(),
            niqe_model: None,
            svr_model: None,
            psnr_denominator: PsnrDenominator::default(),
            trace_path: None,
            report_path: None,
            seed_stride: 1,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.coot.validate().map_err(|e| Error::Config(e.to_string()))?;
        parameter_space(self)?;
        let (lo, hi) = (self.lower, self.upper);
        if lo[0] < 0.0 || hi[0] > 1.0 {
            return Err(Error::Config(format!(
                "delta bounds [{}, {}] leave [0, 1]",
                lo[0], hi[0]
            )));
        }
        // Every rounded point of the box must give strictly ordered thresholds in [0, 255].
        let round = |v: f64| (v + 0.5).floor();
        if lo[1] < 0.0 || round(hi[1]) >= round(lo[2]) || round(hi[2]) >= round(lo[3]) || hi[3] >= 255.5 {
            return Err(Error::Config(format!(
                "threshold boxes {:?}..{:?} do not guarantee k_h1 < k_h2 < k_h3 within [0, 255]",
                &lo[1..],
                &hi[1..]
            )));
        }
        Ok(())
    }

    /// Loads the models named by the configuration, falling back to the bundled references.
    pub fn load_models(&self) -> Result<QualityModels> {
        let as_config = |e: Error| Error::Config(format!("cannot load quality model: {e}"));
        let niqe = match &self.niqe_model {
            Some(p) => NiqeModel::load(p).map_err(as_config)?,
            None => crate::nr_quality::reference_niqe(),
        };
        let svr = match (self.fitness_mode, &self.svr_model) {
            (FitnessMode::NiqeOnly, _) => None,
            (FitnessMode::BrisqueNiqe, Some(p)) => Some(SvrModel::load(p).map_err(as_config)?),
            (FitnessMode::BrisqueNiqe, None) => Some(crate::nr_quality::reference_svr()),
        };
        Ok(QualityModels { niqe, svr })
    }
}

/// The optimizer's box over `(delta, k_h1, k_h2, k_h3)`.
pub fn parameter_space(config: &RunConfig) -> Result<SearchSpace> {
    SearchSpace::new(config.lower.to_vec(), config.upper.to_vec()).map_err(|e| Error::Config(e.to_string()))
}
