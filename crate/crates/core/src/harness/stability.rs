//! Spread of the full-reference metrics over repeated optimizer runs with derived seeds.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::load_image;
use crate::metrics::{evaluate_with, MetricReport};
use crate::nr_quality::QualityModels;

use super::config::RunConfig;
use super::enhance_one;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSpread {
    pub count: usize,
    pub mean: f64,
    /// Sample variance (denominator `n - 1`).
    pub variance: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub range: f64,
}

/// Summary statistics of at least two values.
pub fn spread(values: &[f64]) -> Result<MetricSpread> {
    if values.len() < 2 {
        return Err(Error::Stability(format!(
            "need at least 2 measurements, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    // Offsets from the first value keep identical inputs at exactly zero spread.
    let origin = values[0];
    let shift = values.iter().map(|v| v - origin).sum::<f64>() / n;
    let mean = origin + shift;
    let variance = values.iter().map(|v| (v - origin - shift).powi(2)).sum::<f64>() / (n - 1.0);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(MetricSpread {
        count: values.len(),
        mean,
        variance,
        std_dev: variance.sqrt(),
        min,
        max,
        range: max - min,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub images: usize,
    pub runs: usize,
    /// Successful (image, run) cells.
    pub cells: usize,
    pub ambe: MetricSpread,
    /// Over cells with finite PSNR.
    pub psnr: MetricSpread,
    pub psnr_excluded: usize,
    pub ssi: MetricSpread,
    pub fitness: MetricSpread,
}

impl StabilityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,count,mean,variance,std_dev,min,max,range\n");
        for (name, s) in [
            ("ambe", &self.ambe),
            ("psnr", &self.psnr),
            ("ssi", &self.ssi),
            ("fitness", &self.fitness),
        ] {
            out.push_str(&format!(
                "{name},{},{},{},{},{},{},{}\n",
                s.count, s.mean, s.variance, s.std_dev, s.min, s.max, s.range
            ));
        }
        out
    }
}

/// Seed of run `run` (0-based).
pub fn run_seed(config: &RunConfig, run: usize) -> u64 {
    config
        .coot
        .seed
        .wrapping_add((run as u64).wrapping_mul(config.seed_stride))
}

/// Runs the optimizer `runs` times per image, seeds `base + run * stride`. Runs on one image
/// are sequential; images proceed in parallel.
pub fn stability_run(
    images: &[PathBuf],
    runs: usize,
    config: &RunConfig,
    models: &QualityModels,
) -> Result<StabilityReport> {
    if runs < 2 {
        return Err(Error::Config(format!("stability needs at least 2 runs, got {runs}")));
    }
    config.validate()?;
    let per_image: Vec<Vec<(MetricReport, f64)>> = images
        .par_iter()
        .map(|path| -> Result<Vec<(MetricReport, f64)>> {
            let img = load_image(path)?;
            let mut cells = Vec::with_capacity(runs);
            for run in 0..runs {
                let mut cfg = config.clone();
                cfg.coot.seed = run_seed(config, run);
                match enhance_one(&img, &cfg, models) {
                    Ok(out) => cells.push((
                        evaluate_with(&img, &out.enhanced, config.psnr_denominator)?,
                        out.best_fitness,
                    )),
                    Err(e) => log::warn!("{} run {run}: {e}", path.display()),
                }
            }
            Ok(cells)
        })
        .collect::<Result<_>>()?;
    let cells: Vec<_> = per_image.into_iter().flatten().collect();
    let psnr: Vec<f64> = cells.iter().map(|c| c.0.psnr).filter(|p| p.is_finite()).collect();
    Ok(StabilityReport {
        images: images.len(),
        runs,
        cells: cells.len(),
        ambe: spread(&cells.iter().map(|c| c.0.ambe).collect::<Vec<_>>())?,
        psnr_excluded: cells.len() - psnr.len(),
        psnr: spread(&psnr)?,
        ssi: spread(&cells.iter().map(|c| c.0.ssi).collect::<Vec<_>>())?,
        fitness: spread(&cells.iter().map(|c| c.1).collect::<Vec<_>>())?,
    })
}
