//! Full-reference metrics: absolute mean brightness error, PSNR and a global SSIM.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{image_mean, GrayImage};

/// `(0.01 * 255)^2`
pub const SSI_C1: f64 = 6.5025;
/// `(0.03 * 255)^2`
pub const SSI_C2: f64 = 58.5225;

const PEAK_SQUARED: f64 = 255.0 * 255.0;

/// Denominator of the PSNR ratio.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsnrDenominator {
    /// `10 log10(255^2 / MSE)`, the usual definition.
    #[default]
    Mse,
    /// `10 log10(255^2 / sqrt(MSE))`, a variant some published results use.
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub ambe: f64,
    /// Decibels; `f64::INFINITY` for identical images.
    pub psnr: f64,
    pub ssi: f64,
}

fn check_dims(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if a.same_dimensions(b) {
        Ok(())
    } else {
        Err(Error::Metric(format!(
            "image sizes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )))
    }
}

pub fn ambe(input: &GrayImage, output: &GrayImage) -> Result<f64> {
    check_dims(input, output)?;
    Ok((image_mean(input) - image_mean(output)).abs())
}

pub fn mse(input: &GrayImage, output: &GrayImage) -> Result<f64> {
    check_dims(input, output)?;
    let sum: u64 = input
        .pixels()
        .iter()
        .zip(output.pixels())
        .map(|(&a, &b)| {
            let d = i64::from(a) - i64::from(b);
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / input.len() as f64)
}

pub fn psnr(input: &GrayImage, output: &GrayImage) -> Result<f64> {
    psnr_with(input, output, PsnrDenominator::Mse)
}

pub fn psnr_with(input: &GrayImage, output: &GrayImage, denominator: PsnrDenominator) -> Result<f64> {
    let mse = mse(input, output)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    let denom = match denominator {
        PsnrDenominator::Mse => mse,
        PsnrDenominator::Sqrt => mse.sqrt(),
    };
    Ok(10.0 * (PEAK_SQUARED / denom).log10())
}

/// Structural similarity from whole-image means, variances and covariance.
pub fn ssi(input: &GrayImage, output: &GrayImage, c1: f64, c2: f64) -> Result<f64> {
    check_dims(input, output)?;
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::Parameter(format!(
            "SSI constants must be positive, got {c1}, {c2}"
        )));
    }
    let n = input.len() as f64;
    let mean_i = image_mean(input);
    let mean_o = image_mean(output);
    let (mut var_i, mut var_o, mut cov) = (0.0, 0.0, 0.0);
    for (&a, &b) in input.pixels().iter().zip(output.pixels()) {
        let da = f64::from(a) - mean_i;
        let db = f64::from(b) - mean_o;
        var_i += da * da;
        var_o += db * db;
        cov += da * db;
    }
    let (var_i, var_o, cov) = (var_i / n, var_o / n, cov / n);
    let luminance = (2.0 * mean_i * mean_o + c1) / (mean_i * mean_i + mean_o * mean_o + c1);
    let structure = (2.0 * cov + c2) / (var_i + var_o + c2);
    Ok(luminance * structure)
}

pub fn evaluate(input: &GrayImage, output: &GrayImage) -> Result<MetricReport> {
    evaluate_with(input, output, PsnrDenominator::Mse)
}

pub fn evaluate_with(input: &GrayImage, output: &GrayImage, denominator: PsnrDenominator) -> Result<MetricReport> {
    Ok(MetricReport {
        ambe: ambe(input, output)?,
        psnr: psnr_with(input, output, denominator)?,
        ssi: ssi(input, output, SSI_C1, SSI_C2)?,
    })
}
