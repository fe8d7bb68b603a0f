//! NIQE: distance between an image's patch-feature Gaussian and a pristine-corpus model.
//!
//! Model file layout:
//!
//! ```text
//! niqemodel v1
//! patch_size <p>
//! threshold <t>
//! mean <36 values>
//! <36 covariance rows of 36 values>
//! ```

use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::image::GrayImage;

use super::features::{nss_features, FeatureVector, FEATURE_COUNT};
use super::model_text::{content_lines, expect_header, join, keyed, parse_floats};
use super::mscn::{mscn_decompose, Field, GaussianWindow, MSCN_C};

const HEADER: &str = "niqemodel v1";
pub const DEFAULT_PATCH_SIZE: usize = 96;
pub const DEFAULT_THRESHOLD: f64 = 0.75;
pub const MIN_PATCH_SIZE: usize = 8;
/// Fewest vectors for a full-rank covariance in 36 dimensions.
pub const MIN_TRAINING_VECTORS: usize = FEATURE_COUNT + 1;
/// Eigenvalues at or below this are dropped from the pooled-covariance pseudo-inverse.
pub const EIGEN_FLOOR: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-9;

/// Mean and sample covariance of a set of feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Mvg {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl Mvg {
    /// Any non-empty set; a single vector yields a zero covariance.
    fn estimate(features: &[FeatureVector]) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Metric("no feature vectors to fit".into()));
        }
        let n = features.len();
        // Accumulate relative to the first vector: identical inputs then give exact zeros.
        let origin = DVector::from_column_slice(&features[0]);
        let offsets: Vec<DVector<f64>> = features
            .iter()
            .map(|f| DVector::from_column_slice(f) - &origin)
            .collect();
        let mut shift = DVector::zeros(FEATURE_COUNT);
        for d in &offsets {
            shift += d;
        }
        shift /= n as f64;
        let mut covariance = DMatrix::zeros(FEATURE_COUNT, FEATURE_COUNT);
        if n > 1 {
            for d in &offsets {
                let c = d - &shift;
                covariance += &c * c.transpose();
            }
            covariance /= (n - 1) as f64;
            covariance = (&covariance + covariance.transpose()) * 0.5;
        }
        let mean = origin + shift;
        Ok(Self { mean, covariance })
    }
}

/// Sample mean and covariance (denominator `n - 1`) of at least 37 vectors.
pub fn fit_mvg(features: &[FeatureVector]) -> Result<Mvg> {
    if features.len() < MIN_TRAINING_VECTORS {
        return Err(Error::Training(format!(
            "need at least {MIN_TRAINING_VECTORS} feature vectors, got {} ({} short)",
            features.len(),
            MIN_TRAINING_VECTORS - features.len()
        )));
    }
    Mvg::estimate(features)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NiqeModel {
    pub mvg: Mvg,
    pub patch_size: usize,
    /// Sharpness threshold the training patches were selected with.
    pub threshold: f64,
}

impl NiqeModel {
    pub fn new(mvg: Mvg, patch_size: usize, threshold: f64) -> Result<Self> {
        let model = Self {
            mvg,
            patch_size,
            threshold,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.patch_size < MIN_PATCH_SIZE {
            return Err(Error::Model(format!(
                "patch size {} is below {MIN_PATCH_SIZE}",
                self.patch_size
            )));
        }
        check_threshold(self.threshold).map_err(|e| Error::Model(e.to_string()))?;
        let c = &self.mvg.covariance;
        if self.mvg.mean.len() != FEATURE_COUNT || c.shape() != (FEATURE_COUNT, FEATURE_COUNT) {
            return Err(Error::Model(format!("model must be {FEATURE_COUNT}-dimensional")));
        }
        if self.mvg.mean.iter().chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Model("model contains non-finite values".into()));
        }
        let asym = (c - c.transpose()).amax();
        if asym > SYMMETRY_TOL {
            return Err(Error::Model(format!(
                "covariance is not symmetric (max deviation {asym:e})"
            )));
        }
        Ok(())
    }

    /// True when the training features had no spread at all.
    pub fn is_degenerate(&self) -> bool {
        self.mvg.covariance.iter().all(|&v| v == 0.0)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        expect_header(lines.next(), HEADER)?;
        let patch = keyed(lines.next(), "patch_size", 1)?[0];
        if patch.fract() != 0.0 || patch < 0.0 {
            return Err(Error::Model(format!("patch size {patch} is not a whole number")));
        }
        let threshold = keyed(lines.next(), "threshold", 1)?[0];
        let mean = keyed(lines.next(), "mean", FEATURE_COUNT)?;
        let mut rows = Vec::with_capacity(FEATURE_COUNT * FEATURE_COUNT);
        let mut count = 0;
        for (lineno, line) in lines {
            let row = parse_floats(line, lineno)?;
            if row.len() != FEATURE_COUNT {
                return Err(Error::Model(format!(
                    "line {lineno}: covariance row needs {FEATURE_COUNT} values, found {}",
                    row.len()
                )));
            }
            rows.extend(row);
            count += 1;
        }
        if count != FEATURE_COUNT {
            return Err(Error::Model(format!(
                "expected {FEATURE_COUNT} covariance rows, found {count}"
            )));
        }
        Self::new(
            Mvg {
                mean: DVector::from_vec(mean),
                covariance: DMatrix::from_row_slice(FEATURE_COUNT, FEATURE_COUNT, &rows),
            },
            patch as usize,
            threshold,
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{HEADER}\npatch_size {}\nthreshold {}\nmean {}\n",
            self.patch_size,
            self.threshold,
            join(self.mvg.mean.iter().copied())
        );
        for row in self.mvg.covariance.row_iter() {
            out.push_str(&join(row.iter().copied()));
            out.push('\n');
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Model(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("sharpness threshold {t} is outside [0, 1]")))
    }
}

/// Position and sharpness of one tile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchSharpness {
    pub x: usize,
    pub y: usize,
    /// Sum of the local deviation field over the patch.
    pub sharpness: f64,
}

/// Patch grid of `img` with each tile's summed local deviation, in row-major tile order.
pub fn patch_sharpness(img: &GrayImage, patch_size: usize) -> Result<Vec<PatchSharpness>> {
    check_patch_fit(img, patch_size)?;
    let d = mscn_decompose(&Field::from_image(img), MSCN_C, &GaussianWindow::default());
    Ok(tiles(img, patch_size)
        .map(|(x, y)| PatchSharpness {
            x,
            y,
            sharpness: d.local_deviation.crop(x, y, patch_size, patch_size).values.iter().sum(),
        })
        .collect())
}

fn check_patch_fit(img: &GrayImage, patch_size: usize) -> Result<()> {
    if patch_size < MIN_PATCH_SIZE {
        return Err(Error::Parameter(format!(
            "patch size {patch_size} is below {MIN_PATCH_SIZE}"
        )));
    }
    if img.width() < patch_size || img.height() < patch_size {
        return Err(Error::Metric(format!(
            "{}x{} image holds no {patch_size}x{patch_size} patch",
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

fn tiles(img: &GrayImage, p: usize) -> impl Iterator<Item = (usize, usize)> {
    let (nx, ny) = (img.width() / p, img.height() / p);
    (0..ny).flat_map(move |ty| (0..nx).map(move |tx| (tx * p, ty * p)))
}

/// Features of every non-overlapping patch whose sharpness reaches `threshold` times the
/// sharpest patch. Coefficients are computed on the whole image and then cropped.
pub fn niqe_patch_features(img: &GrayImage, patch_size: usize, threshold: f64) -> Result<Vec<FeatureVector>> {
    check_threshold(threshold)?;
    check_patch_fit(img, patch_size)?;
    let window = GaussianWindow::default();
    let full = Field::from_image(img);
    let s1 = mscn_decompose(&full, MSCN_C, &window);
    let s2 = mscn_decompose(&full.downsample(), MSCN_C, &window).coefficients;

    let sharpness: Vec<(usize, usize, f64)> = tiles(img, patch_size)
        .map(|(x, y)| {
            let s = s1
                .local_deviation
                .crop(x, y, patch_size, patch_size)
                .values
                .iter()
                .sum();
            (x, y, s)
        })
        .collect();
    let max = sharpness.iter().map(|t| t.2).fold(0.0, f64::max);
    if max <= 0.0 {
        return Err(Error::Metric("no patch has any local contrast (blank image)".into()));
    }
    let half = patch_size / 2;
    sharpness
        .iter()
        .filter(|t| t.2 >= threshold * max)
        .map(|&(x, y, _)| {
            let c1 = s1.coefficients.crop(x, y, patch_size, patch_size);
            let c2 = s2.crop(x / 2, y / 2, half, half);
            nss_features(&c1, &c2)
        })
        .collect()
}

/// `sqrt(d^T ((S1 + S2) / 2)^+ d)` with `d = m1 - m2`; the pseudo-inverse drops eigenvalues
/// at or below [`EIGEN_FLOOR`].
pub fn mvg_distance(a: &Mvg, b: &Mvg) -> f64 {
    let d = &a.mean - &b.mean;
    let pooled = (&a.covariance + &b.covariance) * 0.5;
    let eig = SymmetricEigen::new(pooled);
    let mut q = 0.0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > EIGEN_FLOOR {
            let proj = eig.eigenvectors.column(k).dot(&d);
            q += proj * proj / lambda;
        }
    }
    q.max(0.0).sqrt()
}

/// Largest multiple of 8 that fits in both dimensions.
fn fallback_patch_size(img: &GrayImage) -> usize {
    img.width().min(img.height()) / 8 * 8
}

pub fn niqe_score(img: &GrayImage, model: &NiqeModel) -> Result<f64> {
    let mut patch = model.patch_size;
    if img.width() < patch || img.height() < patch {
        let fallback = fallback_patch_size(img);
        if fallback < MIN_PATCH_SIZE {
            return Err(Error::Metric(format!(
                "{}x{} image is too small for NIQE",
                img.width(),
                img.height()
            )));
        }
        log::warn!(
            "{}x{} image is smaller than the {patch}px model patch; scoring with {fallback}px patches",
            img.width(),
            img.height()
        );
        patch = fallback;
    }
    // Sharpness selection shapes the pristine model only; the scored image contributes
    // every patch, so distortions that flatten or roughen some regions are not filtered out.
    let features = niqe_patch_features(img, patch, 0.0)?;
    let fit = Mvg::estimate(&features)?;
    Ok(mvg_distance(&model.mvg, &fit))
}
