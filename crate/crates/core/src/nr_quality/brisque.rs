//! BRISQUE scoring with an RBF support-vector regressor loaded from a text model.
//!
//! Model file layout:
//!
//! ```text
//! svrmodel v1
//! gamma <g>
//! bias <b>
//! range <lo> <hi>
//! scale <min_1> <max_1> ... <min_36> <max_36>
//! <36 scaled features> <coefficient>     one line per support vector
//! ```
//!
//! Features are scaled to `[-1, 1]` with the per-feature bounds before the kernel is applied;
//! support vectors are stored already scaled. Lines starting with `#` are ignored.

use std::path::Path;

use crate::error::{Error, Result};

use super::features::{FeatureVector, FEATURE_COUNT};
use super::model_text::{content_lines, expect_header, join, keyed, parse_floats};

const HEADER: &str = "svrmodel v1";

#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub gamma: f64,
    pub bias: f64,
    pub score_range: (f64, f64),
    /// `(min, max)` of each raw feature.
    pub scaling: Vec<(f64, f64)>,
    pub support_vectors: Vec<FeatureVector>,
    pub coefficients: Vec<f64>,
}

impl SvrModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Model(format!(
                "kernel width {} must be finite and >= 0",
                self.gamma
            )));
        }
        if self.scaling.len() != FEATURE_COUNT {
            return Err(Error::Model(format!(
                "model scales {} features, expected {FEATURE_COUNT}",
                self.scaling.len()
            )));
        }
        if self.support_vectors.len() != self.coefficients.len() {
            return Err(Error::Model(format!(
                "{} support vectors but {} coefficients",
                self.support_vectors.len(),
                self.coefficients.len()
            )));
        }
        if self.score_range.0 > self.score_range.1 {
            return Err(Error::Model(format!("empty score range {:?}", self.score_range)));
        }
        Ok(())
    }

    /// Maps raw features onto the model's `[-1, 1]` scale; constant features map to 0.
    pub fn scale(&self, features: &[f64]) -> Result<FeatureVector> {
        if features.len() != self.scaling.len() {
            return Err(Error::Model(format!(
                "model expects {} features, got {}",
                self.scaling.len(),
                features.len()
            )));
        }
        let scaled: Vec<f64> = features
            .iter()
            .zip(&self.scaling)
            .map(|(&x, &(lo, hi))| {
                if hi > lo {
                    -1.0 + 2.0 * (x - lo) / (hi - lo)
                } else {
                    0.0
                }
            })
            .collect();
        FeatureVector::from_slice(&scaled)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        expect_header(lines.next(), HEADER)?;
        let gamma = keyed(lines.next(), "gamma", 1)?[0];
        let bias = keyed(lines.next(), "bias", 1)?[0];
        let range = keyed(lines.next(), "range", 2)?;
        let scale = keyed(lines.next(), "scale", 2 * FEATURE_COUNT)?;
        let mut support_vectors = Vec::new();
        let mut coefficients = Vec::new();
        for (lineno, line) in lines {
            let values = parse_floats(line, lineno)?;
            if values.len() != FEATURE_COUNT + 1 {
                return Err(Error::Model(format!(
                    "line {lineno}: support vector needs {} values, found {}",
                    FEATURE_COUNT + 1,
                    values.len()
                )));
            }
            support_vectors.push(FeatureVector::from_slice(&values[..FEATURE_COUNT])?);
            coefficients.push(values[FEATURE_COUNT]);
        }
        let model = Self {
            gamma,
            bias,
            score_range: (range[0], range[1]),
            scaling: scale.chunks(2).map(|c| (c[0], c[1])).collect(),
            support_vectors,
            coefficients,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{HEADER}\ngamma {}\nbias {}\nrange {} {}\nscale {}\n",
            self.gamma,
            self.bias,
            self.score_range.0,
            self.score_range.1,
            join(self.scaling.iter().flat_map(|&(a, b)| [a, b]))
        );
        for (sv, c) in self.support_vectors.iter().zip(&self.coefficients) {
            out.push_str(&join(sv.iter().copied().chain([*c])));
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

/// `sum_i a_i exp(-gamma |x - s_i|^2) + b` on scaled features, clamped to the score range.
pub fn brisque_score(features: &[f64], model: &SvrModel) -> Result<f64> {
    let x = model.scale(features)?;
    let raw = model
        .support_vectors
        .iter()
        .zip(&model.coefficients)
        .map(|(sv, a)| {
            let d2: f64 = sv.iter().zip(x.iter()).map(|(s, v)| (s - v) * (s - v)).sum();
            a * (-model.gamma * d2).exp()
        })
        .sum::<f64>()
        + model.bias;
    Ok(raw.clamp(model.score_range.0, model.score_range.1))
}
