//! Batch comparison of the enhancement methods over a directory of images.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use walkdir::WalkDir;

use crate::enhancement::{bbhe, classic_he, dsihe, mvsihe_stages, EnhancementParams, Partition, PartitionChoice};
use crate::error::{Error, Result};
use crate::image::{load_image, GrayImage};
use crate::metrics::{evaluate_with, MetricReport};
use crate::nr_quality::{fitness, QualityModels};

use super::config::{RunConfig, BASELINE_DELTA};
use super::enhance_one;

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "pgm", "pnm", "ppm"];
const UNLABELED: &str = "unlabeled";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    He,
    Bbhe,
    Dsihe,
    Mvsihe,
    Coa,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::He, Method::Bbhe, Method::Dsihe, Method::Mvsihe, Method::Coa];

    pub fn name(self) -> &'static str {
        match self {
            Method::He => "he",
            Method::Bbhe => "bbhe",
            Method::Dsihe => "dsihe",
            Method::Mvsihe => "mvsihe",
            Method::Coa => "coa",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method `{s}` (expected he, bbhe, dsihe, mvsihe or coa)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub path: PathBuf,
    pub class: String,
    pub method: Method,
    pub metrics: MetricReport,
    pub delta: Option<f64>,
    pub partition: Option<Partition>,
    /// No-reference fitness of the output, when quality models were loaded.
    pub fitness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodAverage {
    pub method: Method,
    pub rows: usize,
    pub ambe: f64,
    /// Mean over rows with finite PSNR; NaN when there are none.
    pub psnr: f64,
    /// Rows left out of the PSNR mean because the output equalled the input.
    pub psnr_excluded: usize,
    pub ssi: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatchReport {
    pub rows: Vec<BatchRow>,
    pub averages: Vec<MethodAverage>,
}

fn fmt_num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        v.to_string()
    }
}

fn csv_err(e: impl fmt::Display) -> Error {
    Error::Report(e.to_string())
}

impl BatchReport {
    fn from_rows(mut rows: Vec<BatchRow>) -> Self {
        rows.sort_by(|a, b| a.path.cmp(&b.path).then(a.method.cmp(&b.method)));
        let mut by_method: BTreeMap<Method, Vec<&BatchRow>> = BTreeMap::new();
        for r in &rows {
            by_method.entry(r.method).or_default().push(r);
        }
        let averages = by_method
            .into_iter()
            .map(|(method, rs)| {
                let n = rs.len() as f64;
                let finite: Vec<f64> = rs.iter().map(|r| r.metrics.psnr).filter(|p| p.is_finite()).collect();
                MethodAverage {
                    method,
                    rows: rs.len(),
                    ambe: rs.iter().map(|r| r.metrics.ambe).sum::<f64>() / n,
                    psnr: finite.iter().sum::<f64>() / finite.len() as f64,
                    psnr_excluded: rs.len() - finite.len(),
                    ssi: rs.iter().map(|r| r.metrics.ssi).sum::<f64>() / n,
                }
            })
            .collect();
        Self { rows, averages }
    }

    pub fn average(&self, method: Method) -> Option<&MethodAverage> {
        self.averages.iter().find(|a| a.method == method)
    }

    pub fn rows_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "path", "class", "method", "ambe", "psnr", "ssi", "delta", "k_h1", "k_h2", "k_h3", "fitness",
        ])
        .map_err(csv_err)?;
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
            let k = |f: fn(&Partition) -> u8| r.partition.as_ref().map(|p| f(p).to_string()).unwrap_or_default();
            w.write_record([
                r.path.display().to_string(),
                r.class.clone(),
                r.method.to_string(),
                fmt_num(r.metrics.ambe),
                fmt_num(r.metrics.psnr),
                fmt_num(r.metrics.ssi),
                opt(r.delta),
                k(Partition::k_h1),
                k(Partition::k_h2),
                k(Partition::k_h3),
                opt(r.fitness),
            ])
            .map_err(csv_err)?;
        }
        String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
    }

    pub fn averages_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["method", "rows", "ambe", "psnr", "psnr_excluded", "ssi"])
            .map_err(csv_err)?;
        for a in &self.averages {
            w.write_record([
                a.method.to_string(),
                a.rows.to_string(),
                fmt_num(a.ambe),
                fmt_num(a.psnr),
                a.psnr_excluded.to_string(),
                fmt_num(a.ssi),
            ])
            .map_err(csv_err)?;
        }
        String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
    }

    /// Writes the per-row CSV to `path` and the averages next to it as `<stem>_averages.csv`.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<PathBuf> {
        let path = path.as_ref();
        std::fs::write(path, self.rows_csv()?).map_err(|e| Error::io(path, e))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
        let avg = path.with_file_name(format!("{stem}_averages.csv"));
        std::fs::write(&avg, self.averages_csv()?).map_err(|e| Error::io(&avg, e))?;
        Ok(avg)
    }
}

/// Image files under `dir`, sorted, paired with their class label (the immediate parent
/// folder, or "unlabeled" for files directly in `dir`).
pub fn list_images(dir: impl AsRef<Path>) -> Result<Vec<(PathBuf, String)>> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let mut out = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::Report(format!("walking {}: {e}", dir.display())))?;
        let path = entry.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if !entry.file_type().is_file() || !is_image {
            continue;
        }
        let class = match path.parent() {
            Some(p) if p != dir => p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| UNLABELED.into()),
            _ => UNLABELED.into(),
        };
        out.push((path.to_path_buf(), class));
    }
    Ok(out)
}

pub fn batch_evaluate(dir: impl AsRef<Path>, methods: &[Method], config: &RunConfig) -> Result<BatchReport> {
    let models = if methods.contains(&Method::Coa) {
        Some(config.load_models()?)
    } else {
        None
    };
    batch_evaluate_with(dir, methods, config, models.as_ref())
}

/// Like [`batch_evaluate`] with preloaded models. Models are required for the COA method and,
/// when present, also score the fixed MVSIHE baseline.
pub fn batch_evaluate_with(
    dir: impl AsRef<Path>,
    methods: &[Method],
    config: &RunConfig,
    models: Option<&QualityModels>,
) -> Result<BatchReport> {
    config.validate()?;
    if methods.contains(&Method::Coa) && models.is_none() {
        return Err(Error::Config("the coa method needs quality models".into()));
    }
    let files = list_images(dir)?;
    let rows: Vec<Vec<BatchRow>> = files
        .par_iter()
        .map(|(path, class)| match load_image(path) {
            Ok(img) => image_rows(path, class, &img, methods, config, models),
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                Ok(Vec::new())
            }
        })
        .collect::<Result<_>>()?;
    Ok(BatchReport::from_rows(rows.into_iter().flatten().collect()))
}

fn image_rows(
    path: &Path,
    class: &str,
    img: &GrayImage,
    methods: &[Method],
    config: &RunConfig,
    models: Option<&QualityModels>,
) -> Result<Vec<BatchRow>> {
    let mut rows = Vec::new();
    let mut push = |method, output: &GrayImage, delta, partition, fitness| -> Result<()> {
        rows.push(BatchRow {
            path: path.to_path_buf(),
            class: class.to_string(),
            method,
            metrics: evaluate_with(img, output, config.psnr_denominator)?,
            delta,
            partition,
            fitness,
        });
        Ok(())
    };
    for &method in methods {
        match method {
            Method::He => push(method, &classic_he(img), None, None, None)?,
            Method::Bbhe => push(method, &bbhe(img), None, None, None)?,
            Method::Dsihe => push(method, &dsihe(img), None, None, None)?,
            Method::Mvsihe => match mvsihe_stages(img, &EnhancementParams::auto(BASELINE_DELTA)) {
                Ok(stages) => {
                    let fit = match models {
                        Some(m) => score_or_warn(path, &stages.output, m, config),
                        None => None,
                    };
                    push(
                        method,
                        &stages.output,
                        Some(BASELINE_DELTA),
                        Some(stages.partition),
                        fit,
                    )?;
                }
                Err(e) => log::warn!("{}: mvsihe baseline skipped: {e}", path.display()),
            },
            Method::Coa => {
                let models = models.expect("checked by caller");
                match enhance_one(img, config, models) {
                    Ok(out) => {
                        let partition = match out.params.partition {
                            PartitionChoice::Fixed(p) => Some(p),
                            PartitionChoice::Auto => None,
                        };
                        push(
                            method,
                            &out.enhanced,
                            Some(out.params.delta),
                            partition,
                            Some(out.best_fitness),
                        )?;
                    }
                    Err(e) => log::warn!("{}: coa skipped: {e}", path.display()),
                }
            }
        }
    }
    Ok(rows)
}

fn score_or_warn(path: &Path, img: &GrayImage, models: &QualityModels, config: &RunConfig) -> Option<f64> {
    match fitness(img, models, config.fitness_mode) {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("{}: fitness unavailable: {e}", path.display());
            None
        }
    }
}
