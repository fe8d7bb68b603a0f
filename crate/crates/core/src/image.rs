//! 8-bit grayscale rasters, file I/O and histograms.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageFormat, ImageReader};

use crate::error::{Error, Result};

pub const LEVELS: usize = 256;
pub const MAX_LEVEL: u8 = 255;

/// Row-major 8-bit single-channel image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{width}x{height} image needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn same_dimensions(&self, other: &GrayImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Applies a 256-entry lookup table to every pixel.
    pub fn map_levels(&self, lut: &[u8; LEVELS]) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| lut[v as usize]).collect(),
        }
    }

    pub fn min_max(&self) -> (u8, u8) {
        self.data
            .iter()
            .fold((u8::MAX, u8::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Samples as `f64`, row-major.
    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&v| f64::from(v)).collect()
    }
}

/// BT.601 luma with round-half-up, computed in integers so the result is exact.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b);
    ((weighted + 500) / 1000) as u8
}

/// Decodes a PNG or PNM file into an 8-bit grayscale raster.
///
/// Colour sources are reduced with [`luma`]; alpha is discarded. Sources with more than
/// 8 bits per sample are rejected rather than truncated.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => {
            return Err(Error::Format(format!(
                "{}: {other:?} is not supported (PNG or PGM only)",
                path.display()
            )))
        }
        None => return Err(Error::Format(format!("{}: unrecognised image format", path.display()))),
    }
    let decoded = reader.decode().map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other}", path.display())),
    })?;
    from_dynamic(decoded).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn from_dynamic(img: DynamicImage) -> Result<GrayImage> {
    let (width, height) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(buf) => buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        other => {
            return Err(Error::Format(format!(
                "only 8-bit samples are supported, found {:?}",
                other.color()
            )))
        }
    };
    GrayImage::new(width, height, data)
}

/// Writes `img` as PNG or binary PGM (P5, maxval 255), chosen by file extension.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let writer = BufWriter::new(file);
    let (w, h) = (img.width as u32, img.height as u32);
    let result = match ext.as_str() {
        "png" => image::codecs::png::PngEncoder::new(writer).write_image(&img.data, w, h, ExtendedColorType::L8),
        "pgm" | "pnm" => PnmEncoder::new(writer)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(&img.data, w, h, ExtendedColorType::L8),
        _ => {
            return Err(Error::Format(format!(
                "{}: output extension must be .png or .pgm",
                path.display()
            )))
        }
    };
    result.map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other}", path.display())),
    })
}

/// 256-bin intensity histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: [u64; LEVELS],
    total: u64,
}

impl Histogram {
    pub fn from_counts(counts: [u64; LEVELS]) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn counts(&self) -> &[u64; LEVELS] {
        &self.counts
    }

    pub fn count(&self, level: usize) -> u64 {
        self.counts[level]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Probability of each level; all zeros for an empty histogram.
    pub fn pdf(&self) -> [f64; LEVELS] {
        let mut pdf = [0.0; LEVELS];
        if self.total > 0 {
            let n = self.total as f64;
            for (p, &c) in pdf.iter_mut().zip(&self.counts) {
                *p = c as f64 / n;
            }
        }
        pdf
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Pixel count and intensity sum over the inclusive range `[lo, hi]`.
    pub fn range_sums(&self, lo: usize, hi: usize) -> (u64, u64) {
        if lo > hi || lo >= LEVELS {
            return (0, 0);
        }
        self.counts[lo..=hi.min(LEVELS - 1)]
            .iter()
            .enumerate()
            .fold((0, 0), |(n, s), (i, &c)| (n + c, s + (lo + i) as u64 * c))
    }

    pub fn mean(&self) -> f64 {
        let (n, s) = self.range_sums(0, LEVELS - 1);
        s as f64 / n as f64
    }
}

pub fn compute_histogram(img: &GrayImage) -> Histogram {
    let mut counts = [0u64; LEVELS];
    for &v in img.pixels() {
        counts[v as usize] += 1;
    }
    Histogram {
        counts,
        total: img.len() as u64,
    }
}

/// Arithmetic mean of the intensities, accumulated exactly in 64-bit integers.
pub fn image_mean(img: &GrayImage) -> f64 {
    let sum: u64 = img.pixels().iter().map(|&v| u64::from(v)).sum();
    sum as f64 / img.len() as f64
}
