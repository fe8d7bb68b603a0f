//! Mean-subtracted contrast-normalized (MSCN) coefficients and related fields.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Stabilizing constant added to the local deviation, on the 0-255 intensity scale.
pub const MSCN_C: f64 = 1.0;

/// A real-valued raster, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

/// MSCN coefficients of an image.
pub type MscnField = Field;

impl Field {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Metric(format!(
                "{width}x{height} field needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        Ok(Self { width, height, values })
    }

    pub fn from_image(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            values: img.to_f64(),
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Copy of the `w`x`h` window with top-left corner `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Field {
        let mut values = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            values.extend_from_slice(&self.values[y * self.width + x0..y * self.width + x0 + w]);
        }
        Field {
            width: w,
            height: h,
            values,
        }
    }

    /// 2x2 block means; odd trailing rows and columns are dropped.
    pub fn downsample(&self) -> Field {
        let (w, h) = (self.width / 2, self.height / 2);
        let mut values = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let sum = self.at(2 * x, 2 * y)
                    + self.at(2 * x + 1, 2 * y)
                    + self.at(2 * x, 2 * y + 1)
                    + self.at(2 * x + 1, 2 * y + 1);
                values.push(sum / 4.0);
            }
        }
        Field {
            width: w,
            height: h,
            values,
        }
    }
}

/// Normalized separable Gaussian window.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianWindow {
    taps: Vec<f64>,
}

impl GaussianWindow {
    /// `size` taps (odd) with standard deviation `sigma`, normalized to unit sum.
    pub fn new(size: usize, sigma: f64) -> Result<Self> {
        if size.is_multiple_of(2) || sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::Parameter(format!(
                "gaussian window needs an odd size and positive sigma, got {size} and {sigma}"
            )));
        }
        let r = (size / 2) as f64;
        let mut taps: Vec<f64> = (0..size)
            .map(|i| {
                let d = i as f64 - r;
                (-d * d / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let sum: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|t| *t /= sum);
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn radius(&self) -> usize {
        self.taps.len() / 2
    }

    /// Weight of offset `(dx, dy)` in the 2-D window.
    pub fn weight(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius() as isize;
        self.taps[(dx + r) as usize] * self.taps[(dy + r) as usize]
    }

    /// Convolution with symmetric boundary extension (`... b a | a b c ...`).
    pub fn blur(&self, field: &Field) -> Field {
        let (w, h) = (field.width, field.height);
        let r = self.radius() as isize;
        let mut tmp = vec![0.0; w * h];
        for y in 0..h {
            let row = &field.values[y * w..(y + 1) * w];
            for x in 0..w {
                let mut acc = 0.0;
                for (k, t) in self.taps.iter().enumerate() {
                    acc += t * row[reflect(x as isize + k as isize - r, w)];
                }
                tmp[y * w + x] = acc;
            }
        }
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for (k, t) in self.taps.iter().enumerate() {
                let src = reflect(y as isize + k as isize - r, h);
                let src_row = &tmp[src * w..(src + 1) * w];
                let dst_row = &mut out[y * w..(y + 1) * w];
                for (d, s) in dst_row.iter_mut().zip(src_row) {
                    *d += t * s;
                }
            }
        }
        Field {
            width: w,
            height: h,
            values: out,
        }
    }
}

impl Default for GaussianWindow {
    /// 7x7 taps, sigma 7/6.
    fn default() -> Self {
        Self::new(7, 7.0 / 6.0).expect("valid default window")
    }
}

/// Symmetric reflection of an index into `[0, n)`.
#[inline]
pub(crate) fn reflect(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

/// MSCN coefficients together with the local deviation field they were normalized by.
#[derive(Debug, Clone, PartialEq)]
pub struct MscnDecomposition {
    pub coefficients: MscnField,
    pub local_mean: Field,
    pub local_deviation: Field,
}

/// `(I - mu) / (sigma + c)` with `mu = G * I` and `sigma = sqrt(G * (I - mu)^2)`.
pub fn mscn_decompose(field: &Field, c: f64, window: &GaussianWindow) -> MscnDecomposition {
    // Working relative to the global mean keeps flat regions exactly zero; the coefficients
    // themselves are shift-invariant.
    let offset = field.values.iter().sum::<f64>() / field.values.len().max(1) as f64;
    let shifted = Field {
        width: field.width,
        height: field.height,
        values: field.values.iter().map(|v| v - offset).collect(),
    };
    let mu = window.blur(&shifted);
    let centered_sq = Field {
        width: field.width,
        height: field.height,
        values: shifted
            .values
            .iter()
            .zip(&mu.values)
            .map(|(v, m)| (v - m) * (v - m))
            .collect(),
    };
    let sigma_sq = window.blur(&centered_sq);
    let sigma: Vec<f64> = sigma_sq.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    let coefficients = shifted
        .values
        .iter()
        .zip(mu.values.iter().zip(&sigma))
        .map(|(v, (m, s))| (v - m) / (s + c))
        .collect();
    let mu = Field {
        values: mu.values.iter().map(|m| m + offset).collect(),
        ..mu
    };
    MscnDecomposition {
        coefficients: Field {
            width: field.width,
            height: field.height,
            values: coefficients,
        },
        local_mean: mu,
        local_deviation: Field {
            width: field.width,
            height: field.height,
            values: sigma,
        },
    }
}

pub fn mscn(img: &GrayImage, c: f64, window: &GaussianWindow) -> Result<MscnField> {
    if c.is_nan() || c <= 0.0 {
        return Err(Error::Parameter(format!("MSCN constant must be positive, got {c}")));
    }
    Ok(mscn_decompose(&Field::from_image(img), c, window).coefficients)
}

/// Products of each coefficient with its right, lower, lower-right and lower-left neighbour,
/// in that order. Each product field is as large as the overlap of the two shifted copies.
pub fn pairwise_products(f: &Field) -> [Field; 4] {
    let (w, h) = (f.width, f.height);
    let product = |dx: isize, dy: usize| {
        let x_range = if dx >= 0 {
            0..w.saturating_sub(dx as usize)
        } else {
            1..w
        };
        let ph = h.saturating_sub(dy);
        let pw = x_range.len();
        let mut values = Vec::with_capacity(pw * ph);
        for y in 0..ph {
            for x in x_range.clone() {
                let nx = (x as isize + dx) as usize;
                values.push(f.at(x, y) * f.at(nx, y + dy));
            }
        }
        Field {
            width: pw,
            height: ph,
            values,
        }
    };
    [product(1, 0), product(0, 1), product(1, 1), product(-1, 1)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn window_is_normalized_and_symmetric() {
        let w = GaussianWindow::default();
        assert_eq!(w.taps().len(), 7);
        assert_abs_diff_eq!(w.taps().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        let mut total = 0.0;
        for dy in -3..=3 {
            for dx in -3..=3 {
                total += w.weight(dx, dy);
                assert_eq!(w.weight(dx, dy), w.weight(-dx, -dy));
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
        assert!(GaussianWindow::new(6, 1.0).is_err());
    }

    #[test]
    fn reflection() {
        assert_eq!(reflect(-1, 5), 0);
        assert_eq!(reflect(-3, 5), 2);
        assert_eq!(reflect(5, 5), 4);
        assert_eq!(reflect(6, 5), 3);
        assert_eq!(reflect(-4, 2), 0);
        assert_eq!(reflect(3, 1), 0);
    }

    #[test]
    fn constant_image_has_zero_coefficients() {
        let img = GrayImage::filled(12, 9, 140).unwrap();
        let f = mscn(&img, MSCN_C, &GaussianWindow::default()).unwrap();
        assert!(f.values.iter().all(|&v| v.abs() < 1e-12));
    }

    /// Direct 2-D convolution at one site, straight from the definitions.
    #[test]
    fn impulse_centre_matches_direct_sums() {
        let n = 15;
        let c = 7;
        let img = GrayImage::from_fn(n, n, |x, y| if x == c && y == c { 1 } else { 0 }).unwrap();
        let win = GaussianWindow::default();
        let pixel = |x: isize, y: isize| -> f64 {
            let (x, y) = (reflect(x, n), reflect(y, n));
            if x == c && y == c {
                1.0
            } else {
                0.0
            }
        };
        let mean_at = |x: isize, y: isize| -> f64 {
            let mut acc = 0.0;
            for dy in -3..=3 {
                for dx in -3..=3 {
                    acc += win.weight(dx, dy) * pixel(x + dx, y + dy);
                }
            }
            acc
        };
        let (cx, cy) = (c as isize, c as isize);
        let mu0 = mean_at(cx, cy);
        let mut var0 = 0.0;
        for dy in -3..=3isize {
            for dx in -3..=3isize {
                let (x, y) = (reflect(cx + dx, n) as isize, reflect(cy + dy, n) as isize);
                let d = pixel(x, y) - mean_at(x, y);
                var0 += win.weight(dx, dy) * d * d;
            }
        }
        let expected = (1.0 - mu0) / (var0.sqrt() + 1.0);
        let f = mscn(&img, 1.0, &win).unwrap();
        assert_abs_diff_eq!(f.at(c, c), expected, epsilon = 1e-12);
        // the centre tap of the normalized window
        assert_abs_diff_eq!(mu0, win.weight(0, 0), epsilon = 1e-15);
    }

    #[test]
    fn shifting_intensities_leaves_coefficients() {
        let img = GrayImage::from_fn(20, 20, |x, y| ((x * 17 + y * 31) % 90 + 10) as u8).unwrap();
        let shifted = GrayImage::from_fn(20, 20, |x, y| img.get(x, y) + 100).unwrap();
        let win = GaussianWindow::default();
        let a = mscn_decompose(&Field::from_image(&img), 1.0, &win);
        let b = mscn(&shifted, 1.0, &win).unwrap();
        for ((x, y), s) in a
            .coefficients
            .values
            .iter()
            .zip(&b.values)
            .zip(&a.local_deviation.values)
        {
            if *s > 0.0 {
                assert_abs_diff_eq!(x, y, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn products_of_patterns() {
        let ones = Field::new(4, 4, vec![1.0; 16]).unwrap();
        for p in pairwise_products(&ones) {
            assert!(p.values.iter().all(|&v| v == 1.0));
        }
        let alt = Field::new(4, 4, (0..16).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()).unwrap();
        let [h, v, d1, d2] = pairwise_products(&alt);
        assert_eq!((h.width, h.height), (3, 4));
        assert_eq!((v.width, v.height), (4, 3));
        assert_eq!((d1.width, d1.height), (3, 3));
        assert_eq!((d2.width, d2.height), (3, 3));
        assert!(h.values.iter().all(|&x| x == -1.0));
        assert!(v.values.iter().all(|&x| x == 1.0));
        assert!(d1.values.iter().all(|&x| x == -1.0));
        assert!(d2.values.iter().all(|&x| x == -1.0));
        let zero = Field::new(3, 3, vec![0.0; 9]).unwrap();
        assert!(pairwise_products(&zero)
            .iter()
            .all(|p| p.values.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn anti_diagonal_uses_lower_left_neighbour() {
        let f = Field::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let [_, _, d1, d2] = pairwise_products(&f);
        assert_eq!(d1.values, vec![4.0]);
        assert_eq!(d2.values, vec![2.0 * 3.0]);
    }

    #[test]
    fn downsample_drops_odd_edges() {
        let f = Field::new(3, 3, (1..=9).map(f64::from).collect()).unwrap();
        let d = f.downsample();
        assert_eq!((d.width, d.height), (1, 1));
        assert_eq!(d.values, vec![(1.0 + 2.0 + 4.0 + 5.0) / 4.0]);
    }
}
