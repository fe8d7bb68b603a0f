//! Moment-matching fits of generalized Gaussian (GGD) and asymmetric generalized Gaussian
//! (AGGD) distributions.

use std::sync::OnceLock;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub const SHAPE_MIN: f64 = 0.2;
pub const SHAPE_MAX: f64 = 10.0;
const SHAPE_STEP: f64 = 0.001;
/// Shape reported for degenerate fits.
pub const DEGENERATE_SHAPE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgdParams {
    pub shape: f64,
    pub variance: f64,
    /// Set when the samples carry no spread (all zero) and defaults were returned.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggdParams {
    pub shape: f64,
    pub mean: f64,
    pub left_variance: f64,
    pub right_variance: f64,
    /// Set when one side of the distribution had no samples.
    pub degenerate: bool,
}

struct ShapeTable {
    shapes: Vec<f64>,
    /// `G(1/b) G(3/b) / G(2/b)^2`, strictly decreasing in `b`.
    ratio: Vec<f64>,
    /// `G(2/b)^2 / (G(1/b) G(3/b))`, strictly increasing in `b`.
    inverse_ratio: Vec<f64>,
}

fn table() -> &'static ShapeTable {
    static TABLE: OnceLock<ShapeTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let steps = ((SHAPE_MAX - SHAPE_MIN) / SHAPE_STEP).round() as usize;
        let shapes: Vec<f64> = (0..=steps).map(|i| SHAPE_MIN + i as f64 * SHAPE_STEP).collect();
        let ratio: Vec<f64> = shapes.iter().map(|&b| ggd_ratio(b)).collect();
        let inverse_ratio = ratio.iter().map(|r| 1.0 / r).collect();
        ShapeTable {
            shapes,
            ratio,
            inverse_ratio,
        }
    })
}

/// `G(1/b) G(3/b) / G(2/b)^2`.
pub fn ggd_ratio(shape: f64) -> f64 {
    (ln_gamma(1.0 / shape) + ln_gamma(3.0 / shape) - 2.0 * ln_gamma(2.0 / shape)).exp()
}

/// Index of the value nearest `target` in a monotone table; the first index wins ties.
fn nearest(values: &[f64], target: f64, increasing: bool) -> usize {
    let idx = if increasing {
        values.partition_point(|&v| v < target)
    } else {
        values.partition_point(|&v| v > target)
    };
    match idx {
        0 => 0,
        i if i == values.len() => i - 1,
        i => {
            if (values[i - 1] - target).abs() <= (values[i] - target).abs() {
                i - 1
            } else {
                i
            }
        }
    }
}

fn invert_ratio(target: f64) -> f64 {
    let t = table();
    t.shapes[nearest(&t.ratio, target, false)]
}

fn invert_inverse_ratio(target: f64) -> f64 {
    let t = table();
    t.shapes[nearest(&t.inverse_ratio, target, true)]
}

fn check_samples(samples: &[f64]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Metric("cannot fit a distribution to zero samples".into()));
    }
    Ok(())
}

pub fn fit_ggd(samples: &[f64]) -> Result<GgdParams> {
    check_samples(samples)?;
    let n = samples.len() as f64;
    let variance = samples.iter().map(|x| x * x).sum::<f64>() / n;
    if variance == 0.0 {
        return Ok(GgdParams {
            shape: DEGENERATE_SHAPE,
            variance: 0.0,
            degenerate: true,
        });
    }
    let mean_abs = samples.iter().map(|x| x.abs()).sum::<f64>() / n;
    // E[x^2] / E[|x|]^2 equals the tabulated ratio
    let rho = variance / (mean_abs * mean_abs);
    Ok(GgdParams {
        shape: invert_ratio(rho),
        variance,
        degenerate: false,
    })
}

pub fn fit_aggd(samples: &[f64]) -> Result<AggdParams> {
    check_samples(samples)?;
    let (mut left_sq, mut left_n, mut right_sq, mut right_n) = (0.0, 0usize, 0.0, 0usize);
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for &x in samples {
        if x < 0.0 {
            left_sq += x * x;
            left_n += 1;
        } else if x > 0.0 {
            right_sq += x * x;
            right_n += 1;
        }
        abs_sum += x.abs();
        sq_sum += x * x;
    }
    let left_variance = if left_n > 0 { left_sq / left_n as f64 } else { 0.0 };
    let right_variance = if right_n > 0 { right_sq / right_n as f64 } else { 0.0 };
    if left_n == 0 || right_n == 0 {
        return Ok(AggdParams {
            shape: DEGENERATE_SHAPE,
            mean: 0.0,
            left_variance,
            right_variance,
            degenerate: true,
        });
    }
    let n = samples.len() as f64;
    let (l, r) = (left_variance.sqrt(), right_variance.sqrt());
    let gamma_hat = l / r;
    let r_hat = (abs_sum / n).powi(2) / (sq_sum / n);
    let r_hat_norm = r_hat * (gamma_hat.powi(3) + 1.0) * (gamma_hat + 1.0) / (gamma_hat * gamma_hat + 1.0).powi(2);
    let shape = invert_inverse_ratio(r_hat_norm);
    let mean = (r - l) * (ln_gamma(2.0 / shape) - ln_gamma(1.0 / shape)).exp();
    Ok(AggdParams {
        shape,
        mean,
        left_variance,
        right_variance,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0, 1.0).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    fn laplace(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = rand_distr::Exp::new(1.0).unwrap();
        let coin = rand_distr::Bernoulli::new(0.5).unwrap();
        (0..n)
            .map(|_| {
                let v: f64 = e.sample(&mut rng);
                if coin.sample(&mut rng) {
                    v
                } else {
                    -v
                }
            })
            .collect()
    }

    #[test]
    fn ratio_at_known_shapes() {
        // b = 2: G(1/2) G(3/2) / G(1)^2 = pi / 2
        assert_abs_diff_eq!(ggd_ratio(2.0), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        // b = 1: G(1) G(3) / G(2)^2 = 2
        assert_abs_diff_eq!(ggd_ratio(1.0), 2.0, epsilon = 1e-12);
        let t = table();
        assert!(t.ratio.windows(2).all(|w| w[1] < w[0]));
        assert_abs_diff_eq!(*t.shapes.last().unwrap(), SHAPE_MAX, epsilon = 1e-9);
    }

    #[test]
    fn inversion_matches_exhaustive_scan() {
        let t = table();
        for target in [1.05, 1.3, 1.55, 2.0, 3.7, 10.0, 1e3, 1.0] {
            let mut best = 0;
            for i in 0..t.ratio.len() {
                if (t.ratio[i] - target).abs() < (t.ratio[best] - target).abs() {
                    best = i;
                }
            }
            assert_eq!(invert_ratio(target), t.shapes[best], "target {target}");
            let inv = 1.0 / target;
            let mut best = 0;
            for i in 0..t.inverse_ratio.len() {
                if (t.inverse_ratio[i] - inv).abs() < (t.inverse_ratio[best] - inv).abs() {
                    best = i;
                }
            }
            assert_eq!(invert_inverse_ratio(inv), t.shapes[best], "target {inv}");
        }
    }

    #[test]
    fn ggd_recovers_gaussian_and_laplace() {
        let g = fit_ggd(&gaussian(100_000, 1)).unwrap();
        assert!((g.shape - 2.0).abs() < 0.2, "{g:?}");
        let l = fit_ggd(&laplace(100_000, 2)).unwrap();
        assert!((l.shape - 1.0).abs() < 0.2, "{l:?}");
    }

    #[test]
    fn ggd_variance_is_second_moment() {
        let s = [1.0, -2.0, 0.5, 3.0];
        let g = fit_ggd(&s).unwrap();
        assert_eq!(g.variance, (1.0 + 4.0 + 0.25 + 9.0) / 4.0);
        assert!(!g.degenerate);
    }

    #[test]
    fn degenerate_inputs() {
        let g = fit_ggd(&[0.0; 20]).unwrap();
        assert!(g.degenerate);
        assert_eq!((g.shape, g.variance), (DEGENERATE_SHAPE, 0.0));
        assert!(fit_ggd(&[]).is_err());
        assert!(fit_aggd(&[]).is_err());
        let a = fit_aggd(&[0.0; 20]).unwrap();
        assert!(a.degenerate);
        assert_eq!((a.left_variance, a.right_variance, a.mean), (0.0, 0.0, 0.0));
    }

    #[test]
    fn aggd_symmetric_gaussian() {
        let a = fit_aggd(&gaussian(100_000, 3)).unwrap();
        assert!((a.left_variance / a.right_variance - 1.0).abs() < 0.05, "{a:?}");
        assert!(a.mean.abs() < 0.02, "{a:?}");
        assert!((a.shape - 2.0).abs() < 0.2, "{a:?}");
        let l = fit_aggd(&laplace(100_000, 4)).unwrap();
        assert!((l.shape - 1.0).abs() < 0.2, "{l:?}");
    }

    #[test]
    fn aggd_half_gaussian_has_no_left_side() {
        let half: Vec<f64> = gaussian(10_000, 5).into_iter().map(f64::abs).collect();
        let a = fit_aggd(&half).unwrap();
        assert_eq!(a.left_variance, 0.0);
        assert!(a.degenerate);
    }

    #[test]
    fn aggd_sign_flip_swaps_sides() {
        let mut s = gaussian(5_000, 6);
        s.iter_mut().for_each(|x| {
            if *x > 0.0 {
                *x *= 2.0;
            }
        });
        let a = fit_aggd(&s).unwrap();
        let flipped: Vec<f64> = s.iter().map(|x| -x).collect();
        let b = fit_aggd(&flipped).unwrap();
        assert_eq!(a.left_variance, b.right_variance);
        assert_eq!(a.right_variance, b.left_variance);
        assert_eq!(a.shape, b.shape);
        assert_abs_diff_eq!(a.mean, -b.mean, epsilon = 1e-12);
        assert!(a.mean > 0.0);
    }
}
