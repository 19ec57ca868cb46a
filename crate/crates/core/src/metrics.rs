//! PSNR and SSIM.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::Image;

/// PSNR reported for identical images.
pub const PSNR_CAP_DB: f64 = 100.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
    pub data_range: f64,
}

fn check_inputs(x: &Image, reference: &Image, data_range: f64) -> Result<()> {
    x.check_same_shape(reference, "metric inputs differ in shape")?;
    if !(data_range.is_finite() && data_range > 0.0) {
        return Err(Error::invalid(format!("data_range must be positive, got {data_range}")));
    }
    Ok(())
}

pub fn mse(x: &Image, reference: &Image) -> Result<f64> {
    x.check_same_shape(reference, "metric inputs differ in shape")?;
    Ok(x.data().iter().zip(reference.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / x.len() as f64)
}

/// `10 log10(R² / MSE)`, capped at [`PSNR_CAP_DB`].
pub fn psnr(x: &Image, reference: &Image, data_range: f64) -> Result<f64> {
    check_inputs(x, reference, data_range)?;
    let err = mse(x, reference)?;
    if err == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (data_range * data_range / err).log10()).min(PSNR_CAP_DB))
}

fn gaussian_window() -> Vec<f64> {
    let r = (SSIM_WINDOW / 2) as isize;
    let mut w: Vec<f64> = (-r..=r).map(|k| (-((k * k) as f64) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

// Symmetric (half-sample) reflection: ... b a | a b c ... c b | b ...
fn reflect(idx: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut m = idx.rem_euclid(period);
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}

fn filter2(data: &[f64], h: usize, w: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w {
            tmp[i * w + j] = kernel
                .iter()
                .enumerate()
                .map(|(k, kv)| kv * data[i * w + reflect(j as isize + k as isize - r, w)])
                .sum();
        }
    }
    let mut out = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w {
            out[i * w + j] = kernel
                .iter()
                .enumerate()
                .map(|(k, kv)| kv * tmp[reflect(i as isize + k as isize - r, h) * w + j])
                .sum();
        }
    }
    out
}

/// Mean local SSIM with an 11x11 Gaussian window (σ = 1.5),
/// `K1 = 0.01`, `K2 = 0.03` and symmetric boundary handling.
pub fn ssim(x: &Image, reference: &Image, data_range: f64) -> Result<f64> {
    check_inputs(x, reference, data_range)?;
    let (h, w) = x.shape();
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {h}x{w}"
        )));
    }
    let kernel = gaussian_window();
    let a = x.data();
    let b = reference.data();
    let sq = |v: &[f64]| v.iter().map(|t| t * t).collect::<Vec<_>>();
    let cross: Vec<f64> = a.iter().zip(b).map(|(p, q)| p * q).collect();

    let mu_a = filter2(a, h, w, &kernel);
    let mu_b = filter2(b, h, w, &kernel);
    let e_aa = filter2(&sq(a), h, w, &kernel);
    let e_bb = filter2(&sq(b), h, w, &kernel);
    let e_ab = filter2(&cross, h, w, &kernel);

    let c1 = (SSIM_K1 * data_range).powi(2);
    let c2 = (SSIM_K2 * data_range).powi(2);
    let total: f64 = (0..h * w)
        .map(|k| {
            let (ma, mb) = (mu_a[k], mu_b[k]);
            let var_a = e_aa[k] - ma * ma;
            let var_b = e_bb[k] - mb * mb;
            let cov = e_ab[k] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2))
        })
        .sum();
    Ok(total / (h * w) as f64)
}

pub fn evaluate(x: &Image, reference: &Image, data_range: f64) -> Result<MetricReport> {
    Ok(MetricReport { psnr_db: psnr(x, reference, data_range)?, ssim: ssim(x, reference, data_range)?, data_range })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(seed: u64, n: usize) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(n, n, |_, _| rng.random::<f64>())
    }

    #[test]
    fn psnr_cap_and_offset() {
        let r = random_image(1, 16);
        assert_eq!(psnr(&r, &r, 1.0).unwrap(), PSNR_CAP_DB);
        let shifted = Image::new(16, 16, r.data().iter().map(|v| v + 0.1).collect()).unwrap();
        assert!((psnr(&shifted, &r, 1.0).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn psnr_independent_formula() {
        let a = random_image(2, 20);
        let b = random_image(3, 20);
        let m: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / 400.0;
        let expect = 10.0 * (4.0 / m).log10();
        assert!((psnr(&a, &b, 2.0).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn psnr_errors() {
        let a = Image::zeros(4, 4);
        assert!(psnr(&a, &Image::zeros(4, 5), 1.0).is_err());
        assert!(psnr(&a, &a, 0.0).is_err());
    }

    #[test]
    fn ssim_identity_and_symmetry() {
        let a = random_image(4, 24);
        let b = random_image(5, 24);
        assert_eq!(ssim(&a, &a, 1.0).unwrap(), 1.0);
        assert_eq!(ssim(&a, &b, 1.0).unwrap(), ssim(&b, &a, 1.0).unwrap());
    }

    #[test]
    fn ssim_of_constants_closed_form() {
        let (ca, cb) = (0.3, 0.7);
        let a = Image::filled(16, 16, ca);
        let b = Image::filled(16, 16, cb);
        let c1 = (0.01f64).powi(2);
        let expect = (2.0 * ca * cb + c1) / (ca * ca + cb * cb + c1);
        assert!((ssim(&a, &b, 1.0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn anti_correlated_pattern_is_negative() {
        let checker = |i: usize, j: usize| if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        let reference = Image::from_fn(16, 16, |i, j| 0.5 + 0.4 * checker(i, j));
        let x = Image::from_fn(16, 16, |i, j| 0.5 - 0.4 * checker(i, j));
        let v = ssim(&x, &reference, 1.0).unwrap();
        assert!(v < 0.0, "{v}");
        assert!(v > -1.0);
    }

    #[test]
    fn ssim_window_size_check() {
        let a = Image::zeros(10, 16);
        assert!(ssim(&a, &a, 1.0).is_err());
    }

    #[test]
    fn reflection_indices() {
        assert_eq!(reflect(-1, 4), 0);
        assert_eq!(reflect(-2, 4), 1);
        assert_eq!(reflect(4, 4), 3);
        assert_eq!(reflect(5, 4), 2);
        assert_eq!(reflect(2, 4), 2);
    }
}
