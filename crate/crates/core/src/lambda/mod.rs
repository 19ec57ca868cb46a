//! Regularization parameter-maps: constant and edge-adaptive constructors,
//! and PSNR-driven grid search for the best scalar weight.

mod grid_search;
mod map;

pub use grid_search::{grid_search_lambda, log_spaced, GridPoint, GridSearchOptions, GridSearchResult};
pub use map::ParamMap;

use crate::error::{Error, Result};
use crate::operators::{grad, Image};

/// Constant one-channel map.
pub fn scalar_map(lam: f64, height: usize, width: usize) -> Result<ParamMap> {
    if !(lam.is_finite() && lam >= 0.0) {
        return Err(Error::invalid(format!("lambda must be finite and nonnegative, got {lam}")));
    }
    ParamMap::new(height, width, 1, vec![lam; height * width])
}

/// Heuristic edge-aware map `Λ = lam_max / (1 + beta |∂(G_σ * x_ref)|)`.
///
/// Each gradient direction gets its own channel, so weights drop only across
/// edges in that direction. Entries lie in `(0, lam_max]`.
pub fn edge_adaptive_map(x_ref: &Image, lam_max: f64, beta: f64, smooth_sigma: f64) -> Result<ParamMap> {
    if !(lam_max.is_finite() && lam_max > 0.0) {
        return Err(Error::invalid(format!("lam_max must be positive, got {lam_max}")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::invalid(format!("beta must be nonnegative, got {beta}")));
    }
    if !(smooth_sigma.is_finite() && smooth_sigma >= 0.0) {
        return Err(Error::invalid(format!("smooth_sigma must be nonnegative, got {smooth_sigma}")));
    }
    if !x_ref.is_finite() {
        return Err(Error::NonFinite("reference image for edge-adaptive map".into()));
    }
    let smoothed = gaussian_smooth(x_ref, smooth_sigma);
    let g = grad(&smoothed);
    let data = g.data().iter().map(|d| lam_max / (1.0 + beta * d.abs())).collect();
    ParamMap::new(x_ref.height(), x_ref.width(), 2, data)
}

/// Separable Gaussian blur, truncated at 4σ, replicate boundary.
pub(crate) fn gaussian_smooth(img: &Image, sigma: f64) -> Image {
    if sigma == 0.0 {
        return img.clone();
    }
    let radius = (4.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius).map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let (h, w) = img.shape();
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; h * w];
    for i in 0..h {
        for j in 0..w {
            tmp[i * w + j] = kernel
                .iter()
                .enumerate()
                .map(|(k, kv)| kv * img.get(i, clamp(j as isize + k as isize - radius, w)))
                .sum();
        }
    }
    Image::from_fn(h, w, |i, j| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, kv)| kv * tmp[clamp(i as isize + k as isize - radius, h) * w + j])
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_maps() {
        let zero = scalar_map(0.0, 3, 3).unwrap();
        assert!(zero.data().iter().all(|v| *v == 0.0));
        let half = scalar_map(0.5, 4, 4).unwrap();
        assert_eq!(half.data().len(), 16);
        assert!(half.data().iter().all(|v| *v == 0.5));
        assert!(scalar_map(-1.0, 2, 2).is_err());
    }

    #[test]
    fn constant_reference_gives_lam_max() {
        let m = edge_adaptive_map(&Image::filled(6, 6, 0.4), 2.0, 50.0, 1.0).unwrap();
        assert!(m.data().iter().all(|v| (*v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn zero_beta_is_scalar() {
        let x = Image::from_fn(8, 8, |i, j| ((i * j) % 5) as f64 / 4.0);
        let m = edge_adaptive_map(&x, 0.7, 0.0, 1.5).unwrap();
        assert_eq!(m, scalar_map(0.7, 8, 8).unwrap().to_two_channel());
    }

    #[test]
    fn step_edge_lowers_weights_on_edge() {
        let n = 32;
        let x = Image::from_fn(n, n, |_, j| if j >= n / 2 { 1.0 } else { 0.0 });
        let lam_max = 1.0;
        let m = edge_adaptive_map(&x, lam_max, 20.0, 1.0).unwrap();
        let horiz = m.direction(1);
        let (argmin, min) = horiz
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, v)| if *v < acc.1 { (k, *v) } else { acc });
        // Forward difference across the edge sits on column n/2 - 1.
        assert_eq!(argmin % n, n / 2 - 1);
        assert!(min < 0.5 * lam_max);
        for i in 0..n {
            for j in (0..n).filter(|j| (*j as isize - n as isize / 2).abs() >= 6) {
                assert!(horiz[i * n + j] > 0.9 * lam_max);
            }
        }
        assert!(m.direction(0).iter().all(|v| (*v - lam_max).abs() < 1e-12));
        assert!(m.min_value() > 0.0 && m.max_value() <= lam_max);
    }

    #[test]
    fn rejects_bad_arguments() {
        let x = Image::zeros(4, 4);
        assert!(edge_adaptive_map(&x, 0.0, 1.0, 1.0).is_err());
        assert!(edge_adaptive_map(&x, 1.0, -1.0, 1.0).is_err());
        assert!(edge_adaptive_map(&x, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn smoothing_preserves_constants() {
        let s = gaussian_smooth(&Image::filled(5, 5, 2.0), 1.3);
        assert!(s.data().iter().all(|v| (v - 2.0).abs() < 1e-12));
    }
}
