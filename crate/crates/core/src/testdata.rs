//! Synthetic phantoms on the square `[-1, 1]²`.
//!
//! Pixels are area-averaged over a 4x4 sub-grid; the summed ellipse
//! intensities are clipped to `[0, 1]` at every sub-sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Image;

const SUPERSAMPLE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipseSpec {
    pub center: (f64, f64),
    pub semi_axes: (f64, f64),
    /// Counter-clockwise rotation in radians.
    pub rotation: f64,
    pub intensity: f64,
}

impl EllipseSpec {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let (s, c) = self.rotation.sin_cos();
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        (u / self.semi_axes.0).powi(2) + (v / self.semi_axes.1).powi(2) <= 1.0
    }
}

pub fn render_ellipses(size: usize, ellipses: &[EllipseSpec]) -> Result<Image> {
    if size == 0 {
        return Err(Error::invalid("phantom size must be positive"));
    }
    if let Some(e) = ellipses.iter().find(|e| !(e.semi_axes.0 > 0.0 && e.semi_axes.1 > 0.0)) {
        return Err(Error::invalid(format!("ellipse semi-axes must be positive, got {:?}", e.semi_axes)));
    }
    let n = size as f64;
    let sub = SUPERSAMPLE as f64;
    Ok(Image::from_fn(size, size, |i, j| {
        let mut acc = 0.0;
        for si in 0..SUPERSAMPLE {
            for sj in 0..SUPERSAMPLE {
                let x = -1.0 + 2.0 * (j as f64 + (sj as f64 + 0.5) / sub) / n;
                let y = 1.0 - 2.0 * (i as f64 + (si as f64 + 0.5) / sub) / n;
                let v: f64 = ellipses.iter().filter(|e| e.contains(x, y)).map(|e| e.intensity).sum();
                acc += v.clamp(0.0, 1.0);
            }
        }
        acc / (sub * sub)
    }))
}

/// Modified (high-contrast) Shepp-Logan head phantom, `(x0, y0, a, b, φ°, intensity)`.
const SHEPP_LOGAN: [(f64, f64, f64, f64, f64, f64); 10] = [
    (0.0, 0.0, 0.69, 0.92, 0.0, 1.0),
    (0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8),
    (0.22, 0.0, 0.11, 0.31, -18.0, -0.2),
    (-0.22, 0.0, 0.16, 0.41, 18.0, -0.2),
    (0.0, 0.35, 0.21, 0.25, 0.0, 0.1),
    (0.0, 0.1, 0.046, 0.046, 0.0, 0.1),
    (0.0, -0.1, 0.046, 0.046, 0.0, 0.1),
    (-0.08, -0.605, 0.046, 0.023, 0.0, 0.1),
    (0.0, -0.606, 0.023, 0.023, 0.0, 0.1),
    (0.06, -0.605, 0.023, 0.046, 0.0, 0.1),
];

pub fn shepp_logan_ellipses() -> Vec<EllipseSpec> {
    SHEPP_LOGAN
        .iter()
        .map(|&(x0, y0, a, b, phi, intensity)| EllipseSpec {
            center: (x0, y0),
            semi_axes: (a, b),
            rotation: phi.to_radians(),
            intensity,
        })
        .collect()
}

pub fn shepp_logan(size: usize) -> Result<Image> {
    if size < 16 {
        return Err(Error::invalid(format!("Shepp-Logan phantom needs size >= 16, got {size}")));
    }
    render_ellipses(size, &shepp_logan_ellipses())
}

/// Sampling ranges for [`random_ellipses_with`]. Defaults keep every ellipse
/// inside the unit disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipseRanges {
    pub center_max: f64,
    pub semi_axis: (f64, f64),
    pub intensity: (f64, f64),
}

impl Default for EllipseRanges {
    fn default() -> Self {
        Self { center_max: 0.5, semi_axis: (0.1, 0.5), intensity: (0.1, 0.5) }
    }
}

pub fn random_ellipse_specs(n_ellipses: usize, seed: u64, ranges: &EllipseRanges) -> Vec<EllipseSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
    (0..n_ellipses)
        .map(|_| {
            let center = (
                uniform(-ranges.center_max, ranges.center_max),
                uniform(-ranges.center_max, ranges.center_max),
            );
            let semi_axes = (
                uniform(ranges.semi_axis.0, ranges.semi_axis.1),
                uniform(ranges.semi_axis.0, ranges.semi_axis.1),
            );
            let rotation = uniform(0.0, std::f64::consts::PI);
            let intensity = uniform(ranges.intensity.0, ranges.intensity.1);
            EllipseSpec { center, semi_axes, rotation, intensity }
        })
        .collect()
}

pub fn random_ellipses_with(size: usize, n_ellipses: usize, seed: u64, ranges: &EllipseRanges) -> Result<Image> {
    if n_ellipses == 0 {
        return Err(Error::invalid("random phantom needs at least one ellipse"));
    }
    if !(ranges.semi_axis.0 > 0.0 && ranges.semi_axis.1 >= ranges.semi_axis.0) {
        return Err(Error::invalid("semi-axis range must be positive and ordered"));
    }
    render_ellipses(size, &random_ellipse_specs(n_ellipses, seed, ranges))
}

pub fn random_ellipses(size: usize, n_ellipses: usize, seed: u64) -> Result<Image> {
    random_ellipses_with(size, n_ellipses, seed, &EllipseRanges::default())
}
