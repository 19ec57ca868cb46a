use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical width of the reconstruction domain used by the desk-scale
/// presets, in metres (a 26 cm field of view).
pub const DEFAULT_DOMAIN_WIDTH: f64 = 0.26;

/// Parallel-beam acquisition geometry.
///
/// The image occupies a square grid centred on the rotation axis; pixel
/// `(row, col)` has its centre at
/// `x = (col - (W-1)/2) * pixel_spacing`, `y = ((H-1)/2 - row) * pixel_spacing`.
/// Detector bin `b` sits at offset `t = (b - (n_bins-1)/2) * detector_spacing`
/// and measures the line `x cos θ + y sin θ = t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    n_bins: usize,
    height: usize,
    width: usize,
    pixel_spacing: f64,
    detector_spacing: f64,
    angles: Vec<f64>,
}

/// JSON form of [`Geometry`]. Angles default to `n_angles` equidistant
/// values `k π / n_angles` when `angles_deg` is absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub n_angles: usize,
    pub n_bins: usize,
    pub height: usize,
    pub width: usize,
    pub pixel_spacing: f64,
    pub detector_spacing: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles_deg: Option<Vec<f64>>,
}

pub fn equidistant_angles(n_angles: usize) -> Vec<f64> {
    (0..n_angles).map(|k| k as f64 * PI / n_angles as f64).collect()
}

/// Smallest odd bin count covering the image diagonal at unit bin/pixel ratio.
pub fn diagonal_bins(size: usize) -> usize {
    let n = (std::f64::consts::SQRT_2 * size as f64).ceil() as usize;
    if n % 2 == 0 {
        n + 1
    } else {
        n
    }
}

impl Geometry {
    pub fn new(
        height: usize,
        width: usize,
        n_bins: usize,
        pixel_spacing: f64,
        detector_spacing: f64,
        angles: Vec<f64>,
    ) -> Result<Self> {
        if height != width {
            return Err(Error::invalid(format!("only square images are supported, got {height}x{width}")));
        }
        if height < 2 {
            return Err(Error::invalid("image size must be at least 2"));
        }
        if n_bins == 0 {
            return Err(Error::invalid("n_bins must be at least 1"));
        }
        if angles.is_empty() {
            return Err(Error::invalid("at least one projection angle is required"));
        }
        if !(pixel_spacing.is_finite() && pixel_spacing > 0.0) {
            return Err(Error::invalid("pixel_spacing must be positive"));
        }
        if !(detector_spacing.is_finite() && detector_spacing > 0.0) {
            return Err(Error::invalid("detector_spacing must be positive"));
        }
        if angles.iter().any(|a| !a.is_finite() || *a < 0.0 || *a >= PI) {
            return Err(Error::invalid("angles must lie in [0, pi)"));
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("angles must be strictly increasing"));
        }
        Ok(Self { n_bins, height, width, pixel_spacing, detector_spacing, angles })
    }

    /// Square image of `size` pixels over `domain_width`, `n_angles`
    /// equidistant angles in `[0, π)` and detector bins the size of a pixel.
    pub fn parallel(size: usize, n_angles: usize, n_bins: usize, domain_width: f64) -> Result<Self> {
        let spacing = domain_width / size as f64;
        Self::new(size, size, n_bins, spacing, spacing, equidistant_angles(n_angles))
    }

    /// Desk-scale preset: `size`² image over 26 cm, `n_angles` angles and
    /// enough bins to cover the image diagonal.
    pub fn desk(size: usize, n_angles: usize) -> Result<Self> {
        Self::parallel(size, n_angles, diagonal_bins(size), DEFAULT_DOMAIN_WIDTH)
    }

    /// 128x128 image, 180 angles, 183 bins.
    pub fn desk_default() -> Self {
        Self::desk(128, 180).expect("preset geometry is valid")
    }

    pub fn from_spec(spec: &GeometrySpec) -> Result<Self> {
        let angles = match &spec.angles_deg {
            Some(deg) => {
                if deg.len() != spec.n_angles {
                    return Err(Error::invalid(format!(
                        "angles_deg has {} entries, n_angles is {}",
                        deg.len(),
                        spec.n_angles
                    )));
                }
                deg.iter().map(|d| d.to_radians()).collect()
            }
            None => equidistant_angles(spec.n_angles),
        };
        Self::new(spec.height, spec.width, spec.n_bins, spec.pixel_spacing, spec.detector_spacing, angles)
    }

    pub fn to_spec(&self) -> GeometrySpec {
        let angles_deg = if self.angles == equidistant_angles(self.angles.len()) {
            None
        } else {
            Some(self.angles.iter().map(|a| a.to_degrees()).collect())
        };
        GeometrySpec {
            n_angles: self.n_angles(),
            n_bins: self.n_bins,
            height: self.height,
            width: self.width,
            pixel_spacing: self.pixel_spacing,
            detector_spacing: self.detector_spacing,
            angles_deg,
        }
    }

    pub fn n_angles(&self) -> usize {
        self.angles.len()
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn image_shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn image_len(&self) -> usize {
        self.height * self.width
    }

    pub fn sinogram_len(&self) -> usize {
        self.n_angles() * self.n_bins
    }

    pub fn pixel_spacing(&self) -> f64 {
        self.pixel_spacing
    }

    pub fn detector_spacing(&self) -> f64 {
        self.detector_spacing
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Detector coordinate of the centre of bin `b`.
    pub fn bin_offset(&self, b: usize) -> f64 {
        (b as f64 - (self.n_bins as f64 - 1.0) / 2.0) * self.detector_spacing
    }

    /// Physical coordinates of the centre of pixel `(row, col)`.
    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        let x = (col as f64 - (self.width as f64 - 1.0) / 2.0) * self.pixel_spacing;
        let y = ((self.height as f64 - 1.0) / 2.0 - row as f64) * self.pixel_spacing;
        (x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_default_matches_preset() {
        let g = Geometry::desk_default();
        assert_eq!(g.image_shape(), (128, 128));
        assert_eq!(g.n_angles(), 180);
        assert_eq!(g.n_bins(), 183);
        assert!((g.pixel_spacing() - 0.26 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(Geometry::new(4, 5, 7, 1.0, 1.0, vec![0.0]).is_err());
        assert!(Geometry::new(1, 1, 7, 1.0, 1.0, vec![0.0]).is_err());
        assert!(Geometry::new(4, 4, 0, 1.0, 1.0, vec![0.0]).is_err());
        assert!(Geometry::new(4, 4, 7, 1.0, 1.0, vec![0.5, 0.5]).is_err());
        assert!(Geometry::new(4, 4, 7, 1.0, 1.0, vec![PI]).is_err());
        assert!(Geometry::new(4, 4, 7, 0.0, 1.0, vec![0.0]).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let g = Geometry::desk(32, 48).unwrap();
        let json = serde_json::to_string(&g.to_spec()).unwrap();
        assert!(!json.contains("angles_deg"));
        let back = Geometry::from_spec(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(g, back);

        let custom = GeometrySpec { angles_deg: Some(vec![0.0, 30.0, 90.0]), n_angles: 3, ..g.to_spec() };
        let g2 = Geometry::from_spec(&custom).unwrap();
        assert!((g2.angles()[2] - PI / 2.0).abs() < 1e-15);
        let bad = GeometrySpec { angles_deg: Some(vec![0.0]), ..custom };
        assert!(Geometry::from_spec(&bad).is_err());
    }

    #[test]
    fn diagonal_bins_is_odd() {
        assert_eq!(diagonal_bins(128), 183);
        assert_eq!(diagonal_bins(32), 47);
    }
}
