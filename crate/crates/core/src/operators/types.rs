use crate::error::{Error, Result};

/// Dense 2-D scalar image stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        let len = height
            .checked_mul(width)
            .ok_or_else(|| Error::invalid("image dimensions overflow"))?;
        if data.len() != len {
            return Err(Error::mismatch(format!(
                "image {height}x{width} needs {len} values, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("image entry {pos}")));
        }
        Ok(Self { height, width, data })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        Self { height, width, data: vec![value; height * width] }
    }

    /// Builds an image from a closure over `(row, col)`.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                data.push(f(i, j));
            }
        }
        Self { height, width, data }
    }

    // Crate-internal constructor for buffers whose shape is already known to be right.
    pub(crate) fn from_raw(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        Self { height, width, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Image {
        Image::from_raw(self.height, self.width, self.data.iter().map(|v| v * factor).collect())
    }

    pub(crate) fn check_same_shape(&self, other: &Image, what: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::mismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }
}

/// Line-integral data, one row per projection angle.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    n_angles: usize,
    n_bins: usize,
    data: Vec<f64>,
}

impl Sinogram {
    pub fn new(n_angles: usize, n_bins: usize, data: Vec<f64>) -> Result<Self> {
        if n_angles == 0 || n_bins == 0 {
            return Err(Error::invalid("sinogram dimensions must be positive"));
        }
        let len = n_angles
            .checked_mul(n_bins)
            .ok_or_else(|| Error::invalid("sinogram dimensions overflow"))?;
        if data.len() != len {
            return Err(Error::mismatch(format!(
                "sinogram {n_angles}x{n_bins} needs {len} values, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sinogram entry {pos}")));
        }
        Ok(Self { n_angles, n_bins, data })
    }

    pub fn zeros(n_angles: usize, n_bins: usize) -> Self {
        assert!(n_angles > 0 && n_bins > 0, "sinogram dimensions must be positive");
        Self { n_angles, n_bins, data: vec![0.0; n_angles * n_bins] }
    }

    pub(crate) fn from_raw(n_angles: usize, n_bins: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n_angles * n_bins);
        Self { n_angles, n_bins, data }
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, angle: usize) -> &[f64] {
        &self.data[angle * self.n_bins..(angle + 1) * self.n_bins]
    }

    pub fn scaled(&self, factor: f64) -> Sinogram {
        Sinogram::from_raw(self.n_angles, self.n_bins, self.data.iter().map(|v| v * factor).collect())
    }
}

/// Number of gradient directions (vertical, horizontal).
pub const GRADIENT_CHANNELS: usize = 2;

/// Two-channel field on the image grid: channel 0 holds vertical
/// differences, channel 1 horizontal ones.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl GradientField {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("field dimensions must be positive"));
        }
        let len = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(GRADIENT_CHANNELS))
            .ok_or_else(|| Error::invalid("field dimensions overflow"))?;
        if data.len() != len {
            return Err(Error::mismatch(format!(
                "gradient field {height}x{width} needs {len} values, got {}",
                data.len()
            )));
        }
        Ok(Self { height, width, data })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self { height, width, data: vec![0.0; GRADIENT_CHANNELS * height * width] }
    }

    pub(crate) fn from_raw(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), GRADIENT_CHANNELS * height * width);
        Self { height, width, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }
}
