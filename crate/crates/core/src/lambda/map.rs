use crate::error::{Error, Result};
use crate::operators::GRADIENT_CHANNELS;

/// Per-pixel, per-direction nonnegative TV weights.
///
/// A one-channel map is shared by both gradient directions; a two-channel map
/// stores the vertical weights first, then the horizontal ones.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamMap {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ParamMap {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if !(channels == 1 || channels == GRADIENT_CHANNELS) {
            return Err(Error::invalid(format!("parameter map must have 1 or 2 channels, got {channels}")));
        }
        if height == 0 || width == 0 {
            return Err(Error::invalid("parameter map dimensions must be positive"));
        }
        let len = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::invalid("parameter map dimensions overflow"))?;
        if data.len() != len {
            return Err(Error::mismatch(format!(
                "parameter map {channels}x{height}x{width} needs {len} values, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter map entry {pos}")));
        }
        if let Some(pos) = data.iter().position(|v| *v < 0.0) {
            return Err(Error::invalid(format!("parameter map entry {pos} is negative ({})", data[pos])));
        }
        Ok(Self { height, width, channels, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Weights applied to gradient direction `direction` (0 vertical,
    /// 1 horizontal), broadcasting a one-channel map.
    pub fn direction(&self, direction: usize) -> &[f64] {
        assert!(direction < GRADIENT_CHANNELS);
        let n = self.height * self.width;
        let c = if self.channels == 1 { 0 } else { direction };
        &self.data[c * n..(c + 1) * n]
    }

    /// Equivalent two-channel map.
    pub fn to_two_channel(&self) -> ParamMap {
        let mut data = Vec::with_capacity(GRADIENT_CHANNELS * self.height * self.width);
        for d in 0..GRADIENT_CHANNELS {
            data.extend_from_slice(self.direction(d));
        }
        ParamMap { height: self.height, width: self.width, channels: GRADIENT_CHANNELS, data }
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ParamMap::new(2, 2, 3, vec![0.0; 12]).is_err());
        assert!(ParamMap::new(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(ParamMap::new(2, 2, 1, vec![0.0, 1.0, -0.5, 1.0]).is_err());
        assert!(ParamMap::new(2, 2, 1, vec![0.0, 1.0, f64::NAN, 1.0]).is_err());
        assert!(ParamMap::new(2, 2, 2, vec![0.5; 8]).is_ok());
    }

    #[test]
    fn broadcast_of_single_channel() {
        let m = ParamMap::new(1, 3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.direction(0), m.direction(1));
        let two = m.to_two_channel();
        assert_eq!(two.channels(), 2);
        assert_eq!(two.data(), &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
    }
}
