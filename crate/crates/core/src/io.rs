//! Binary interchange formats and PNG previews.
//!
//! All three array formats share one layout:
//!
//! ```text
//! offset  size  content
//! 0       8     ASCII magic ("PMAP0001", "IMGF0001" or "SNGM0001")
//! 8       4     u32 LE dim0   (height, or n_angles)
//! 12      4     u32 LE dim1   (width, or n_bins)
//! 16      4     u32 LE dim2   (channels; always 1 for IMGF/SNGM)
//! 20      4·N   f32 LE values, channel-major then row-major
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::lambda::ParamMap;
use crate::operators::{Image, Sinogram};

pub const PMAP_MAGIC: &[u8; 8] = b"PMAP0001";
pub const IMGF_MAGIC: &[u8; 8] = b"IMGF0001";
pub const SNGM_MAGIC: &[u8; 8] = b"SNGM0001";

const HEADER_LEN: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct RawArray {
    pub dims: [usize; 3],
    pub values: Vec<f32>,
}

pub fn encode(magic: &[u8; 8], dims: [usize; 3], values: impl IntoIterator<Item = f64>) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(HEADER_LEN);
    out.extend_from_slice(magic);
    for d in dims {
        let d = u32::try_from(d).map_err(|_| Error::invalid(format!("dimension {d} does not fit in u32")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    let mut count = 0usize;
    for v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
        count += 1;
    }
    debug_assert_eq!(count, dims.iter().product::<usize>());
    Ok(out)
}

pub fn decode(bytes: &[u8], magic: &[u8; 8], origin: &Path) -> Result<RawArray> {
    let fail = |reason: String| Error::Format { path: origin.to_path_buf(), reason };
    if bytes.len() < HEADER_LEN {
        return Err(fail(format!("file is {} bytes, shorter than the {HEADER_LEN}-byte header", bytes.len())));
    }
    if &bytes[..8] != magic {
        return Err(fail(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&bytes[..8]),
            String::from_utf8_lossy(magic)
        )));
    }
    let dim = |k: usize| u32::from_le_bytes(bytes[8 + 4 * k..12 + 4 * k].try_into().unwrap()) as usize;
    let dims = [dim(0), dim(1), dim(2)];
    if dims.contains(&0) {
        return Err(fail(format!("zero dimension in {dims:?}")));
    }
    let payload = dims
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(*d))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| fail(format!("dimensions {dims:?} overflow")))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() < payload {
        return Err(fail(format!("truncated payload: {} of {payload} bytes", body.len())));
    }
    if body.len() > payload {
        return Err(fail(format!("{} trailing bytes after payload", body.len() - payload)));
    }
    let values: Vec<f32> = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(fail(format!("non-finite value at index {pos}")));
    }
    Ok(RawArray { dims, values })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn encode_pmap(map: &ParamMap) -> Result<Vec<u8>> {
    encode(PMAP_MAGIC, [map.height(), map.width(), map.channels()], map.data().iter().copied())
}

pub fn decode_pmap(bytes: &[u8], origin: &Path) -> Result<ParamMap> {
    let raw = decode(bytes, PMAP_MAGIC, origin)?;
    let [h, w, c] = raw.dims;
    if let Some(pos) = raw.values.iter().position(|v| *v < 0.0) {
        return Err(Error::Format { path: origin.to_path_buf(), reason: format!("negative weight at index {pos}") });
    }
    ParamMap::new(h, w, c, raw.values.iter().map(|v| *v as f64).collect())
        .map_err(|e| Error::Format { path: origin.to_path_buf(), reason: e.to_string() })
}

pub fn write_pmap(map: &ParamMap, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode_pmap(map)?)
}

pub fn read_pmap(path: impl AsRef<Path>) -> Result<ParamMap> {
    let path = path.as_ref();
    decode_pmap(&read_bytes(path)?, path)
}

fn single_channel(raw: &RawArray, origin: &Path) -> Result<()> {
    if raw.dims[2] != 1 {
        return Err(Error::Format {
            path: origin.to_path_buf(),
            reason: format!("expected 1 channel, got {}", raw.dims[2]),
        });
    }
    Ok(())
}

pub fn write_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    write_bytes(path.as_ref(), &encode(IMGF_MAGIC, [img.height(), img.width(), 1], img.data().iter().copied())?)
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let raw = decode(&read_bytes(path)?, IMGF_MAGIC, path)?;
    single_channel(&raw, path)?;
    Image::new(raw.dims[0], raw.dims[1], raw.values.iter().map(|v| *v as f64).collect())
}

pub fn write_sinogram(sino: &Sinogram, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode(SNGM_MAGIC, [sino.n_angles(), sino.n_bins(), 1], sino.data().iter().copied())?;
    write_bytes(path.as_ref(), &bytes)
}

pub fn read_sinogram(path: impl AsRef<Path>) -> Result<Sinogram> {
    let path = path.as_ref();
    let raw = decode(&read_bytes(path)?, SNGM_MAGIC, path)?;
    single_channel(&raw, path)?;
    Sinogram::new(raw.dims[0], raw.dims[1], raw.values.iter().map(|v| *v as f64).collect())
}

/// 8-bit grayscale PNG with values in `[lo, hi]` mapped linearly to `[0, 255]`.
pub fn write_png(data: &[f64], height: usize, width: usize, window: (f64, f64), path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (lo, hi) = window;
    let span = if hi > lo { hi - lo } else { 1.0 };
    let pixels: Vec<u8> = data
        .iter()
        .map(|v| (((v - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let buf = image::GrayImage::from_raw(width as u32, height as u32, pixels)
        .ok_or_else(|| Error::mismatch("preview buffer size"))?;
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|e| Error::Io {
        path: PathBuf::from(path),
        source: std::io::Error::other(e.to_string()),
    })
}

/// Image preview with the fixed `[0, 1]` window.
pub fn write_image_png(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    write_png(img.data(), img.height(), img.width(), (0.0, 1.0), path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_pmap_layout() {
        let map = ParamMap::new(2, 2, 1, vec![0.5, 1.0, 1.5, 2.0]).unwrap();
        let bytes = encode_pmap(&map).unwrap();
        let mut expect = b"PMAP0001".to_vec();
        for d in [2u32, 2, 1] {
            expect.extend_from_slice(&d.to_le_bytes());
        }
        // 0.5, 1.0, 1.5, 2.0 as IEEE-754 single precision bit patterns.
        for bits in [0x3F00_0000u32, 0x3F80_0000, 0x3FC0_0000, 0x4000_0000] {
            expect.extend_from_slice(&bits.to_le_bytes());
        }
        assert_eq!(bytes.len(), 36);
        assert_eq!(bytes, expect);
    }

    #[test]
    fn rejects_bad_magic() {
        let map = ParamMap::new(1, 1, 1, vec![1.0]).unwrap();
        let mut bytes = encode_pmap(&map).unwrap();
        bytes[..8].copy_from_slice(b"XXXX0001");
        let err = decode_pmap(&bytes, Path::new("m.pmap")).unwrap_err();
        assert!(err.to_string().contains("bad magic"), "{err}");
    }

    #[test]
    fn rejects_truncated_and_trailing() {
        let map = ParamMap::new(2, 2, 2, vec![1.0; 8]).unwrap();
        let bytes = encode_pmap(&map).unwrap();
        assert!(decode_pmap(&bytes[..bytes.len() - 1], Path::new("t")).unwrap_err().to_string().contains("truncated"));
        assert!(decode_pmap(&bytes[..10], Path::new("t")).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(decode_pmap(&long, Path::new("t")).is_err());
    }

    #[test]
    fn rejects_negative_and_nonfinite() {
        let mut bytes = encode(PMAP_MAGIC, [1, 2, 1], [1.0, -0.5]).unwrap();
        assert!(decode_pmap(&bytes, Path::new("n")).unwrap_err().to_string().contains("negative"));
        bytes = encode(PMAP_MAGIC, [1, 2, 1], [1.0, f64::INFINITY]).unwrap();
        assert!(decode_pmap(&bytes, Path::new("n")).is_err());
    }

    #[test]
    fn rejects_dimension_overflow() {
        let mut bytes = PMAP_MAGIC.to_vec();
        for d in [u32::MAX, u32::MAX, 2] {
            bytes.extend_from_slice(&d.to_le_bytes());
        }
        bytes.extend_from_slice(&[0u8; 16]);
        assert!(decode_pmap(&bytes, Path::new("o")).is_err());
    }

    #[test]
    fn rejects_wrong_channel_count_for_maps() {
        let bytes = encode(PMAP_MAGIC, [1, 1, 3], [1.0, 1.0, 1.0]).unwrap();
        assert!(decode_pmap(&bytes, Path::new("c")).is_err());
    }
}
