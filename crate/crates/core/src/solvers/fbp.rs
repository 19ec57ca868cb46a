//! Filtered back projection.
//!
//! Each projection row is convolved with the band-limited ramp kernel
//! (`h[0] = 1/(4 d²)`, `h[n] = -1/(π² n² d²)` for odd `n`, 0 otherwise) via a
//! zero-padded FFT, optionally apodized with a Hann window, then smeared back
//! over the image with linear interpolation on the detector and weighted by
//! `π / n_angles`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{Geometry, Image, Sinogram};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    #[default]
    #[value(name = "ramlak")]
    RamLak,
    Hann,
}

/// Frequency response of the filter on a padded grid of `len` samples.
fn filter_response(kind: FilterKind, n_bins: usize, spacing: f64, len: usize) -> Vec<f64> {
    let mut kernel = vec![Complex::new(0.0, 0.0); len];
    let d2 = spacing * spacing;
    kernel[0].re = 1.0 / (4.0 * d2);
    for n in (1..n_bins).step_by(2) {
        let v = -1.0 / (PI * PI * (n * n) as f64 * d2);
        kernel[n].re = v;
        kernel[len - n].re = v;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut kernel);
    kernel
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let window = match kind {
                FilterKind::RamLak => 1.0,
                FilterKind::Hann => {
                    // Normalized frequency in [0, 1] up to Nyquist.
                    let f = k.min(len - k) as f64 / (len as f64 / 2.0);
                    0.5 * (1.0 + (PI * f).cos())
                }
            };
            c.re * window
        })
        .collect()
}

/// Ramp-filters every projection row; result is in image units per length.
pub fn filter_sinogram(z: &Sinogram, geom: &Geometry, kind: FilterKind) -> Result<Sinogram> {
    let nb = z.n_bins();
    let len = (2 * nb).next_power_of_two();
    let ds = geom.detector_spacing();
    let response = filter_response(kind, nb, ds, len);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);

    let mut out = vec![0.0; z.len()];
    out.par_chunks_mut(nb).enumerate().for_each(|(a, dst)| {
        let mut buf: Vec<Complex<f64>> = z.row(a).iter().map(|v| Complex::new(*v, 0.0)).collect();
        buf.resize(len, Complex::new(0.0, 0.0));
        fwd.process(&mut buf);
        buf.iter_mut().zip(&response).for_each(|(b, r)| *b *= r);
        inv.process(&mut buf);
        // Inverse FFT is unnormalized; the convolution sum carries a factor ds.
        let scale = ds / len as f64;
        dst.iter_mut().zip(&buf).for_each(|(d, b)| *d = b.re * scale);
    });
    Ok(Sinogram::from_raw(z.n_angles(), nb, out))
}

/// Pixel-driven back projection with linear interpolation on the detector.
fn smear(filtered: &Sinogram, geom: &Geometry) -> Image {
    let (h, w) = geom.image_shape();
    let nb = geom.n_bins();
    let ds = geom.detector_spacing();
    let centre = (nb as f64 - 1.0) / 2.0;
    let trig: Vec<(f64, f64)> = geom.angles().iter().map(|a| (a.cos(), a.sin())).collect();
    let mut data = vec![0.0; h * w];
    data.par_chunks_mut(w).enumerate().for_each(|(i, row)| {
        for (j, out) in row.iter_mut().enumerate() {
            let (x, y) = geom.pixel_center(i, j);
            let mut acc = 0.0;
            for (a, (c, s)) in trig.iter().enumerate() {
                let u = (x * c + y * s) / ds + centre;
                let fl = u.floor();
                if fl < -1.0 || fl >= nb as f64 {
                    continue;
                }
                let frac = u - fl;
                let b0 = fl as isize;
                let proj = filtered.row(a);
                if b0 >= 0 {
                    acc += (1.0 - frac) * proj[b0 as usize];
                }
                if b0 + 1 < nb as isize {
                    acc += frac * proj[(b0 + 1) as usize];
                }
            }
            *out = acc;
        }
    });
    Image::from_raw(h, w, data)
}

pub fn fbp_reconstruct(z: &Sinogram, geom: &Geometry, kind: FilterKind) -> Result<Image> {
    if (z.n_angles(), z.n_bins()) != (geom.n_angles(), geom.n_bins()) {
        return Err(Error::mismatch("sinogram does not match geometry"));
    }
    if geom.n_angles() < 2 {
        return Err(Error::invalid("filtered back projection needs at least 2 angles"));
    }
    if !z.data().iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("sinogram passed to FBP".into()));
    }
    let filtered = filter_sinogram(z, geom, kind)?;
    let img = smear(&filtered, geom);
    Ok(img.scaled(PI / geom.n_angles() as f64))
}
