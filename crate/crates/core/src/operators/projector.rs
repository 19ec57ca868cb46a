//! Ray-driven parallel-beam projector with linear (Joseph) interpolation.
//!
//! Each ray is sampled once per column (for rays closer to horizontal) or once
//! per row (otherwise); the sample is linearly interpolated between the two
//! neighbouring pixels across the minor axis and weighted by the path length
//! through one pixel slab, `pixel_spacing / max(|sin θ|, |cos θ|)`.
//!
//! The weights are traced once and stored per ray; the back projector
//! scatters exactly the stored weights, so the pair is an algebraic transpose.

use std::sync::Arc;

use rayon::prelude::*;

use super::{Geometry, Image, LinearMap, Sinogram};
use crate::error::{Error, Result};

/// Angles per partial image in the back projector. Fixed so the summation
/// order does not depend on the thread count.
const ANGLE_BLOCK: usize = 8;

/// Sparse rows of the system matrix, one row per ray in sinogram order.
#[derive(Debug)]
struct RayTable {
    offsets: Vec<usize>,
    pixels: Vec<u32>,
    weights: Vec<f64>,
}

impl RayTable {
    fn ray(&self, r: usize) -> (&[u32], &[f64]) {
        let span = self.offsets[r]..self.offsets[r + 1];
        (&self.pixels[span.clone()], &self.weights[span])
    }
}

/// Cloning is cheap; the traced weights are shared.
#[derive(Clone, Debug)]
pub struct Projector {
    geom: Geometry,
    trig: Vec<(f64, f64)>,
    table: Arc<RayTable>,
}

impl Projector {
    pub fn new(geom: &Geometry) -> Self {
        let trig = geom.angles().iter().map(|a| (a.cos(), a.sin())).collect();
        let mut p = Self {
            geom: geom.clone(),
            trig,
            table: Arc::new(RayTable { offsets: Vec::new(), pixels: Vec::new(), weights: Vec::new() }),
        };
        p.table = Arc::new(p.build_table());
        p
    }

    fn build_table(&self) -> RayTable {
        assert!(self.geom.image_len() <= u32::MAX as usize, "image too large for the ray table");
        let nb = self.geom.n_bins();
        let n_rays = self.geom.sinogram_len();
        let mut offsets = Vec::with_capacity(n_rays + 1);
        let mut pixels = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for r in 0..n_rays {
            self.trace_ray(r / nb, r % nb, |idx, wgt| {
                if wgt != 0.0 {
                    pixels.push(idx as u32);
                    weights.push(wgt);
                }
            });
            offsets.push(pixels.len());
        }
        RayTable { offsets, pixels, weights }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    /// Calls `visit(pixel_index, weight)` for every pixel touched by ray
    /// `(angle, bin)`.
    #[inline]
    pub fn trace_ray(&self, angle: usize, bin: usize, mut visit: impl FnMut(usize, f64)) {
        let g = &self.geom;
        let (h, w) = (g.height(), g.width());
        let ps = g.pixel_spacing();
        let (c, s) = self.trig[angle];
        let t = g.bin_offset(bin);
        let cy = (h as f64 - 1.0) / 2.0;
        let cx = (w as f64 - 1.0) / 2.0;

        if s.abs() >= c.abs() {
            // One sample per column; fractional row index is affine in col.
            let weight = ps / s.abs();
            let r0 = cy - t / (s * ps);
            let dr = c / s;
            for j in 0..w {
                let r = r0 + (j as f64 - cx) * dr;
                let fl = r.floor();
                if fl < -1.0 || fl >= h as f64 {
                    continue;
                }
                let frac = r - fl;
                let i0 = fl as isize;
                if i0 >= 0 {
                    visit(i0 as usize * w + j, weight * (1.0 - frac));
                }
                if i0 + 1 < h as isize {
                    visit((i0 + 1) as usize * w + j, weight * frac);
                }
            }
        } else {
            // One sample per row; fractional column index is affine in row.
            let weight = ps / c.abs();
            let q0 = cx + t / (c * ps);
            let dq = s / c;
            for i in 0..h {
                let q = q0 + (i as f64 - cy) * dq;
                let fl = q.floor();
                if fl < -1.0 || fl >= w as f64 {
                    continue;
                }
                let frac = q - fl;
                let j0 = fl as isize;
                if j0 >= 0 {
                    visit(i * w + j0 as usize, weight * (1.0 - frac));
                }
                if j0 + 1 < w as isize {
                    visit(i * w + (j0 + 1) as usize, weight * frac);
                }
            }
        }
    }

    pub fn forward_into(&self, image: &[f64], sino: &mut [f64]) {
        let nb = self.geom.n_bins();
        assert_eq!(image.len(), self.geom.image_len());
        assert_eq!(sino.len(), self.geom.sinogram_len());
        sino.par_chunks_mut(nb).enumerate().for_each(|(a, row)| {
            for (b, out) in row.iter_mut().enumerate() {
                let (pix, wgt) = self.table.ray(a * nb + b);
                *out = pix.iter().zip(wgt).map(|(&i, &w)| w * image[i as usize]).sum();
            }
        });
    }

    pub fn back_into(&self, sino: &[f64], image: &mut [f64]) {
        let nb = self.geom.n_bins();
        let n = self.geom.image_len();
        assert_eq!(image.len(), n);
        assert_eq!(sino.len(), self.geom.sinogram_len());
        let n_angles = self.geom.n_angles();
        let partials: Vec<Vec<f64>> = (0..n_angles.div_ceil(ANGLE_BLOCK))
            .into_par_iter()
            .map(|blk| {
                let mut part = vec![0.0; n];
                let end = ((blk + 1) * ANGLE_BLOCK).min(n_angles);
                for a in blk * ANGLE_BLOCK..end {
                    for b in 0..nb {
                        let v = sino[a * nb + b];
                        if v != 0.0 {
                            let (pix, wgt) = self.table.ray(a * nb + b);
                            for (&i, &w) in pix.iter().zip(wgt) {
                                part[i as usize] += w * v;
                            }
                        }
                    }
                }
                part
            })
            .collect();
        image.iter_mut().for_each(|v| *v = 0.0);
        for part in &partials {
            for (dst, src) in image.iter_mut().zip(part) {
                *dst += src;
            }
        }
    }

    pub fn forward(&self, img: &Image) -> Result<Sinogram> {
        if img.shape() != self.geom.image_shape() {
            return Err(Error::mismatch(format!(
                "image is {}x{}, geometry expects {}x{}",
                img.height(),
                img.width(),
                self.geom.height(),
                self.geom.width()
            )));
        }
        let mut out = vec![0.0; self.geom.sinogram_len()];
        self.forward_into(img.data(), &mut out);
        Ok(Sinogram::from_raw(self.geom.n_angles(), self.geom.n_bins(), out))
    }

    pub fn back(&self, sino: &Sinogram) -> Result<Image> {
        if (sino.n_angles(), sino.n_bins()) != (self.geom.n_angles(), self.geom.n_bins()) {
            return Err(Error::mismatch(format!(
                "sinogram is {}x{}, geometry expects {}x{}",
                sino.n_angles(),
                sino.n_bins(),
                self.geom.n_angles(),
                self.geom.n_bins()
            )));
        }
        let mut out = vec![0.0; self.geom.image_len()];
        self.back_into(sino.data(), &mut out);
        Ok(Image::from_raw(self.geom.height(), self.geom.width(), out))
    }
}

impl LinearMap for Projector {
    fn input_len(&self) -> usize {
        self.geom.image_len()
    }

    fn output_len(&self) -> usize {
        self.geom.sinogram_len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.forward_into(x, y)
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        self.back_into(y, x)
    }
}

/// Discrete Radon transform `A x`.
pub fn forward_project(img: &Image, geom: &Geometry) -> Result<Sinogram> {
    Projector::new(geom).forward(img)
}

/// Exact transpose `Aᵀ y` of [`forward_project`].
pub fn back_project(sino: &Sinogram, geom: &Geometry) -> Result<Image> {
    Projector::new(geom).back(sino)
}
