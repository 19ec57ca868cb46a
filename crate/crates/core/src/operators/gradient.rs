//! Forward-difference image gradient with Neumann boundary and its adjoint.

use super::{GradientField, Image, LinearMap};

/// Squared operator-norm bound of the 2-D forward-difference gradient.
pub const GRAD_NORM_SQ_BOUND: f64 = 8.0;

pub fn grad_into(height: usize, width: usize, x: &[f64], out: &mut [f64]) {
    let n = height * width;
    debug_assert_eq!(x.len(), n);
    debug_assert_eq!(out.len(), 2 * n);
    let (vert, horiz) = out.split_at_mut(n);
    for i in 0..height {
        let row = i * width;
        for j in 0..width {
            let k = row + j;
            vert[k] = if i + 1 < height { x[k + width] - x[k] } else { 0.0 };
            horiz[k] = if j + 1 < width { x[k + 1] - x[k] } else { 0.0 };
        }
    }
}

/// `∇ᵀ y` (negative divergence). Entries of `y` in the last row of the
/// vertical channel and the last column of the horizontal channel are never
/// produced by [`grad_into`] and do not contribute.
pub fn grad_adjoint_into(height: usize, width: usize, field: &[f64], out: &mut [f64]) {
    let n = height * width;
    debug_assert_eq!(field.len(), 2 * n);
    debug_assert_eq!(out.len(), n);
    let (vert, horiz) = field.split_at(n);
    for i in 0..height {
        let row = i * width;
        for j in 0..width {
            let k = row + j;
            let mut acc = 0.0;
            if i + 1 < height {
                acc -= vert[k];
            }
            if i > 0 {
                acc += vert[k - width];
            }
            if j + 1 < width {
                acc -= horiz[k];
            }
            if j > 0 {
                acc += horiz[k - 1];
            }
            out[k] = acc;
        }
    }
}

pub fn grad(img: &Image) -> GradientField {
    let (h, w) = img.shape();
    let mut out = vec![0.0; 2 * h * w];
    grad_into(h, w, img.data(), &mut out);
    GradientField::from_raw(h, w, out)
}

pub fn div_adjoint(field: &GradientField) -> Image {
    let (h, w) = field.shape();
    let mut out = vec![0.0; h * w];
    grad_adjoint_into(h, w, field.data(), &mut out);
    Image::from_raw(h, w, out)
}

/// The gradient as a [`LinearMap`] on a fixed grid.
#[derive(Clone, Copy, Debug)]
pub struct Gradient {
    pub height: usize,
    pub width: usize,
}

impl Gradient {
    pub fn new(height: usize, width: usize) -> Self {
        Self { height, width }
    }
}

impl LinearMap for Gradient {
    fn input_len(&self) -> usize {
        self.height * self.width
    }

    fn output_len(&self) -> usize {
        2 * self.height * self.width
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        grad_into(self.height, self.width, x, y)
    }

    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        grad_adjoint_into(self.height, self.width, y, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense(h: usize, w: usize) -> Vec<Vec<f64>> {
        // Columns of the gradient matrix, built by applying it to unit vectors.
        let n = h * w;
        (0..n)
            .map(|k| {
                let mut e = vec![0.0; n];
                e[k] = 1.0;
                let mut col = vec![0.0; 2 * n];
                grad_into(h, w, &e, &mut col);
                col
            })
            .collect()
    }

    #[test]
    fn constant_image_has_zero_gradient() {
        let g = grad(&Image::filled(5, 7, 3.25));
        assert!(g.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn ramp_in_columns() {
        let img = Image::from_fn(4, 6, |_, j| j as f64);
        let g = grad(&img);
        assert!(g.channel(0).iter().all(|v| *v == 0.0));
        for i in 0..4 {
            for j in 0..6 {
                let expect = if j == 5 { 0.0 } else { 1.0 };
                assert_eq!(g.channel(1)[i * 6 + j], expect);
            }
        }
    }

    #[test]
    fn zero_field_gives_zero_image() {
        let out = div_adjoint(&GradientField::zeros(3, 3));
        assert!(out.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn adjoint_matches_dense_transpose() {
        let (h, w) = (4, 4);
        let cols = dense(h, w);
        for c in 0..2 {
            for i in 0..h {
                for j in 0..w {
                    let mut field = GradientField::zeros(h, w);
                    let row = c * h * w + i * w + j;
                    field.data_mut()[row] = 1.0;
                    let out = div_adjoint(&field);
                    for (k, col) in cols.iter().enumerate() {
                        assert_eq!(out.data()[k], col[row], "channel {c} ({i},{j}) pixel {k}");
                    }
                }
            }
        }
        // Horizontal unit entry at (1,1) touches pixel (1,1) with -1 and (1,2) with +1.
        let mut field = GradientField::zeros(h, w);
        field.data_mut()[h * w + 5] = 1.0;
        let out = div_adjoint(&field);
        assert_eq!(out.get(1, 1), -1.0);
        assert_eq!(out.get(1, 2), 1.0);
        assert_eq!(out.data().iter().filter(|v| **v != 0.0).count(), 2);
    }

    #[test]
    fn adjoint_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (h, w) = (13, 13);
        for _ in 0..10 {
            let x = Image::from_fn(h, w, |_, _| rng.random::<f64>());
            let y = GradientField::new(h, w, (0..2 * h * w).map(|_| rng.random::<f64>()).collect()).unwrap();
            let lhs: f64 = grad(&x).data().iter().zip(y.data()).map(|(a, b)| a * b).sum();
            let rhs: f64 = x.data().iter().zip(div_adjoint(&y).data()).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn norm_bound_against_dense_operator() {
        // Largest eigenvalue of ∇ᵀ∇ from the assembled 8x8 operator.
        let (h, w) = (8, 8);
        let cols = dense(h, w);
        let n = h * w;
        let gram = nalgebra::DMatrix::from_fn(n, n, |a, b| cols[a].iter().zip(&cols[b]).map(|(p, q)| p * q).sum::<f64>());
        let top = gram.symmetric_eigenvalues().max();
        assert!(top <= GRAD_NORM_SQ_BOUND);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = Image::from_fn(h, w, |_, _| rng.random::<f64>() - 0.5);
            let gx = grad(&x);
            let lhs: f64 = gx.data().iter().map(|v| v * v).sum();
            let rhs: f64 = x.data().iter().map(|v| v * v).sum();
            assert!(lhs <= GRAD_NORM_SQ_BOUND * rhs);
        }
    }
}
