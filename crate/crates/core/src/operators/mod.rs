//! Linear operators: the parallel-beam projector `A`, the discrete gradient
//! `∇`, their adjoints, and power-iteration norm estimation.

pub mod geometry;
pub mod gradient;
pub mod power;
pub mod projector;
mod types;

pub use geometry::{diagonal_bins, equidistant_angles, Geometry, GeometrySpec, DEFAULT_DOMAIN_WIDTH};
pub use gradient::{div_adjoint, grad, Gradient, GRAD_NORM_SQ_BOUND};
pub use power::{op_norm_power, PowerOptions};
pub use projector::{back_project, forward_project, Projector};
pub use types::{GradientField, Image, Sinogram, GRADIENT_CHANNELS};

/// A real linear map between flat buffers together with its adjoint.
pub trait LinearMap: Sync {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    /// `y = M x`
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// `x = Mᵀ y`
    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]);
}

impl<M: LinearMap + ?Sized> LinearMap for &M {
    fn input_len(&self) -> usize {
        (**self).input_len()
    }
    fn output_len(&self) -> usize {
        (**self).output_len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        (**self).apply_adjoint(y, x)
    }
}

/// Adapter turning a pair of closures into a [`LinearMap`].
pub struct FnMap<F, G> {
    input_len: usize,
    output_len: usize,
    forward: F,
    adjoint: G,
}

impl<F, G> FnMap<F, G>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    pub fn new(input_len: usize, output_len: usize, forward: F, adjoint: G) -> Self {
        Self { input_len, output_len, forward, adjoint }
    }
}

impl<F, G> LinearMap for FnMap<F, G>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    fn input_len(&self) -> usize {
        self.input_len
    }
    fn output_len(&self) -> usize {
        self.output_len
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.forward)(x, y)
    }
    fn apply_adjoint(&self, y: &[f64], x: &mut [f64]) {
        (self.adjoint)(y, x)
    }
}
