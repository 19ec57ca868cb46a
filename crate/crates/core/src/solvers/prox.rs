//! Proximal maps of the two nonsmooth terms.
//!
//! For `f(q) = ‖Λ q‖₁` the conjugate `f*` is the indicator of the box
//! `[-Λ, Λ]`, so `prox_{σ f*}` is a clamp whatever σ is. For the
//! nonnegativity indicator `g`, `prox_{τ g}` is the projection onto the
//! orthant.

use crate::error::{Error, Result};
use crate::lambda::ParamMap;
use crate::operators::{GradientField, Image};

/// In-place clamp of a two-channel field to `[-Λ, Λ]`.
pub(crate) fn clamp_to_box(field: &mut [f64], lam: &ParamMap) {
    let n = lam.height() * lam.width();
    for (d, chunk) in field.chunks_mut(n).enumerate() {
        for (v, bound) in chunk.iter_mut().zip(lam.direction(d)) {
            *v = v.clamp(-bound, *bound);
        }
    }
}

pub fn prox_box_dual(v: &GradientField, lam: &ParamMap) -> Result<GradientField> {
    if v.shape() != lam.shape() {
        return Err(Error::mismatch(format!(
            "field is {}x{}, parameter map is {}x{}",
            v.height(),
            v.width(),
            lam.height(),
            lam.width()
        )));
    }
    let mut out = v.clone();
    clamp_to_box(out.data_mut(), lam);
    Ok(out)
}

pub fn prox_nonneg(v: &Image) -> Image {
    let mut out = v.clone();
    out.data_mut().iter_mut().for_each(|x| *x = x.max(0.0));
    out
}
