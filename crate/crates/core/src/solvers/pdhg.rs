//! Plain primal-dual hybrid gradient for `min_x ‖Λ∇x‖₁ + I_{x>=0}(x)`.
//! PD3O reduces to this when the smooth term vanishes; it serves as a
//! reference implementation.

use super::prox::clamp_to_box;
use super::StepSizes;
use crate::error::{Error, Result};
use crate::lambda::ParamMap;
use crate::operators::gradient::{grad_adjoint_into, grad_into};
use crate::operators::{GradientField, Image};

pub struct Pdhg<'a> {
    lam: &'a ParamMap,
    steps: StepSizes,
    pub p: Image,
    pub q: GradientField,
    pub x_bar: Image,
    kx: Vec<f64>,
    ktq: Vec<f64>,
}

impl<'a> Pdhg<'a> {
    pub fn new(x0: &Image, lam: &'a ParamMap, steps: StepSizes) -> Result<Self> {
        steps.validate()?;
        if x0.shape() != lam.shape() {
            return Err(Error::mismatch("initial image and parameter map differ in shape"));
        }
        let (h, w) = x0.shape();
        Ok(Self {
            lam,
            steps,
            p: x0.clone(),
            q: GradientField::zeros(h, w),
            x_bar: x0.clone(),
            kx: vec![0.0; 2 * h * w],
            ktq: vec![0.0; h * w],
        })
    }

    pub fn step(&mut self) -> Result<()> {
        let StepSizes { tau, sigma, .. } = self.steps;
        let (h, w) = self.p.shape();
        grad_into(h, w, self.x_bar.data(), &mut self.kx);
        for (q, kx) in self.q.data_mut().iter_mut().zip(&self.kx) {
            *q += sigma * kx;
        }
        clamp_to_box(self.q.data_mut(), self.lam);
        grad_adjoint_into(h, w, self.q.data(), &mut self.ktq);
        for ((xb, p), ktq) in self.x_bar.data_mut().iter_mut().zip(self.p.data_mut()).zip(&self.ktq) {
            let p_new = (*p - tau * ktq).max(0.0);
            *xb = 2.0 * p_new - *p;
            *p = p_new;
        }
        if !self.x_bar.is_finite() {
            return Err(Error::NonFinite("PDHG iterate".into()));
        }
        Ok(())
    }
}

pub fn pdhg_run(x0: &Image, lam: &ParamMap, steps: StepSizes, iters: usize) -> Result<Image> {
    let mut solver = Pdhg::new(x0, lam, steps)?;
    for _ in 0..iters {
        solver.step()?;
    }
    Ok(solver.p)
}
