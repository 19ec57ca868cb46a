//! Primal-dual three-operator splitting for
//! `min_x f(∇x) + g(x) + h(x)` with `f = ‖Λ ·‖₁`, `g` the nonnegativity
//! indicator and `h` smooth.
//!
//! One iteration, starting from `p_0 = x̄_0 = x0`, `q_0 = 0`:
//!
//! ```text
//! q_{k+1} = clamp(q_k + σ ∇x̄_k, ±Λ)
//! p_{k+1} = max(p_k - τ ∇h(p_k) - τ ∇ᵀ q_{k+1}, 0)
//! x̄_{k+1} = 2 p_{k+1} - p_k + τ ∇h(p_k) - τ ∇h(p_{k+1})
//! ```
//!
//! `∇h(p_{k+1})` is kept for the next iteration, so each step evaluates the
//! smooth gradient once.

use serde::Serialize;

use super::prox::clamp_to_box;
use super::{SmoothTerm, StepSizes};
use crate::error::{Error, Result};
use crate::lambda::ParamMap;
use crate::operators::gradient::{grad_adjoint_into, grad_into};
use crate::operators::{Geometry, GradientField, Image, Projector, Sinogram};
use crate::physics::{KlFidelity, PhysicsParams};

/// PD3O iterates after `k` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub p: Image,
    pub q: GradientField,
    pub x_bar: Image,
    pub k: usize,
    pub cached_grad_h_p: Image,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub log_every: usize,
    pub objective_trace: Vec<TracePoint>,
    /// `‖p_T - p_{T-1}‖ / ‖p_{T-1}‖` (absolute when `p_{T-1} = 0`).
    pub final_rel_change: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pd3oOptions {
    pub iters: usize,
    /// Objective logging stride; 0 disables the trace.
    pub log_every: usize,
}

impl Pd3oOptions {
    pub fn new(iters: usize) -> Self {
        Self { iters, log_every: 0 }
    }
}

/// `Σ Λ_d |(∇x)_d|` over both directions.
pub fn weighted_tv(x: &Image, lam: &ParamMap) -> f64 {
    let (h, w) = x.shape();
    let mut field = vec![0.0; 2 * h * w];
    grad_into(h, w, x.data(), &mut field);
    field
        .chunks(h * w)
        .enumerate()
        .map(|(d, chunk)| chunk.iter().zip(lam.direction(d)).map(|(g, l)| l * g.abs()).sum::<f64>())
        .sum()
}

pub struct Pd3o<'a, H: SmoothTerm> {
    lam: &'a ParamMap,
    smooth: &'a H,
    steps: StepSizes,
    state: SolverState,
    last_rel_change: f64,
    kx: Vec<f64>,
    ktq: Vec<f64>,
    grad_new: Vec<f64>,
    p_new: Vec<f64>,
}

impl<'a, H: SmoothTerm> Pd3o<'a, H> {
    pub fn new(x0: &Image, lam: &'a ParamMap, smooth: &'a H, steps: StepSizes) -> Result<Self> {
        steps.validate()?;
        if x0.shape() != lam.shape() {
            return Err(Error::mismatch("initial image and parameter map differ in shape"));
        }
        if smooth.len() != x0.len() {
            return Err(Error::mismatch("smooth term does not act on images of this size"));
        }
        if let Some(pos) = x0.data().iter().position(|v| *v < 0.0) {
            return Err(Error::invalid(format!("initial image has negative entry at {pos}")));
        }
        let (h, w) = x0.shape();
        let n = h * w;
        let mut g0 = vec![0.0; n];
        smooth.gradient_into(x0.data(), &mut g0);
        let state = SolverState {
            p: x0.clone(),
            q: GradientField::zeros(h, w),
            x_bar: x0.clone(),
            k: 0,
            cached_grad_h_p: Image::from_raw(h, w, g0),
        };
        Ok(Self {
            lam,
            smooth,
            steps,
            state,
            last_rel_change: 0.0,
            kx: vec![0.0; 2 * n],
            ktq: vec![0.0; n],
            grad_new: vec![0.0; n],
            p_new: vec![0.0; n],
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn into_state(self) -> SolverState {
        self.state
    }

    pub fn objective(&self) -> f64 {
        self.smooth.value(self.state.p.data()) + weighted_tv(&self.state.p, self.lam)
    }

    pub fn step(&mut self) -> Result<()> {
        let StepSizes { tau, sigma, .. } = self.steps;
        let (h, w) = self.state.p.shape();
        let st = &mut self.state;

        grad_into(h, w, st.x_bar.data(), &mut self.kx);
        for (q, kx) in st.q.data_mut().iter_mut().zip(&self.kx) {
            *q += sigma * kx;
        }
        clamp_to_box(st.q.data_mut(), self.lam);

        grad_adjoint_into(h, w, st.q.data(), &mut self.ktq);
        let grad_p = st.cached_grad_h_p.data();
        for (((pn, p), g), ktq) in self.p_new.iter_mut().zip(st.p.data()).zip(grad_p).zip(&self.ktq) {
            *pn = ((p - tau * g) - tau * ktq).max(0.0);
        }

        self.smooth.gradient_into(&self.p_new, &mut self.grad_new);

        let mut diff_sq = 0.0;
        let mut norm_sq = 0.0;
        for ((((xb, pn), p), g), gn) in st
            .x_bar
            .data_mut()
            .iter_mut()
            .zip(&self.p_new)
            .zip(st.p.data())
            .zip(grad_p)
            .zip(&self.grad_new)
        {
            *xb = ((2.0 * pn - p) + tau * g) - tau * gn;
            diff_sq += (pn - p) * (pn - p);
            norm_sq += p * p;
        }
        st.p.data_mut().copy_from_slice(&self.p_new);
        st.cached_grad_h_p.data_mut().copy_from_slice(&self.grad_new);
        st.k += 1;
        self.last_rel_change = if norm_sq > 0.0 { (diff_sq / norm_sq).sqrt() } else { diff_sq.sqrt() };

        if !(self.last_rel_change.is_finite() && st.x_bar.is_finite()) {
            return Err(Error::NonFinite(format!(
                "PD3O iterate at step {} (check step sizes)",
                st.k
            )));
        }
        Ok(())
    }

    /// Runs `opts.iters` further steps and returns the primal iterate.
    pub fn run(mut self, opts: Pd3oOptions) -> Result<(Image, SolveReport)> {
        let mut trace = Vec::new();
        let start = self.state.k;
        if opts.log_every > 0 {
            trace.push(TracePoint { iteration: start, objective: self.objective() });
        }
        for _ in 0..opts.iters {
            self.step()?;
            if opts.log_every > 0 && (self.state.k - start) % opts.log_every == 0 {
                trace.push(TracePoint { iteration: self.state.k, objective: self.objective() });
            }
        }
        let report = SolveReport {
            iterations: opts.iters,
            log_every: opts.log_every,
            objective_trace: trace,
            final_rel_change: self.last_rel_change,
        };
        Ok((self.state.p, report))
    }
}

/// Generic PD3O solve with an arbitrary smooth term.
pub fn pd3o<H: SmoothTerm>(
    x0: &Image,
    lam: &ParamMap,
    smooth: &H,
    steps: StepSizes,
    opts: Pd3oOptions,
) -> Result<(Image, SolveReport)> {
    Pd3o::new(x0, lam, smooth, steps)?.run(opts)
}

/// PD3O for the low-dose CT problem `h(x) = D(Ax, z)` on `geom`.
///
/// Returns `p_T`, which always satisfies the nonnegativity constraint
/// (`x̄_T` need not).
pub fn pd3o_run(
    x0: &Image,
    z: &Sinogram,
    lam: &ParamMap,
    geom: &Geometry,
    params: &PhysicsParams,
    steps: StepSizes,
    opts: Pd3oOptions,
) -> Result<(Image, SolveReport)> {
    if x0.shape() != geom.image_shape() {
        return Err(Error::mismatch("initial image does not match geometry"));
    }
    if (z.n_angles(), z.n_bins()) != (geom.n_angles(), geom.n_bins()) {
        return Err(Error::mismatch("sinogram does not match geometry"));
    }
    let fidelity = KlFidelity::new(Projector::new(geom), z.data(), params)?;
    pd3o(x0, lam, &fidelity, steps, opts)
}
