//! Reconstruction algorithms: PD3O (the workhorse), a reference PDHG, and
//! filtered back projection.

pub mod fbp;
pub mod pd3o;
pub mod pdhg;
pub mod prox;
mod steps;

pub use fbp::{fbp_reconstruct, filter_sinogram, FilterKind};
pub use pd3o::{pd3o, pd3o_run, weighted_tv, Pd3o, Pd3oOptions, SolveReport, SolverState, TracePoint};
pub use pdhg::{pdhg_run, Pdhg};
pub use prox::{prox_box_dual, prox_nonneg};
pub use steps::StepSizes;

/// Differentiable term `h` of the splitting.
pub trait SmoothTerm: Sync {
    /// Length of the flat image the term acts on.
    fn len(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);
}

/// `h ≡ 0`.
#[derive(Clone, Copy, Debug)]
pub struct NoSmooth {
    pub len: usize,
}

impl SmoothTerm for NoSmooth {
    fn len(&self) -> usize {
        self.len
    }

    fn value(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn gradient_into(&self, _x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
    }
}
