//! Low-dose X-ray CT toolkit.
//!
//! Simulates Poisson-noise parallel-beam measurements and reconstructs images
//! by solving
//!
//! ```text
//!   min_x  D(Ax, z) + ||Λ ∇x||_1 + I_{x >= 0}(x)
//! ```
//!
//! with the primal-dual three-operator splitting (PD3O) scheme, where `D` is
//! the Kullback-Leibler type fidelity of photon-count data and `Λ` a
//! per-pixel, per-direction regularization parameter-map.
//!
//! Module map:
//! - [`operators`]: ray-driven projector, discrete gradient, power iteration.
//! - [`physics`]: low-dose measurement simulation and the data fidelity.
//! - [`solvers`]: PD3O, a reference PDHG, and filtered back projection.
//! - [`lambda`]: parameter-map construction and scalar grid search.
//! - [`io`]: PMAP / IMGF / SNGM binary formats and PNG previews.
//! - [`metrics`]: PSNR and SSIM.
//! - [`testdata`]: synthetic phantoms.
//! - [`cli`]: the `ldct` command-line pipeline.

pub mod cli;
pub mod error;
pub mod io;
pub mod lambda;
pub mod metrics;
pub mod operators;
pub mod physics;
pub mod solvers;
pub mod testdata;

pub use error::{Error, Result};
pub use lambda::ParamMap;
pub use operators::{Geometry, GradientField, Image, Sinogram};
