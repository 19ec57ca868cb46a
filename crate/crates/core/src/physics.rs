//! Low-dose photon-count model.
//!
//! A clean line integral `s` produces `Ñ ~ Pois(N0 exp(-s μ))` counts; the
//! measured sinogram value is `z = -ln(Ñ / N0) / μ`, so that `E[z] ≈ s`.
//! The matching data fidelity is
//!
//! ```text
//! h(x) = Σ_i N0 exp(-(Ax)_i μ) - N0 exp(-z_i μ) (-(Ax)_i μ + ln N0)
//! ∇h(x) = Aᵀ [ μ N0 (exp(-z μ) - exp(-(Ax) μ)) ]
//! ```
//!
//! and for `x >= 0` its gradient is Lipschitz with constant at most
//! `‖A‖² μ² N0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{Geometry, Image, LinearMap, Projector, Sinogram};
use crate::solvers::SmoothTerm;

/// Poisson means above this use a rounded normal approximation.
const NORMAL_APPROX_MEAN: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsParams {
    /// Attenuation normalization constant.
    pub mu: f64,
    /// Mean photon count per detector bin without attenuation.
    pub n0: f64,
    /// Floor applied to measured counts before the log.
    #[serde(default = "default_min_counts")]
    pub min_counts: f64,
}

fn default_min_counts() -> f64 {
    1.0
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self { mu: 81.35858, n0: 4096.0, min_counts: 1.0 }
    }
}

impl PhysicsParams {
    pub fn new(mu: f64, n0: f64, min_counts: f64) -> Result<Self> {
        let p = Self { mu, n0, min_counts };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::invalid(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.n0.is_finite() && self.n0 > 0.0) {
            return Err(Error::invalid(format!("n0 must be positive, got {}", self.n0)));
        }
        if !(self.min_counts > 0.0 && self.min_counts <= self.n0) {
            return Err(Error::invalid(format!(
                "min_counts must lie in (0, n0], got {}",
                self.min_counts
            )));
        }
        Ok(())
    }
}

/// How detector counts are produced from their expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Draw Poisson counts; bin `i` uses a generator keyed by `(seed, i)`.
    Poisson { seed: u64 },
    /// Use the expected counts `N0 exp(-s μ)` (noise-free).
    Expected,
}

/// Simulates a low-dose measurement from clean line integrals.
pub fn simulate_lowdose(clean: &Sinogram, params: &PhysicsParams, sampling: Sampling) -> Result<Sinogram> {
    params.validate()?;
    if let Some(pos) = clean.data().iter().position(|v| *v < 0.0) {
        return Err(Error::invalid(format!(
            "clean sinogram entry {pos} is negative ({})",
            clean.data()[pos]
        )));
    }
    let PhysicsParams { mu, n0, min_counts } = *params;
    let data = clean
        .data()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mean = n0 * (-s * mu).exp();
            let counts = match sampling {
                Sampling::Expected => mean,
                Sampling::Poisson { seed } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(bin_key(seed, i as u64));
                    sample_poisson(mean, &mut rng)
                }
            };
            -(counts.max(min_counts) / n0).ln() / mu
        })
        .collect();
    Sinogram::new(clean.n_angles(), clean.n_bins(), data)
}

fn bin_key(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Poisson draw: sequential inversion for moderate means, rounded normal
/// approximation above [`NORMAL_APPROX_MEAN`].
fn sample_poisson<R: Rng>(mean: f64, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    if mean > NORMAL_APPROX_MEAN {
        let g: f64 = rng.sample(StandardNormal);
        return (mean + mean.sqrt() * g).round().max(0.0);
    }
    // Terms are tracked in log space so exp(-mean) may underflow harmlessly.
    let u: f64 = rng.random();
    let ln_mean = mean.ln();
    let mut ln_p = -mean;
    let mut cdf = ln_p.exp();
    let mut k = 0u64;
    let cap = (mean + 40.0 * mean.sqrt() + 40.0) as u64;
    while cdf < u && k < cap {
        k += 1;
        ln_p += ln_mean - (k as f64).ln();
        cdf += ln_p.exp();
    }
    k as f64
}

/// The fidelity `h(x) = D(Ax, z)` for an arbitrary forward map `A`.
#[derive(Clone, Debug)]
pub struct KlFidelity<M> {
    op: M,
    /// `N0 exp(-z μ)` per measurement.
    measured_counts: Vec<f64>,
    mu: f64,
    n0: f64,
}

impl<M: LinearMap> KlFidelity<M> {
    pub fn new(op: M, z: &[f64], params: &PhysicsParams) -> Result<Self> {
        params.validate()?;
        if z.len() != op.output_len() {
            return Err(Error::mismatch(format!(
                "measurement has {} entries, operator produces {}",
                z.len(),
                op.output_len()
            )));
        }
        let measured_counts = z.iter().map(|zi| params.n0 * (-zi * params.mu).exp()).collect();
        Ok(Self { op, measured_counts, mu: params.mu, n0: params.n0 })
    }

    pub fn operator(&self) -> &M {
        &self.op
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.op.output_len()];
        self.op.apply(x, &mut y);
        y
    }

    pub fn value_of_projection(&self, y: &[f64]) -> f64 {
        let ln_n0 = self.n0.ln();
        y.iter()
            .zip(&self.measured_counts)
            .map(|(yi, ci)| self.n0 * (-yi * self.mu).exp() - ci * (-yi * self.mu + ln_n0))
            .sum()
    }
}

impl<M: LinearMap> SmoothTerm for KlFidelity<M> {
    fn len(&self) -> usize {
        self.op.input_len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.value_of_projection(&self.project(x))
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let mut y = self.project(x);
        let (mu, n0) = (self.mu, self.n0);
        y.iter_mut()
            .zip(&self.measured_counts)
            .for_each(|(yi, ci)| *yi = mu * (ci - n0 * (-*yi * mu).exp()));
        self.op.apply_adjoint(&y, out);
    }
}

fn fidelity_for(x: &Image, z: &Sinogram, geom: &Geometry, params: &PhysicsParams) -> Result<KlFidelity<Projector>> {
    if x.shape() != geom.image_shape() {
        return Err(Error::mismatch("image does not match geometry"));
    }
    if (z.n_angles(), z.n_bins()) != (geom.n_angles(), geom.n_bins()) {
        return Err(Error::mismatch("sinogram does not match geometry"));
    }
    KlFidelity::new(Projector::new(geom), z.data(), params)
}

/// `h(x)` for the parallel-beam projector of `geom`.
pub fn kl_value(x: &Image, z: &Sinogram, geom: &Geometry, params: &PhysicsParams) -> Result<f64> {
    let h = fidelity_for(x, z, geom, params)?.value(x.data());
    if !h.is_finite() {
        return Err(Error::NonFinite("fidelity value".into()));
    }
    Ok(h)
}

/// `∇h(x)` for the parallel-beam projector of `geom`.
pub fn kl_gradient(x: &Image, z: &Sinogram, geom: &Geometry, params: &PhysicsParams) -> Result<Image> {
    let fid = fidelity_for(x, z, geom, params)?;
    let mut out = vec![0.0; x.len()];
    fid.gradient_into(x.data(), &mut out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fidelity gradient".into()));
    }
    Ok(Image::from_raw(x.height(), x.width(), out))
}

/// Upper bound `‖A‖² μ² N0` of the Lipschitz constant of `∇h` on `x >= 0`.
pub fn lipschitz_bound(params: &PhysicsParams, norm_a: f64) -> f64 {
    norm_a * norm_a * params.mu * params.mu * params.n0
}
