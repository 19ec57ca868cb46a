//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls into the solver internals being checked, apart
//! from the public operator/fidelity entry points the oracle wraps.

#![allow(dead_code)]

use ldct::lambda::ParamMap;
use ldct::operators::{diagonal_bins, Geometry, Image, LinearMap, Sinogram};
use ldct::physics::{kl_gradient, kl_value, PhysicsParams};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize, lo: f64, hi: f64) -> Image {
    Image::new(h, w, uniform_vec(rng, h * w, lo, hi)).unwrap()
}

pub fn random_sinogram(rng: &mut ChaCha8Rng, geom: &Geometry, lo: f64, hi: f64) -> Sinogram {
    Sinogram::new(geom.n_angles(), geom.n_bins(), uniform_vec(rng, geom.sinogram_len(), lo, hi)).unwrap()
}

pub fn random_map(rng: &mut ChaCha8Rng, h: usize, w: usize, channels: usize, hi: f64) -> ParamMap {
    ParamMap::new(h, w, channels, uniform_vec(rng, channels * h * w, 0.0, hi)).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `|<Ax, y> - <x, Aᵀy>| / (‖Ax‖ ‖y‖ + ‖x‖ ‖Aᵀy‖)`.
pub fn adjoint_error<M: LinearMap>(op: &M, x: &[f64], y: &[f64]) -> f64 {
    let mut ax = vec![0.0; op.output_len()];
    let mut aty = vec![0.0; op.input_len()];
    op.apply(x, &mut ax);
    op.apply_adjoint(y, &mut aty);
    let scale = norm(&ax) * norm(y) + norm(x) * norm(&aty);
    (dot(&ax, y) - dot(x, &aty)).abs() / scale
}

/// Dense matrix of a linear map, assembled column by column.
pub fn dense<M: LinearMap>(op: &M) -> DMatrix<f64> {
    let (n, m) = (op.input_len(), op.output_len());
    let mut mat = DMatrix::zeros(m, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; m];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..m {
            mat[(i, j)] = col[i];
        }
    }
    mat
}

/// Unit pixel spacing so that `Ax` is O(size) for unit-scale images.
pub fn unit_geometry(size: usize, n_angles: usize) -> Geometry {
    Geometry::parallel(size, n_angles, diagonal_bins(size), size as f64).unwrap()
}

/// Central finite differences of `kl_value`, one coordinate at a time.
pub fn kl_fd_gradient(x: &Image, z: &Sinogram, geom: &Geometry, params: &PhysicsParams, eps: f64) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for j in 0..x.len() {
        let mut plus = x.data().to_vec();
        let mut minus = x.data().to_vec();
        plus[j] += eps;
        minus[j] -= eps;
        let hp = kl_value(&Image::new(x.height(), x.width(), plus).unwrap(), z, geom, params).unwrap();
        let hm = kl_value(&Image::new(x.height(), x.width(), minus).unwrap(), z, geom, params).unwrap();
        out[j] = (hp - hm) / (2.0 * eps);
    }
    out
}

/// Worst relative error `‖g_fd − ∇h‖ / ‖∇h‖` of the analytic gradient.
pub fn kl_gradient_rel_error(x: &Image, z: &Sinogram, geom: &Geometry, params: &PhysicsParams) -> f64 {
    let g = kl_gradient(x, z, geom, params).unwrap();
    let fd = kl_fd_gradient(x, z, geom, params, 1e-5);
    let diff: Vec<f64> = fd.iter().zip(g.data()).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(g.data())
}

/// Symmetrized finite-difference Hessian of `h`, built from analytic gradients.
pub fn kl_fd_hessian(x: &Image, z: &Sinogram, geom: &Geometry, params: &PhysicsParams, eps: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut hess = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut plus = x.data().to_vec();
        let mut minus = x.data().to_vec();
        plus[j] += eps;
        minus[j] -= eps;
        let gp = kl_gradient(&Image::new(x.height(), x.width(), plus).unwrap(), z, geom, params).unwrap();
        let gm = kl_gradient(&Image::new(x.height(), x.width(), minus).unwrap(), z, geom, params).unwrap();
        for i in 0..n {
            hess[(i, j)] = (gp.data()[i] - gm.data()[i]) / (2.0 * eps);
        }
    }
    (&hess + hess.transpose()) * 0.5
}

/// Spectral norm of a symmetric matrix.
pub fn sym_spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// `argmin_u I_{[-lam, lam]}(u) + ½(u − v)²` over a grid of step `step`
/// covering `[-lam, lam]`.
pub fn brute_force_box_prox(v: f64, lam: f64, step: f64) -> f64 {
    let n = (2.0 * lam / step).floor() as i64;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=n {
        let u = -lam + k as f64 * step;
        let cost = 0.5 * (u - v) * (u - v);
        if cost < best.0 {
            best = (cost, u);
        }
    }
    // The right end point is feasible even when 2·lam is not a multiple of step.
    let cost = 0.5 * (lam - v) * (lam - v);
    if cost < best.0 {
        best = (cost, lam);
    }
    best.1
}

/// Projected gradient `p ← max(p − τ ∇h(p), 0)`, returning every iterate.
pub fn projected_gradient<F: Fn(&[f64], &mut [f64])>(x0: &[f64], tau: f64, grad: F, iters: usize) -> Vec<Vec<f64>> {
    let mut p = x0.to_vec();
    let mut g = vec![0.0; p.len()];
    let mut out = Vec::with_capacity(iters);
    for _ in 0..iters {
        grad(&p, &mut g);
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi = (*pi - tau * gi).max(0.0);
        }
        out.push(p.clone());
    }
    out
}
