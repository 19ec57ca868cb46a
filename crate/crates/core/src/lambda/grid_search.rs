use rayon::prelude::*;
use serde::Serialize;

use super::scalar_map;
use crate::error::{Error, Result};
use crate::metrics::{psnr, ssim};
use crate::operators::{Geometry, Image, Projector, Sinogram};
use crate::physics::{KlFidelity, PhysicsParams};
use crate::solvers::{fbp_reconstruct, pd3o, prox_nonneg, FilterKind, Pd3oOptions, StepSizes};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSearchOptions {
    pub iters: usize,
    pub relax: f64,
    pub filter: FilterKind,
    pub data_range: f64,
}

impl Default for GridSearchOptions {
    fn default() -> Self {
        Self { iters: 200, relax: 1.0, filter: FilterKind::RamLak, data_range: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub lambda: f64,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSearchResult {
    pub best_lambda: f64,
    pub best_index: usize,
    /// One entry per grid value, in grid order.
    pub scores: Vec<GridPoint>,
}

/// `count` values spaced evenly in log scale over `[min, max]`.
pub fn log_spaced(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && min.is_finite() && max.is_finite()) || count == 0 {
        return Err(Error::invalid("log-spaced grid needs 0 < min <= max and count >= 1"));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let (lo, hi) = (min.ln(), max.ln());
    Ok((0..count)
        .map(|k| (lo + (hi - lo) * k as f64 / (count - 1) as f64).exp())
        .collect())
}

// Order-independent mean: sort before summing.
fn stable_mean(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Picks the scalar λ maximizing mean PSNR of PD3O reconstructions over
/// `pairs` of (measurement, ground truth).
///
/// Each solve starts from the nonnegative part of the FBP image. Ties go to
/// the smaller λ, then to the earlier grid entry.
pub fn grid_search_lambda(
    pairs: &[(Sinogram, Image)],
    grid: &[f64],
    geom: &Geometry,
    params: &PhysicsParams,
    opts: &GridSearchOptions,
) -> Result<GridSearchResult> {
    if pairs.is_empty() {
        return Err(Error::invalid("grid search needs at least one (sinogram, image) pair"));
    }
    if grid.is_empty() {
        return Err(Error::invalid("grid search needs at least one lambda value"));
    }
    if let Some(bad) = grid.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::invalid(format!("grid value {bad} is not a nonnegative number")));
    }
    for (z, truth) in pairs {
        if truth.shape() != geom.image_shape() {
            return Err(Error::mismatch("ground truth does not match geometry"));
        }
        if (z.n_angles(), z.n_bins()) != (geom.n_angles(), geom.n_bins()) {
            return Err(Error::mismatch("sinogram does not match geometry"));
        }
    }
    let steps = StepSizes::for_problem(geom, params, opts.relax)?;
    let (h, w) = geom.image_shape();
    let projector = Projector::new(geom);

    let cases: Vec<(KlFidelity<Projector>, Image)> = pairs
        .iter()
        .map(|(z, _)| {
            let x0 = prox_nonneg(&fbp_reconstruct(z, geom, opts.filter)?);
            Ok((KlFidelity::new(projector.clone(), z.data(), params)?, x0))
        })
        .collect::<Result<_>>()?;

    let scores: Vec<GridPoint> = grid
        .par_iter()
        .map(|&lambda| {
            let lam = scalar_map(lambda, h, w)?;
            let mut psnrs = Vec::with_capacity(pairs.len());
            let mut ssims = Vec::with_capacity(pairs.len());
            for ((fid, x0), (_, truth)) in cases.iter().zip(pairs) {
                let (rec, _) = pd3o(x0, &lam, fid, steps, Pd3oOptions::new(opts.iters))
                    .map_err(|e| Error::NonFinite(format!("solve failed for lambda {lambda}: {e}")))?;
                psnrs.push(psnr(&rec, truth, opts.data_range)?);
                ssims.push(ssim(&rec, truth, opts.data_range)?);
            }
            Ok(GridPoint { lambda, mean_psnr: stable_mean(psnrs), mean_ssim: stable_mean(ssims) })
        })
        .collect::<Result<_>>()?;

    let mut best_index = 0;
    for (k, pt) in scores.iter().enumerate().skip(1) {
        let best = &scores[best_index];
        if pt.mean_psnr > best.mean_psnr || (pt.mean_psnr == best.mean_psnr && pt.lambda < best.lambda) {
            best_index = k;
        }
    }
    Ok(GridSearchResult { best_lambda: scores[best_index].lambda, best_index, scores })
}
