//! Operator-norm estimation by power iteration on `MᵀM`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LinearMap;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iter: 1000, seed: 0 }
    }
}

/// Estimates the largest singular value `‖M‖` of `op`.
///
/// The estimate `sqrt(‖MᵀM v‖)` for unit `v` never exceeds the true norm.
/// Iteration stops once the relative change of the estimate drops below
/// `opts.tol` or after `opts.max_iter` steps.
pub fn op_norm_power<M: LinearMap + ?Sized>(op: &M, opts: PowerOptions) -> Result<f64> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("power iteration tolerance must be positive"));
    }
    let n = op.input_len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    normalize(&mut v)?;

    let mut mv = vec![0.0; op.output_len()];
    let mut w = vec![0.0; n];
    let mut estimate = 0.0;
    for it in 0..opts.max_iter.max(1) {
        op.apply(&v, &mut mv);
        op.apply_adjoint(&mv, &mut w);
        let s = norm(&w);
        if !s.is_finite() {
            return Err(Error::NonFinite(format!("power iteration step {it}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let next = s.sqrt();
        v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / s);
        let converged = it > 0 && (next - estimate).abs() <= opts.tol * next;
        estimate = next;
        if converged {
            break;
        }
    }
    Ok(estimate)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) -> Result<()> {
    let s = norm(v);
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::NonFinite("power iteration start vector".into()));
    }
    v.iter_mut().for_each(|x| *x /= s);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{FnMap, Gradient};

    #[test]
    fn identity_has_unit_norm() {
        let id = FnMap::new(10, 10, |x: &[f64], y: &mut [f64]| y.copy_from_slice(x), |y: &[f64], x: &mut [f64]| x.copy_from_slice(y));
        let est = op_norm_power(&id, PowerOptions::default()).unwrap();
        assert!((est - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn scaling_map() {
        let scale = |x: &[f64], y: &mut [f64]| y.iter_mut().zip(x).for_each(|(o, i)| *o = 3.0 * i);
        let op = FnMap::new(7, 7, scale, scale);
        let est = op_norm_power(&op, PowerOptions::default()).unwrap();
        assert!((est - 3.0).abs() <= 3.0 * 1e-6);
    }

    #[test]
    fn gradient_norm_against_dense_svd() {
        let (h, w) = (16, 16);
        let op = Gradient::new(h, w);
        let n = h * w;
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                let mut e = vec![0.0; n];
                e[k] = 1.0;
                let mut c = vec![0.0; 2 * n];
                op.apply(&e, &mut c);
                c
            })
            .collect();
        let mat = nalgebra::DMatrix::from_fn(2 * n, n, |r, c| cols[c][r]);
        let svd_norm = mat.singular_values().max();

        let est = op_norm_power(&op, PowerOptions { tol: 1e-12, max_iter: 20_000, seed: 0 }).unwrap();
        assert!((2.7..=8f64.sqrt()).contains(&est), "{est}");
        assert!(est <= svd_norm * (1.0 + 1e-12));
        assert!((est - svd_norm).abs() / svd_norm < 1e-6, "{est} vs {svd_norm}");

        // Default settings stop on relative change; still never above the SVD value.
        let quick = op_norm_power(&op, PowerOptions::default()).unwrap();
        assert!(quick <= svd_norm * (1.0 + 1e-6));
    }

    #[test]
    fn deterministic_for_seed() {
        let op = Gradient::new(9, 9);
        let a = op_norm_power(&op, PowerOptions { seed: 5, ..Default::default() }).unwrap();
        let b = op_norm_power(&op, PowerOptions { seed: 5, ..Default::default() }).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn rejects_bad_tolerance() {
        let op = Gradient::new(3, 3);
        assert!(op_norm_power(&op, PowerOptions { tol: 0.0, ..Default::default() }).is_err());
    }
}
