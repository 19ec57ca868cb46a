use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::{EdgeAdaptiveConfig, LambdaSource, PhantomConfig, RunConfig};
use super::{CliError, MetricsArgs, PhantomArgs, PhantomKind};
use crate::io::{read_image, read_pmap, read_sinogram, write_image, write_image_png, write_pmap, write_png, write_sinogram};
use crate::lambda::{edge_adaptive_map, grid_search_lambda, scalar_map, GridSearchOptions, ParamMap};
use crate::metrics::{evaluate, MetricReport};
use crate::operators::{forward_project, Geometry, Image, Sinogram};
use crate::physics::{simulate_lowdose, PhysicsParams, Sampling};
use crate::solvers::{fbp_reconstruct, pd3o_run, prox_nonneg, Pd3oOptions, StepSizes};
use crate::testdata::{random_ellipses, shepp_logan};

/// Tracks every file a command writes, in write order.
struct Outputs {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Data(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.path(name);
        write_json(&path, value)
    }

    fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
    }

    /// Writes `manifest.json` listing the other files with their sizes.
    fn finish(mut self) -> Result<Vec<PathBuf>, CliError> {
        let mut entries = Vec::new();
        for p in &self.files {
            let bytes = fs::metadata(p)
                .map_err(|e| CliError::Data(format!("cannot stat {}: {e}", p.display())))?
                .len();
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            entries.push(json!({ "file": name, "bytes": bytes }));
        }
        self.json("manifest.json", &json!({ "files": entries }))?;
        Ok(self.files)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn check_sinogram(z: &Sinogram, geom: &Geometry, what: &str) -> Result<(), CliError> {
    if (z.n_angles(), z.n_bins()) != (geom.n_angles(), geom.n_bins()) {
        return Err(CliError::Data(format!(
            "{what} is {}x{} but the geometry expects {}x{}",
            z.n_angles(),
            z.n_bins(),
            geom.n_angles(),
            geom.n_bins()
        )));
    }
    Ok(())
}

fn check_image(img: &Image, geom: &Geometry, what: &str) -> Result<(), CliError> {
    if img.shape() != geom.image_shape() {
        return Err(CliError::Data(format!(
            "{what} is {:?} but the geometry expects {:?}",
            img.shape(),
            geom.image_shape()
        )));
    }
    Ok(())
}

fn require_sinogram(cfg: &RunConfig) -> Result<&Path, CliError> {
    cfg.sinogram
        .as_deref()
        .ok_or_else(|| CliError::Config("no sinogram given (use --sino or the `sinogram` config key)".into()))
}

/// Largest representable line integral; used as the sinogram preview window.
fn sinogram_window(params: &PhysicsParams) -> (f64, f64) {
    (0.0, (params.n0 / params.min_counts).ln() / params.mu)
}

fn rms_difference(a: &[f64], b: &[f64]) -> f64 {
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (ss / a.len() as f64).sqrt()
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let geom = cfg.geometry()?;
    let (size, _) = geom.image_shape();
    let (image, source) = match &cfg.input_image {
        Some(p) => {
            let img = read_image(p)?;
            check_image(&img, &geom, "input image")?;
            (img, json!({ "input_image": p }))
        }
        None => {
            let img = match cfg.phantom {
                PhantomConfig::SheppLogan => shepp_logan(size)?,
                PhantomConfig::RandomEllipses { n_ellipses, seed } => random_ellipses(size, n_ellipses, seed)?,
            };
            (img, json!({ "phantom": cfg.phantom }))
        }
    };
    let clean = forward_project(&image, &geom)?;
    let noisy = simulate_lowdose(&clean, &cfg.physics, Sampling::Poisson { seed: cfg.seed })?;
    let noise_std = rms_difference(noisy.data(), clean.data());

    let mut out = Outputs::create(&cfg.out_dir)?;
    write_image(&image, out.path("phantom.imgf"))?;
    write_image_png(&image, out.path("phantom.png"))?;
    write_sinogram(&clean, out.path("clean.sngm"))?;
    write_sinogram(&noisy, out.path("noisy.sngm"))?;
    let window = sinogram_window(&cfg.physics);
    write_png(clean.data(), clean.n_angles(), clean.n_bins(), window, out.path("clean.png"))?;
    write_png(noisy.data(), noisy.n_angles(), noisy.n_bins(), window, out.path("noisy.png"))?;
    out.json("geometry.json", &geom.to_spec())?;
    out.json(
        "simulate.json",
        &json!({
            "seed": cfg.seed,
            "physics": cfg.physics,
            "source": source,
            "noise_std": noise_std,
        }),
    )?;
    println!(
        "simulate: seed={} mu={} n0={} min_counts={} geometry={}x{} angles={} bins={} noise_std={:.6e}",
        cfg.seed,
        cfg.physics.mu,
        cfg.physics.n0,
        cfg.physics.min_counts,
        geom.height(),
        geom.width(),
        geom.n_angles(),
        geom.n_bins(),
        noise_std
    );
    out.finish()
}

pub fn cmd_fbp(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let geom = cfg.geometry()?;
    let z = read_sinogram(require_sinogram(cfg)?)?;
    check_sinogram(&z, &geom, "sinogram")?;
    let img = fbp_reconstruct(&z, &geom, cfg.solver.filter)?;
    let mut out = Outputs::create(&cfg.out_dir)?;
    write_image(&img, out.path("fbp.imgf"))?;
    write_image_png(&img, out.path("fbp.png"))?;
    if let Some(gt) = &cfg.ground_truth {
        let truth = read_image(gt)?;
        check_image(&truth, &geom, "ground truth")?;
        let report = evaluate(&img, &truth, cfg.data_range)?;
        println!("fbp: psnr={:.4} dB ssim={:.4}", report.psnr_db, report.ssim);
        out.json("metrics.json", &json!({ "fbp": report }))?;
    }
    out.finish()
}

fn lambda_map(source: &LambdaSource, fbp: &Image, geom: &Geometry) -> Result<ParamMap, CliError> {
    let (h, w) = geom.image_shape();
    let map = match source {
        LambdaSource::Scalar(l) => scalar_map(*l, h, w)?,
        LambdaSource::Pmap(p) => read_pmap(p)?,
        LambdaSource::EdgeAdaptive(EdgeAdaptiveConfig { lam_max, beta, smooth_sigma, reference }) => {
            let reference = match reference {
                Some(p) => {
                    let img = read_image(p)?;
                    check_image(&img, geom, "edge-adaptive reference")?;
                    img
                }
                None => fbp.clone(),
            };
            edge_adaptive_map(&reference, *lam_max, *beta, *smooth_sigma)?
        }
    };
    if map.shape() != (h, w) {
        return Err(CliError::Data(format!(
            "parameter map is {:?} but the geometry expects {:?}",
            map.shape(),
            (h, w)
        )));
    }
    Ok(map)
}

pub fn cmd_reconstruct(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let geom = cfg.geometry()?;
    let z = read_sinogram(require_sinogram(cfg)?)?;
    check_sinogram(&z, &geom, "sinogram")?;
    let truth = match &cfg.ground_truth {
        Some(p) => {
            let img = read_image(p)?;
            check_image(&img, &geom, "ground truth")?;
            Some(img)
        }
        None => None,
    };

    // The nonnegative FBP image is both the baseline and the starting point.
    let fbp = prox_nonneg(&fbp_reconstruct(&z, &geom, cfg.solver.filter)?);
    let lam = lambda_map(&cfg.lambda, &fbp, &geom)?;
    let steps = StepSizes::for_problem(&geom, &cfg.physics, cfg.solver.relax)?;
    let opts = Pd3oOptions { iters: cfg.solver.iters, log_every: cfg.solver.log_every };
    let (recon, report) = pd3o_run(&fbp, &z, &lam, &geom, &cfg.physics, steps, opts)?;
    if !recon.is_finite() {
        return Err(CliError::Numerical("reconstruction contains non-finite values".into()));
    }

    let mut out = Outputs::create(&cfg.out_dir)?;
    write_image(&fbp, out.path("fbp.imgf"))?;
    write_image_png(&fbp, out.path("fbp.png"))?;
    write_image(&recon, out.path("recon.imgf"))?;
    write_image_png(&recon, out.path("recon.png"))?;
    write_pmap(&lam, out.path("lambda.pmap"))?;
    out.json(
        "solve_report.json",
        &json!({
            "report": report,
            "steps": steps,
            "lambda": { "source": cfg.lambda, "min": lam.min_value(), "max": lam.max_value(), "mean": lam.mean() },
            "physics": cfg.physics,
        }),
    )?;
    if let Some(truth) = &truth {
        let m_fbp = evaluate(&fbp, truth, cfg.data_range)?;
        let m_rec = evaluate(&recon, truth, cfg.data_range)?;
        println!(
            "reconstruct: fbp psnr={:.4} dB ssim={:.4} | pd3o psnr={:.4} dB ssim={:.4}",
            m_fbp.psnr_db, m_fbp.ssim, m_rec.psnr_db, m_rec.ssim
        );
        out.json("metrics.json", &json!({ "fbp": m_fbp, "pd3o": m_rec }))?;
    } else {
        println!("reconstruct: {} iterations, final relative change {:.3e}", report.iterations, report.final_rel_change);
    }
    out.finish()
}

pub fn cmd_gridsearch(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let geom = cfg.geometry()?;
    let mut pairs = Vec::new();
    for p in &cfg.pairs {
        pairs.push((read_sinogram(&p.sinogram)?, read_image(&p.ground_truth)?));
    }
    if pairs.is_empty() {
        if let (Some(s), Some(g)) = (&cfg.sinogram, &cfg.ground_truth) {
            pairs.push((read_sinogram(s)?, read_image(g)?));
        }
    }
    if pairs.is_empty() {
        return Err(CliError::Config("grid search needs at least one (sinogram, ground truth) pair".into()));
    }
    for (z, truth) in &pairs {
        check_sinogram(z, &geom, "sinogram")?;
        check_image(truth, &geom, "ground truth")?;
    }
    let grid = cfg.grid.values()?;
    let opts = GridSearchOptions {
        iters: cfg.solver.iters,
        relax: cfg.solver.relax,
        filter: cfg.solver.filter,
        data_range: cfg.data_range,
    };
    let result = grid_search_lambda(&pairs, &grid, &geom, &cfg.physics, &opts)?;

    let mut csv = String::from("lambda,mean_psnr,mean_ssim\n");
    for s in &result.scores {
        csv.push_str(&format!("{},{},{}\n", s.lambda, s.mean_psnr, s.mean_ssim));
    }
    let best = &result.scores[result.best_index];
    let mut out = Outputs::create(&cfg.out_dir)?;
    out.text("gridsearch.csv", &csv)?;
    out.json(
        "best_lambda.json",
        &json!({
            "best_lambda": result.best_lambda,
            "best_index": result.best_index,
            "mean_psnr": best.mean_psnr,
            "mean_ssim": best.mean_ssim,
            "n_pairs": pairs.len(),
            "iters": cfg.solver.iters,
        }),
    )?;
    println!(
        "gridsearch: best lambda={} mean psnr={:.4} dB over {} pair(s)",
        result.best_lambda,
        best.mean_psnr,
        pairs.len()
    );
    out.finish()
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<MetricReport, CliError> {
    let img = read_image(&args.image)?;
    let reference = read_image(&args.reference)?;
    let report = evaluate(&img, &reference, args.data_range)?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
    println!("{text}");
    if let Some(out) = &args.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))?;
        }
        write_json(out, &report)?;
    }
    Ok(report)
}

pub fn cmd_phantom(args: &PhantomArgs) -> Result<Vec<PathBuf>, CliError> {
    let img = match args.kind {
        PhantomKind::SheppLogan => shepp_logan(args.size)?,
        PhantomKind::Ellipses => random_ellipses(args.size, args.n_ellipses, args.seed)?,
    };
    let mut out = Outputs::create(&args.out)?;
    write_image(&img, out.path("phantom.imgf"))?;
    write_image_png(&img, out.path("phantom.png"))?;
    Ok(out.files)
}
