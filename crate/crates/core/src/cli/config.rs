use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::lambda::log_spaced;
use crate::operators::{Geometry, GeometrySpec};
use crate::physics::PhysicsParams;
use crate::solvers::FilterKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub iters: usize,
    pub relax: f64,
    pub filter: FilterKind,
    pub log_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { iters: 300, relax: 1.0, filter: FilterKind::RamLak, log_every: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeAdaptiveConfig {
    pub lam_max: f64,
    pub beta: f64,
    pub smooth_sigma: f64,
    /// Reference image for edge detection; the FBP image when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
}

impl Default for EdgeAdaptiveConfig {
    fn default() -> Self {
        Self { lam_max: 600.0, beta: 30.0, smooth_sigma: 1.0, reference: None }
    }
}

/// Scalar λ used when nothing else is configured. At the default dose and
/// geometry the best value is near 40 for Shepp-Logan and near 300 for
/// random ellipses.
pub const DEFAULT_LAMBDA: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaSource {
    Scalar(f64),
    Pmap(PathBuf),
    EdgeAdaptive(EdgeAdaptiveConfig),
}

impl Default for LambdaSource {
    fn default() -> Self {
        LambdaSource::Scalar(DEFAULT_LAMBDA)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhantomConfig {
    SheppLogan,
    RandomEllipses { n_ellipses: usize, seed: u64 },
}

impl Default for PhantomConfig {
    fn default() -> Self {
        PhantomConfig::SheppLogan
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Values { values: Vec<f64> },
    LogSpaced { min: f64, max: f64, #[serde(default = "default_grid_count")] count: usize },
}

fn default_grid_count() -> usize {
    15
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig::LogSpaced { min: 3.0, max: 3000.0, count: default_grid_count() }
    }
}

impl GridConfig {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            GridConfig::Values { values } => {
                if values.is_empty() {
                    return Err(CliError::Config("grid.values is empty".into()));
                }
                Ok(values.clone())
            }
            GridConfig::LogSpaced { min, max, count } => {
                log_spaced(*min, *max, *count).map_err(|e| CliError::Config(format!("grid: {e}")))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub sinogram: PathBuf,
    pub ground_truth: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: Option<GeometrySpec>,
    pub physics: PhysicsParams,
    pub solver: SolverConfig,
    pub lambda: LambdaSource,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub phantom: PhantomConfig,
    pub input_image: Option<PathBuf>,
    pub sinogram: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    pub grid: GridConfig,
    pub pairs: Vec<PairConfig>,
    pub data_range: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: None,
            physics: PhysicsParams::default(),
            solver: SolverConfig::default(),
            lambda: LambdaSource::default(),
            seed: 0,
            out_dir: PathBuf::from("out"),
            phantom: PhantomConfig::default(),
            input_image: None,
            sinogram: None,
            ground_truth: None,
            grid: GridConfig::default(),
            pairs: Vec::new(),
            data_range: 1.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        // Relative paths inside the config are resolved against its directory.
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.input_image, &mut self.sinogram, &mut self.ground_truth].into_iter().flatten() {
            fix(p);
        }
        match &mut self.lambda {
            LambdaSource::Pmap(p) => fix(p),
            LambdaSource::EdgeAdaptive(EdgeAdaptiveConfig { reference: Some(p), .. }) => fix(p),
            _ => {}
        }
        for pair in &mut self.pairs {
            fix(&mut pair.sinogram);
            fix(&mut pair.ground_truth);
        }
    }

    pub fn geometry(&self) -> Result<Geometry, CliError> {
        match &self.geometry {
            Some(spec) => Geometry::from_spec(spec).map_err(|e| CliError::Config(format!("geometry: {e}"))),
            None => Ok(Geometry::desk_default()),
        }
    }

    /// Checks numeric preconditions and that every referenced file exists.
    pub fn validate(&self) -> Result<(), CliError> {
        self.physics.validate().map_err(|e| CliError::Config(format!("physics: {e}")))?;
        self.geometry()?;
        if !(self.solver.relax > 0.0 && self.solver.relax <= 1.0) {
            return Err(CliError::Config(format!("solver.relax must lie in (0, 1], got {}", self.solver.relax)));
        }
        if !(self.data_range > 0.0 && self.data_range.is_finite()) {
            return Err(CliError::Config("data_range must be positive".into()));
        }
        match &self.lambda {
            LambdaSource::Scalar(l) if !(l.is_finite() && *l >= 0.0) => {
                return Err(CliError::Config(format!("lambda must be nonnegative, got {l}")));
            }
            LambdaSource::Pmap(p) => require_file(p, "lambda.pmap")?,
            LambdaSource::EdgeAdaptive(e) => {
                if !(e.lam_max > 0.0 && e.beta >= 0.0 && e.smooth_sigma >= 0.0) {
                    return Err(CliError::Config("edge_adaptive needs lam_max > 0, beta >= 0, smooth_sigma >= 0".into()));
                }
                if let Some(r) = &e.reference {
                    require_file(r, "edge_adaptive.reference")?;
                }
            }
            _ => {}
        }
        for (p, what) in [(&self.input_image, "input_image"), (&self.sinogram, "sinogram"), (&self.ground_truth, "ground_truth")] {
            if let Some(p) = p {
                require_file(p, what)?;
            }
        }
        for pair in &self.pairs {
            require_file(&pair.sinogram, "pairs[].sinogram")?;
            require_file(&pair.ground_truth, "pairs[].ground_truth")?;
        }
        Ok(())
    }
}

pub fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if !path.is_file() {
        return Err(CliError::Config(format!("{what}: file {} does not exist", path.display())));
    }
    Ok(())
}
