//! Repeated-split benchmarks, parameter sweeps and report emission.

mod method;
mod report;
mod synthetic;

pub use method::{confusion_matrix, MethodConfig, MethodModel, Pipeline};
pub use report::{
    emit_report, format_cell, DatasetSummary, Emit, ExperimentReport, MethodResult, ReportFormat,
    RunSeeds, SweepPoint, SweepReport,
};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{load_csv, load_image_dir, split, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::features::{pca_fit, pca_transform, DEFAULT_COMPONENTS};
use crate::learners::Classifier;
use crate::seed;
use crate::stats::mean_stderr;

pub const DEFAULT_RUNS: usize = 10;
pub const DEFAULT_IMAGE_SIZE: usize = 32;
pub const DEFAULT_FEATURE_GRID: [usize; 5] = [10, 15, 20, 25, 30];
pub const DEFAULT_CODE_GRID: [usize; 4] = [10, 30, 70, 150];

const PROTOCOL: &str =
    "each run is an independent seeded stratified split (seed = master_seed + run)";

fn default_image_size() -> usize {
    DEFAULT_IMAGE_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DataSource {
    Csv {
        path: PathBuf,
    },
    /// One subdirectory of PGM files per class.
    Images {
        dir: PathBuf,
        #[serde(default = "default_image_size")]
        image_size: usize,
    },
    Synthetic(SyntheticSpec),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SyntheticSpec::desk32())
    }
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Csv { path } => load_csv(path),
            DataSource::Images { dir, image_size } => load_image_dir(dir, *image_size),
            DataSource::Synthetic(spec) => generate_synthetic(spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub split: SplitSpec,
    /// `None` trains on the raw features.
    pub pca_k: Option<usize>,
    pub methods: Vec<MethodConfig>,
    pub runs: usize,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: DataSource::default(),
            split: SplitSpec::default(),
            pca_k: Some(DEFAULT_COMPONENTS),
            methods: MethodConfig::full_suite(),
            runs: DEFAULT_RUNS,
            master_seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// Checks that need no data.
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        let mut seen = Vec::new();
        for m in &self.methods {
            if seen.contains(&m.label()) {
                return Err(Error::Config(format!(
                    "method {:?} listed twice",
                    m.label()
                )));
            }
            seen.push(m.label());
            m.validate(None)?;
        }
        if self.pca_k == Some(0) {
            return Err(Error::Config("pca_k must be >= 1".into()));
        }
        if let DataSource::Synthetic(spec) = &self.source {
            spec.validate()?;
        }
        if let DataSource::Images { image_size: 0, .. } = self.source {
            return Err(Error::Config("image_size must be >= 1".into()));
        }
        self.split.validate()
    }

    /// Checks that depend on the loaded dataset.
    pub fn validate_for(&self, ds: &Dataset) -> Result<()> {
        self.validate()?;
        if ds.n_classes() < 2 {
            return Err(Error::Config("dataset needs at least 2 classes".into()));
        }
        if let Some(k) = self.pca_k {
            if k > ds.dim() {
                return Err(Error::Config(format!(
                    "pca_k {k} exceeds the feature dimension {}",
                    ds.dim()
                )));
            }
        }
        for m in &self.methods {
            m.validate(Some(ds.n_classes()))?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Seed of run `r`.
pub fn run_seed(master: u64, run: usize) -> u64 {
    master.wrapping_add(run as u64)
}

/// Seed a method consumes within a run; independent of method order.
pub fn method_seed(run_seed: u64, method: &MethodConfig) -> u64 {
    seed::derive(run_seed, method.label())
}

struct RunOutcome {
    accuracies: Vec<f64>,
    seconds: Vec<f64>,
    seeds: RunSeeds,
}

fn run_once(cfg: &ExperimentConfig, ds: &Dataset, run: usize) -> Result<RunOutcome> {
    let wrap = |method: &str| {
        let method = method.to_string();
        move |e: Error| Error::Experiment {
            run,
            method,
            source: Box::new(e),
        }
    };
    let seed_r = run_seed(cfg.master_seed, run);
    let spec = SplitSpec {
        seed: seed_r,
        ..cfg.split
    };
    let (mut train, mut test) = split(ds, &spec).map_err(wrap("split"))?;
    if let Some(k) = cfg.pca_k {
        let pca = pca_fit(&train, k).map_err(wrap("pca"))?;
        train = pca_transform(&pca, &train).map_err(wrap("pca"))?;
        test = pca_transform(&pca, &test).map_err(wrap("pca"))?;
    }
    let mut accuracies = Vec::with_capacity(cfg.methods.len());
    let mut seconds = Vec::with_capacity(cfg.methods.len());
    let mut method_seeds = BTreeMap::new();
    for m in &cfg.methods {
        let s = method_seed(seed_r, m);
        method_seeds.insert(m.label().to_string(), s);
        let start = Instant::now();
        let acc = m
            .train(&train, s)
            .and_then(|model| model.accuracy(&test))
            .map_err(wrap(m.label()))?;
        seconds.push(start.elapsed().as_secs_f64());
        accuracies.push(acc);
    }
    Ok(RunOutcome {
        accuracies,
        seconds,
        seeds: RunSeeds {
            run,
            seed: seed_r,
            methods: method_seeds,
        },
    })
}

/// Loads the configured dataset and runs the protocol on it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let ds = cfg.source.load()?;
    run_experiment_on(cfg, &ds)
}

/// `R` seeded runs of split, optional PCA, then every method; accuracy is
/// measured on the test side. Nothing is returned unless every run succeeds.
pub fn run_experiment_on(cfg: &ExperimentConfig, ds: &Dataset) -> Result<ExperimentReport> {
    cfg.validate_for(ds)?;
    let outcomes = (0..cfg.runs)
        .into_par_iter()
        .map(|r| run_once(cfg, ds, r))
        .collect::<Result<Vec<_>>>()?;
    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let accuracies: Vec<f64> = outcomes.iter().map(|o| o.accuracies[j]).collect();
            let (mean, stderr) = mean_stderr(&accuracies);
            MethodResult {
                name: m.label().to_string(),
                title: m.title().to_string(),
                accuracies,
                mean,
                stderr,
                wall_clock_secs: outcomes.iter().map(|o| o.seconds[j]).collect(),
            }
        })
        .collect();
    Ok(ExperimentReport {
        config: cfg.clone(),
        dataset: DatasetSummary::of(ds),
        runs: cfg.runs,
        single_run: cfg.runs == 1,
        protocol: PROTOCOL.to_string(),
        methods,
        seeds: outcomes.into_iter().map(|o| o.seeds).collect(),
    })
}

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!(
            "sweep grid {grid:?} is not strictly increasing"
        )));
    }
    Ok(())
}

fn sweep(
    parameter: &str,
    grid: &[usize],
    configs: Vec<ExperimentConfig>,
    ds: &Dataset,
) -> Result<SweepReport> {
    for c in &configs {
        c.validate_for(ds)?;
    }
    let points = grid
        .iter()
        .zip(configs)
        .map(|(&value, config)| {
            let report = run_experiment_on(&config, ds)?;
            Ok(SweepPoint {
                value,
                config,
                methods: report.methods,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::new(
        parameter,
        grid.to_vec(),
        DatasetSummary::of(ds),
        points,
    ))
}

/// Varies the ECOC code length with everything else, seeds included, held
/// fixed. Methods that use no code do not depend on the length and are
/// left out.
pub fn sweep_code_length(cfg: &ExperimentConfig, grid: &[usize]) -> Result<SweepReport> {
    cfg.validate()?;
    let ds = cfg.source.load()?;
    sweep_code_length_on(cfg, grid, &ds)
}

pub fn sweep_code_length_on(
    cfg: &ExperimentConfig,
    grid: &[usize],
    ds: &Dataset,
) -> Result<SweepReport> {
    check_grid(grid)?;
    let ecoc: Vec<MethodConfig> = cfg
        .methods
        .iter()
        .copied()
        .filter(|m| matches!(m, MethodConfig::Ecoc { .. }))
        .collect();
    if ecoc.is_empty() {
        return Err(Error::Config(
            "code-length sweep needs an ecoc method".into(),
        ));
    }
    let configs = grid
        .iter()
        .map(|&n| ExperimentConfig {
            methods: ecoc
                .iter()
                .map(|m| match *m {
                    MethodConfig::Ecoc { pic, decoding, .. } => MethodConfig::Ecoc {
                        code_length: n,
                        pic,
                        decoding,
                    },
                    other => other,
                })
                .collect(),
            ..cfg.clone()
        })
        .collect();
    sweep("code_length", grid, configs, ds)
}

/// Varies the number of PCA components.
pub fn sweep_features(cfg: &ExperimentConfig, grid: &[usize]) -> Result<SweepReport> {
    cfg.validate()?;
    let ds = cfg.source.load()?;
    sweep_features_on(cfg, grid, &ds)
}

pub fn sweep_features_on(
    cfg: &ExperimentConfig,
    grid: &[usize],
    ds: &Dataset,
) -> Result<SweepReport> {
    check_grid(grid)?;
    if cfg.pca_k.is_none() {
        return Err(Error::Config("feature sweep needs PCA enabled".into()));
    }
    if let Some(&k) = grid.iter().find(|&&k| k == 0 || k > ds.dim()) {
        return Err(Error::Config(format!(
            "component count {k} not in [1, {}]",
            ds.dim()
        )));
    }
    let configs = grid
        .iter()
        .map(|&k| ExperimentConfig {
            pca_k: Some(k),
            ..cfg.clone()
        })
        .collect();
    sweep("pca_k", grid, configs, ds)
}
