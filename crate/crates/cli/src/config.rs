//! Run configuration: defaults, a flat key=value config file, and
//! command-line overrides of the same names.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: String,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_step: f64,
    pub k_eigen: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub workers: usize,
    pub reference: Option<String>,
    pub state_file: Option<PathBuf>,
    pub ed_sizes: Vec<usize>,
}

/// Raw option sources before resolution; every field optional.
#[derive(Debug, Clone, Default)]
pub struct PartialConfig {
    pub geometry: Option<String>,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_step: Option<f64>,
    pub k_eigen: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub reference: Option<String>,
    pub state_file: Option<PathBuf>,
    pub ed_sizes: Option<String>,
}

impl PartialConfig {
    /// Parse a flat `key=value` file; `#` starts a comment, blank lines are
    /// skipped, keys match the command-line flag names.
    pub fn from_file(path: &Path) -> Result<PartialConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut cfg = PartialConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key=value", path.display(), lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let ctx = || format!("{}:{}: bad value for `{key}`", path.display(), lineno + 1);
            match key {
                "geometry" => cfg.geometry = Some(value.to_string()),
                "lambda-min" => cfg.lambda_min = Some(value.parse().with_context(ctx)?),
                "lambda-max" => cfg.lambda_max = Some(value.parse().with_context(ctx)?),
                "lambda-step" => cfg.lambda_step = Some(value.parse().with_context(ctx)?),
                "k" => cfg.k_eigen = Some(value.parse().with_context(ctx)?),
                "tol" => cfg.tol = Some(value.parse().with_context(ctx)?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "seed" => cfg.seed = Some(value.parse().with_context(ctx)?),
                "workers" => cfg.workers = Some(value.parse().with_context(ctx)?),
                "reference" => cfg.reference = Some(value.to_string()),
                "state-file" => cfg.state_file = Some(PathBuf::from(value)),
                "ed-sizes" => cfg.ed_sizes = Some(value.to_string()),
                other => bail!("{}:{}: unknown config key `{other}`", path.display(), lineno + 1),
            }
        }
        Ok(cfg)
    }

    /// Fields set here win over `fallback`.
    pub fn or(self, fallback: PartialConfig) -> PartialConfig {
        PartialConfig {
            geometry: self.geometry.or(fallback.geometry),
            lambda_min: self.lambda_min.or(fallback.lambda_min),
            lambda_max: self.lambda_max.or(fallback.lambda_max),
            lambda_step: self.lambda_step.or(fallback.lambda_step),
            k_eigen: self.k_eigen.or(fallback.k_eigen),
            tol: self.tol.or(fallback.tol),
            out: self.out.or(fallback.out),
            seed: self.seed.or(fallback.seed),
            workers: self.workers.or(fallback.workers),
            reference: self.reference.or(fallback.reference),
            state_file: self.state_file.or(fallback.state_file),
            ed_sizes: self.ed_sizes.or(fallback.ed_sizes),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let lambda_min = self.lambda_min.unwrap_or(0.0);
        let lambda_max = self.lambda_max.unwrap_or(lambda_min);
        let lambda_step = self.lambda_step.unwrap_or(0.05);
        if !(lambda_step > 0.0) {
            bail!("lambda-step must be positive, got {lambda_step}");
        }
        if lambda_min > lambda_max {
            bail!("lambda-min {lambda_min} exceeds lambda-max {lambda_max}");
        }
        let ed_sizes = match self.ed_sizes {
            None => Vec::new(),
            Some(s) => s
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<usize>().context("ed-sizes expects integers"))
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(RunConfig {
            geometry: self.geometry.unwrap_or_default(),
            lambda_min,
            lambda_max,
            lambda_step,
            k_eigen: self.k_eigen.unwrap_or(6),
            tol: self.tol.unwrap_or(1e-10),
            out: self.out,
            seed: self.seed.unwrap_or(1),
            workers: self.workers.unwrap_or(0),
            reference: self.reference,
            state_file: self.state_file,
            ed_sizes,
        })
    }
}

impl RunConfig {
    /// The coupling grid, inclusive of both ends.
    pub fn lambda_grid(&self) -> Vec<f64> {
        let count = ((self.lambda_max - self.lambda_min) / self.lambda_step + 1e-9).floor() as usize;
        (0..=count)
            .map(|i| self.lambda_min + self.lambda_step * i as f64)
            .collect()
    }
}
