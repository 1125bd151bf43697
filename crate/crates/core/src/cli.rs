//! Command-line front end. Every command reads an optional JSON config
//! (unknown keys rejected), applies inline flag overrides, validates, runs
//! and writes CSV/JSON outputs with `.meta.json` sidecars.
//!
//! Seed precedence: `--seed` flag, then `BAGBAYES_SEED`, then the config's
//! `root_seed`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bagging::{
    bag_exact, bag_monte_carlo, bagged_moments, choose_b_diagnostic, gaussian_location_bagged_moments_closed_form,
    BaggedMoments, BaggedPosterior,
};
use crate::error::Error;
use crate::experiments::{self, ExperimentSpec, MRule, ModelSpec, HISTOGRAM_BINS};
use crate::models::{Dataset, FlatLinRegModel, GaussianLocationModel, Model, NIGRegressionModel};
use crate::overlap::{self, GrowingDimArm, IntervalMode, LinregCase, PosteriorKind, SandwichInputs};
use crate::randstream::SeedPath;
use crate::sampler::{self, ExactGaussianLocationSampler, MetropolisProcedure, RwmHyper, SamplerConfig};
use crate::simgen::{self, BetaRule, DGPConfig, FKind, GKind, LocationScenario};

pub const SEED_ENV: &str = "BAGBAYES_SEED";
pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// A failure classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "bagbayes",
    version,
    about = "Bagged posteriors, overlap diagnostics and simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file; unknown keys are rejected
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing); overrides `output_dir`
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; overrides `threads`
    #[arg(long)]
    pub threads: Option<usize>,
    /// Root seed; overrides BAGBAYES_SEED and `root_seed`
    #[arg(long)]
    pub seed: Option<u64>,
}

const OVERLAP_SIM_KEYS: &str = "\
Config keys (JSON object):
  dgp                 {n, d, f_kind: linear|nonlinear,
                       g_kind: {kind: uncorrelated} | {kind: correlated, kappa, h}
                               | {kind: fixed-design-heteroskedastic},
                       beta_rule: four-over-sqrt-d | {explicit: [..]}, noiseless}
  model               {family: normal-inverse-gamma, a0, b0, lambda} | {family: flat-plug-in}
  m_rule              equal-to-n | {explicit: M}
  b                   bootstrap datasets per fit (default 20)
  r                   replicate pairs (default 20)
  levels              credibility levels 1-alpha (default [0.8, 0.9, 0.95])
  test_point_count    test points / directions (default 100)
  interval_mode       mixture-quantile | moment-matched-normal (bagged arm)
  full_scale          use r = 100, b = 50
  root_seed, output_dir, threads
Outputs: overlap.csv, summary.json, histogram.csv (+ .meta.json sidecars)";

const LOCATION_DEMO_KEYS: &str = "\
Config keys (JSON object):
  scenario            {true_mean, true_sd, model_v, prior_precision} (default 0, 5, 1, 0)
  n                   observations per dataset (default 100)
  num_datasets        datasets, at least 2 (default 6)
  alpha               1 - credibility (default 0.05)
  b                   bootstrap datasets (default 50)
  interval_mode       mixture-quantile | moment-matched-normal
  root_seed, output_dir, threads
Outputs: demo_datasets.csv, demo_pairs.csv, demo_summary.json (+ .meta.json sidecars)";

const ASYMPTOTIC_KEYS: &str = "\
Config keys (JSON object):
  setting             location | growing-dimension | regular | linear-regression
  arm                 standard | bagged (all settings except linear-regression)
  alpha               default 0.05
  c                   limiting M/N for bagged arms (default 1)
  model_cov, true_cov location: V and true covariance (matrix or scalar times I)
  u                   direction (location, regular; default all-ones of matching size)
  sigma_quadform, n, m  growing-dimension
  j, k                regular: J and K (matrix or scalar times I)
  case                linear-regression: correct | fixed-design | random-design-bound
  v, v_tilde, sigma, sigma_tilde, sigma_dagger, mean_offset, k   linear-regression
Matrices are row lists; a scalar s means s*I. Vector flags take comma lists.";

const BAG_FIT_KEYS: &str = "\
Config keys (JSON object):
  data                CSV path (header z_0..,y for regression or x_0.. for location)
  model               {family: gaussian-location, v, prior_precision}
                      | {family: normal-inverse-gamma, a0, b0, lambda}
                      | {family: flat, sigma2 (omit for residual-variance plug-in)}
  m                   bootstrap size (default N)
  b                   components (default 50)
  exact               enumerate all bootstrap datasets instead of sampling
  direction           u for the choose-B diagnostic (default e_0)
  root_seed, output_dir, threads
Outputs: bagged_posterior.json, moments.json, choose_b.json (+ .meta.json sidecars)";

const SAMPLE_KEYS: &str = "\
Config keys (JSON object):
  data, model         as for bag-fit
  procedure           rwm | exact (exact: gaussian-location only)
  t, t_flat, m, b     long-run length, short-run length, bootstrap size (default N), runs
  discard_fraction    extra leading fraction of each short run discarded (default 0)
  proposal_sd         initial random-walk scale (default 1)
  start               long-run initial state (default zeros)
  root_seed, output_dir, threads
Outputs: samples.csv, sampler_runs.json (+ .meta.json sidecars)";

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replicate-pair overlap simulation for linear regression
    #[command(after_long_help = OVERLAP_SIM_KEYS)]
    OverlapSim(OverlapSimArgs),
    /// Misspecified Gaussian location demonstration
    #[command(after_long_help = LOCATION_DEMO_KEYS)]
    LocationDemo(LocationDemoArgs),
    /// Closed-form asymptotic overlap probabilities
    #[command(after_long_help = ASYMPTOTIC_KEYS)]
    Asymptotic(AsymptoticArgs),
    /// Fit a bagged posterior to a CSV dataset
    #[command(after_long_help = BAG_FIT_KEYS)]
    BagFit(BagFitArgs),
    /// Long-run plus bootstrap-run MCMC sampler
    #[command(after_long_help = SAMPLE_KEYS)]
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct OverlapSimArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// linear | nonlinear
    #[arg(long)]
    pub f_kind: Option<String>,
    /// uncorrelated | correlated | fixed-design-heteroskedastic
    #[arg(long)]
    pub g_kind: Option<String>,
    /// Bandwidth for the correlated design
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Chi-squared degrees of freedom for the correlated design (default 10)
    #[arg(long)]
    pub h: Option<u32>,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Explicit bootstrap size M (default N)
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated levels, e.g. 0.8,0.9,0.95
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long)]
    pub test_points: Option<usize>,
    /// nig | flat
    #[arg(long)]
    pub model: Option<String>,
    /// mixture-quantile | moment-matched-normal
    #[arg(long)]
    pub interval_mode: Option<String>,
    /// Full-size replicate and bootstrap counts (r = 100, b = 50)
    #[arg(long)]
    pub full_scale: bool,
}

#[derive(Debug, Args)]
pub struct LocationDemoArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub num_datasets: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub true_sd: Option<f64>,
    #[arg(long)]
    pub model_v: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AsymptoticArgs {
    /// JSON config file; unknown keys are rejected
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print a JSON object instead of a bare number
    #[arg(long)]
    pub json: bool,
    /// location | growing-dimension | regular | linear-regression
    #[arg(long)]
    pub setting: Option<Setting>,
    /// standard | bagged
    #[arg(long)]
    pub arm: Option<String>,
    /// correct | fixed-design | random-design-bound
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub sigma_quadform: Option<f64>,
    /// Scalar V (times I)
    #[arg(long)]
    pub model_cov: Option<f64>,
    /// Scalar true covariance (times I)
    #[arg(long)]
    pub true_cov: Option<f64>,
    /// Scalar J (times I)
    #[arg(long)]
    pub j: Option<f64>,
    /// Scalar K (times I)
    #[arg(long)]
    pub k: Option<f64>,
    /// Comma-separated direction
    #[arg(long)]
    pub u: Option<String>,
    /// Comma-separated v
    #[arg(long)]
    pub v: Option<String>,
    /// Comma-separated v-tilde
    #[arg(long)]
    pub v_tilde: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub sigma_tilde: Option<f64>,
    #[arg(long)]
    pub sigma_dagger: Option<f64>,
    #[arg(long)]
    pub mean_offset: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BagFitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Dataset CSV; overrides `data`
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Dataset CSV; overrides `data`
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub t_flat: Option<usize>,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
}

// ---------------------------------------------------------------- configs

fn default_dgp() -> DGPConfig {
    DGPConfig::new(50, 50, FKind::Linear, GKind::Uncorrelated)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverlapSimConfig {
    #[serde(default = "default_dgp")]
    pub dgp: DGPConfig,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub m_rule: MRule,
    #[serde(default = "twenty")]
    pub b: usize,
    #[serde(default = "twenty")]
    pub r: usize,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "hundred")]
    pub test_point_count: usize,
    #[serde(default = "mixture_quantile")]
    pub interval_mode: IntervalMode,
    #[serde(default)]
    pub full_scale: bool,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn twenty() -> usize {
    20
}
fn fifty() -> usize {
    50
}
fn hundred() -> usize {
    100
}
fn six() -> usize {
    6
}
fn default_levels() -> Vec<f64> {
    experiments::DEFAULT_LEVELS.to_vec()
}
fn mixture_quantile() -> IntervalMode {
    IntervalMode::MixtureQuantile
}
fn default_alpha() -> f64 {
    0.05
}
fn one() -> f64 {
    1.0
}

impl Default for OverlapSimConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all keys have defaults")
    }
}

impl OverlapSimConfig {
    fn to_spec(&self) -> ExperimentSpec {
        let (r, b) = if self.full_scale { (100, 50) } else { (self.r, self.b) };
        ExperimentSpec {
            dgp: self.dgp.clone(),
            model: self.model,
            m_rule: self.m_rule,
            b,
            r,
            levels: self.levels.clone(),
            test_point_count: self.test_point_count,
            root_seed: self.root_seed,
            interval_mode: self.interval_mode,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationDemoConfig {
    #[serde(default = "LocationScenario::misspecified_demo")]
    pub scenario: LocationScenario,
    #[serde(default = "hundred")]
    pub n: usize,
    #[serde(default = "six")]
    pub num_datasets: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "fifty")]
    pub b: usize,
    #[serde(default = "mixture_quantile")]
    pub interval_mode: IntervalMode,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for LocationDemoConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all keys have defaults")
    }
}

/// A matrix given as rows, or a scalar meaning that multiple of the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixInput {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

impl MatrixInput {
    fn resolve(&self, dim: usize, what: &str) -> CliResult<DMatrix<f64>> {
        match self {
            MatrixInput::Scalar(s) => Ok(DMatrix::identity(dim, dim) * *s),
            MatrixInput::Rows(rows) => {
                let m = crate::linalg::from_rows(rows).map_err(|e| config_err(format!("{what}: {e}")))?;
                if m.shape() != (dim, dim) {
                    return Err(config_err(format!(
                        "{what} must be {dim}x{dim}, got {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                Ok(m)
            }
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            MatrixInput::Scalar(_) => None,
            MatrixInput::Rows(r) => Some(r.len()),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticConfig {
    pub setting: Option<Setting>,
    pub arm: Option<String>,
    pub case: Option<String>,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub model_cov: Option<MatrixInput>,
    pub true_cov: Option<MatrixInput>,
    pub u: Option<Vec<f64>>,
    pub sigma_quadform: Option<f64>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub j: Option<MatrixInput>,
    pub k: Option<MatrixInput>,
    pub v: Option<Vec<f64>>,
    pub v_tilde: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub sigma_tilde: Option<f64>,
    pub sigma_dagger: Option<f64>,
    pub mean_offset: Option<f64>,
}

/// Model choice for commands that fit user data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FitModelSpec {
    GaussianLocation {
        #[serde(default = "unit_matrix")]
        v: MatrixInput,
        #[serde(default = "zero_matrix")]
        prior_precision: MatrixInput,
    },
    NormalInverseGamma {
        #[serde(default = "two")]
        a0: f64,
        #[serde(default = "one")]
        b0: f64,
        #[serde(default = "one")]
        lambda: f64,
    },
    Flat {
        #[serde(default)]
        sigma2: Option<f64>,
    },
}

fn unit_matrix() -> MatrixInput {
    MatrixInput::Scalar(1.0)
}
fn zero_matrix() -> MatrixInput {
    MatrixInput::Scalar(0.0)
}
fn two() -> f64 {
    2.0
}

impl Default for FitModelSpec {
    fn default() -> Self {
        FitModelSpec::NormalInverseGamma {
            a0: 2.0,
            b0: 1.0,
            lambda: 1.0,
        }
    }
}

impl FitModelSpec {
    fn build(&self, data: &Dataset) -> CliResult<Model> {
        let d = data.dim();
        match self {
            FitModelSpec::GaussianLocation { v, prior_precision } => {
                if data.location_matrix().is_none() {
                    return Err(config_err("gaussian-location needs a location dataset (x_ columns)"));
                }
                let model =
                    GaussianLocationModel::new(v.resolve(d, "v")?, prior_precision.resolve(d, "prior_precision")?)
                        .map_err(config_err)?;
                Ok(Model::GaussianLocation(model))
            }
            FitModelSpec::NormalInverseGamma { a0, b0, lambda } => {
                require_regression(data)?;
                Ok(Model::NigRegression(
                    NIGRegressionModel::new(*a0, *b0, *lambda).map_err(config_err)?,
                ))
            }
            FitModelSpec::Flat { sigma2 } => {
                require_regression(data)?;
                let s2 = match sigma2 {
                    Some(s) => *s,
                    None => FlatLinRegModel::residual_variance(data).map_err(config_err)?,
                };
                Ok(Model::FlatLinReg(FlatLinRegModel::new(s2).map_err(config_err)?))
            }
        }
    }

    /// Dimension of the sampled parameter.
    fn param_dim(&self, data: &Dataset) -> usize {
        match self {
            FitModelSpec::NormalInverseGamma { .. } => data.dim() + 1,
            _ => data.dim(),
        }
    }
}

fn require_regression(data: &Dataset) -> CliResult<()> {
    if data.regression_parts().is_none() {
        return Err(config_err("regression models need a dataset whose last column is y"));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BagFitConfig {
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub model: FitModelSpec,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "fifty")]
    pub b: usize,
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for BagFitConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all keys have defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcedureKind {
    Rwm,
    Exact,
}

fn rwm() -> ProcedureKind {
    ProcedureKind::Rwm
}
fn default_t() -> usize {
    2000
}
fn default_t_flat() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub model: FitModelSpec,
    #[serde(default = "rwm")]
    pub procedure: ProcedureKind,
    #[serde(default = "default_t")]
    pub t: usize,
    #[serde(default = "default_t_flat")]
    pub t_flat: usize,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "twenty")]
    pub b: usize,
    #[serde(default)]
    pub discard_fraction: f64,
    #[serde(default = "one")]
    pub proposal_sd: f64,
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all keys have defaults")
    }
}

// ---------------------------------------------------------------- helpers

/// Parses a JSON config; syntax and schema errors carry `path:line:column`.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
}

fn resolve_seed(flag: Option<u64>, config_seed: u64) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| config_err(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(config_seed),
    }
}

fn set_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(config_err("threads must be at least 1"));
        }
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(())
}

fn parse_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| config_err(format!("{what}: cannot parse {p:?} as a number")))
        })
        .collect()
}

fn parse_enum<T: DeserializeOwned>(value: &str, what: &str) -> CliResult<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| config_err(format!("unknown {what} {value:?}")))
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    artifact: &'a str,
    version: &'a str,
    command: &'a str,
    file: &'a str,
    root_seed: u64,
    config_sha256: String,
    config: &'a serde_json::Value,
}

/// Writes files into an output directory, each with a `.meta.json` sidecar.
struct OutputDir<'a> {
    dir: PathBuf,
    command: &'a str,
    seed: u64,
    config: serde_json::Value,
    hash: String,
}

impl<'a> OutputDir<'a> {
    fn new<C: Serialize>(dir: PathBuf, command: &'a str, seed: u64, config: &C) -> CliResult<Self> {
        fs::create_dir_all(&dir).map_err(|e| runtime_err(format!("{}: {e}", dir.display())))?;
        let config = serde_json::to_value(config).map_err(runtime_err)?;
        let hash = hex::encode(Sha256::digest(serde_json::to_vec(&config).map_err(runtime_err)?));
        Ok(Self {
            dir,
            command,
            seed,
            config,
            hash,
        })
    }

    fn write(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| runtime_err(format!("{}: {e}", path.display())))?;
        let meta = Meta {
            artifact: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            file: name,
            root_seed: self.seed,
            config_sha256: self.hash.clone(),
            config: &self.config,
        };
        let mut text = serde_json::to_vec_pretty(&meta).map_err(runtime_err)?;
        text.push(b'\n');
        let meta_path = self.dir.join(format!("{name}.meta.json"));
        fs::write(&meta_path, text).map_err(|e| runtime_err(format!("{}: {e}", meta_path.display())))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_vec_pretty(value).map_err(runtime_err)?;
        text.push(b'\n');
        self.write(name, &text)
    }

    fn write_csv(&self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> crate::Result<()>) -> CliResult<()> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(runtime_err)?;
        self.write(name, &buf)
    }
}

fn output_dir(flag: &Option<PathBuf>, config: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| config.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Library errors raised while checking inputs are configuration errors.
fn classify_validation(e: Error) -> CliError {
    config_err(e)
}

// ---------------------------------------------------------------- commands

pub fn cmd_overlap_sim(args: &OverlapSimArgs) -> CliResult<()> {
    let mut cfg: OverlapSimConfig = load_config(args.common.config.as_deref())?;
    if let Some(n) = args.n {
        cfg.dgp.n = n;
    }
    if let Some(d) = args.d {
        cfg.dgp.d = d;
    }
    if let Some(f) = &args.f_kind {
        cfg.dgp.f_kind = parse_enum(f, "f_kind")?;
    }
    if let Some(g) = &args.g_kind {
        cfg.dgp.g_kind = match g.as_str() {
            "uncorrelated" => GKind::Uncorrelated,
            "fixed-design-heteroskedastic" => GKind::FixedDesignHeteroskedastic,
            "correlated" => GKind::Correlated {
                kappa: args
                    .kappa
                    .ok_or_else(|| config_err("--g-kind correlated needs --kappa"))?,
                h: args.h.unwrap_or(10),
            },
            other => return Err(config_err(format!("unknown g_kind {other:?}"))),
        };
    } else if let GKind::Correlated { kappa, h } = &mut cfg.dgp.g_kind {
        if let Some(k) = args.kappa {
            *kappa = k;
        }
        if let Some(v) = args.h {
            *h = v;
        }
    }
    if let Some(b) = args.b {
        cfg.b = b;
    }
    if let Some(r) = args.r {
        cfg.r = r;
    }
    if let Some(m) = args.m {
        cfg.m_rule = MRule::Explicit(m);
    }
    if let Some(l) = &args.levels {
        cfg.levels = parse_list(l, "levels")?;
    }
    if let Some(t) = args.test_points {
        cfg.test_point_count = t;
    }
    if let Some(m) = &args.model {
        cfg.model = match m.as_str() {
            "nig" | "normal-inverse-gamma" => ModelSpec::default(),
            "flat" | "flat-plug-in" => ModelSpec::FlatPlugIn,
            other => return Err(config_err(format!("unknown model {other:?}"))),
        };
    }
    if let Some(mode) = &args.interval_mode {
        cfg.interval_mode = parse_enum(mode, "interval_mode")?;
    }
    cfg.full_scale |= args.full_scale;
    cfg.root_seed = resolve_seed(args.common.seed, cfg.root_seed)?;
    if let Some(t) = args.common.threads {
        cfg.threads = Some(t);
    }
    if let BetaRule::Explicit(_) = cfg.dgp.beta_rule {
        // explicit beta must match d after overrides; validated below
    }
    let spec = cfg.to_spec();
    spec.validate().map_err(classify_validation)?;
    set_threads(cfg.threads)?;
    let out = OutputDir::new(
        output_dir(&args.common.out, &cfg.output_dir),
        "overlap-sim",
        cfg.root_seed,
        &cfg,
    )?;
    let result = experiments::run_overlap_experiment(&spec).map_err(runtime_err)?;
    out.write_csv("overlap.csv", |w| result.write_overlap_csv(w))?;
    out.write_json("summary.json", &result.summary())?;
    out.write_csv("histogram.csv", |w| result.write_histogram_csv(w, HISTOGRAM_BINS))?;
    Ok(())
}

pub fn cmd_location_demo(args: &LocationDemoArgs) -> CliResult<()> {
    let mut cfg: LocationDemoConfig = load_config(args.common.config.as_deref())?;
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(k) = args.num_datasets {
        cfg.num_datasets = k;
    }
    if let Some(a) = args.alpha {
        cfg.alpha = a;
    }
    if let Some(b) = args.b {
        cfg.b = b;
    }
    if let Some(s) = args.true_sd {
        cfg.scenario.true_sd = s;
    }
    if let Some(v) = args.model_v {
        cfg.scenario.model_v = v;
    }
    cfg.root_seed = resolve_seed(args.common.seed, cfg.root_seed)?;
    if let Some(t) = args.common.threads {
        cfg.threads = Some(t);
    }
    cfg.scenario.validate().map_err(classify_validation)?;
    if cfg.num_datasets < 2 {
        return Err(config_err(format!(
            "num_datasets must be at least 2, got {}",
            cfg.num_datasets
        )));
    }
    if cfg.n == 0 || cfg.b == 0 {
        return Err(config_err("n and b must be positive"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(config_err(format!("alpha must lie in (0, 1), got {}", cfg.alpha)));
    }
    set_threads(cfg.threads)?;
    let out = OutputDir::new(
        output_dir(&args.common.out, &cfg.output_dir),
        "location-demo",
        cfg.root_seed,
        &cfg,
    )?;
    let summary = experiments::location_demo_experiment(
        &cfg.scenario,
        cfg.n,
        cfg.num_datasets,
        cfg.alpha,
        cfg.b,
        cfg.interval_mode,
        &SeedPath::root(cfg.root_seed),
    )
    .map_err(runtime_err)?;
    out.write_csv("demo_datasets.csv", |w| summary.write_datasets_csv(w))?;
    out.write_csv("demo_pairs.csv", |w| summary.write_pairs_csv(w))?;
    #[derive(Serialize)]
    struct Rates {
        standard_overlap_rate: f64,
        bagged_overlap_rate: f64,
        pairs: usize,
    }
    out.write_json(
        "demo_summary.json",
        &Rates {
            standard_overlap_rate: summary.standard_overlap_rate,
            bagged_overlap_rate: summary.bagged_overlap_rate,
            pairs: summary.pairs.len(),
        },
    )?;
    Ok(())
}

/// Which asymptotic overlap formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    /// Gaussian location model, fixed dimension
    Location,
    /// Gaussian location model with dimension growing with N
    GrowingDimension,
    /// Regular parametric model via the sandwich covariance
    Regular,
    /// Linear regression functionals
    LinearRegression,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticOutput {
    pub setting: Setting,
    pub probability: f64,
    /// True when the value is a bound rather than the limit itself.
    pub is_bound: bool,
}

fn required<T: Clone>(v: &Option<T>, key: &str, setting: Setting) -> CliResult<T> {
    v.clone()
        .ok_or_else(|| config_err(format!("setting {setting:?} needs `{key}`")))
}

fn arm(cfg: &AsymptoticConfig) -> CliResult<PosteriorKind> {
    match cfg.arm.as_deref().unwrap_or("standard") {
        "standard" => Ok(PosteriorKind::Standard),
        "bagged" => Ok(PosteriorKind::Bagged),
        other => Err(config_err(format!("unknown arm {other:?} (standard | bagged)"))),
    }
}

pub fn evaluate_asymptotic(cfg: &AsymptoticConfig) -> CliResult<AsymptoticOutput> {
    let setting = cfg
        .setting
        .ok_or_else(|| config_err("missing `setting` (location | growing-dimension | regular | linear-regression)"))?;
    let alpha = cfg.alpha.unwrap_or(0.05);
    let c = cfg.c.unwrap_or(1.0);
    let direction = |dims: &[Option<usize>]| -> DVector<f64> {
        match &cfg.u {
            Some(u) => DVector::from_column_slice(u),
            None => DVector::from_element(dims.iter().flatten().copied().next().unwrap_or(1), 1.0),
        }
    };
    let (probability, is_bound) = match setting {
        Setting::Location => {
            let v = required(&cfg.model_cov, "model_cov", setting)?;
            let s = required(&cfg.true_cov, "true_cov", setting)?;
            let u = direction(&[v.dim(), s.dim()]);
            let d = u.len();
            let p = overlap::asymptotic_overlap_location(
                &v.resolve(d, "model_cov")?,
                &s.resolve(d, "true_cov")?,
                &u,
                alpha,
                c,
                arm(cfg)?,
            )
            .map_err(config_err)?;
            (p, false)
        }
        Setting::GrowingDimension => {
            let q = required(&cfg.sigma_quadform, "sigma_quadform", setting)?;
            let (which, n, m) = match arm(cfg)? {
                PosteriorKind::Standard => (GrowingDimArm::StandardExact, cfg.n.unwrap_or(2), cfg.m.unwrap_or(1)),
                PosteriorKind::Bagged => {
                    let n = required(&cfg.n, "n", setting)?;
                    (GrowingDimArm::BaggedLowerBound, n, cfg.m.unwrap_or(n))
                }
            };
            let p = overlap::growing_dim_overlap(q, alpha, n, m, which).map_err(config_err)?;
            (p, which == GrowingDimArm::BaggedLowerBound)
        }
        Setting::Regular => {
            let j = required(&cfg.j, "j", setting)?;
            let k = required(&cfg.k, "k", setting)?;
            let u = direction(&[j.dim(), k.dim()]);
            let d = u.len();
            let inputs =
                SandwichInputs::new(j.resolve(d, "j")?, k.resolve(d, "k")?, c, u, alpha).map_err(config_err)?;
            (
                overlap::asymptotic_overlap_regular(&inputs, arm(cfg)?).map_err(config_err)?,
                false,
            )
        }
        Setting::LinearRegression => {
            let case = cfg.case.as_deref().unwrap_or("correct");
            let v = DVector::from_column_slice(&required(&cfg.v, "v", setting)?);
            let sigma = required(&cfg.sigma, "sigma", setting)?;
            let sigma_tilde = cfg.sigma_tilde.unwrap_or(sigma);
            let lin = match case {
                "correct" => LinregCase::Correct {
                    v_tilde: cfg
                        .v_tilde
                        .as_ref()
                        .map_or_else(|| v.clone(), |t| DVector::from_column_slice(t)),
                    v,
                    sigma,
                    sigma_tilde,
                    sigma_dagger: required(&cfg.sigma_dagger, "sigma_dagger", setting)?,
                },
                "fixed-design" => {
                    let n = v.len();
                    LinregCase::FixedDesign {
                        k: required(&cfg.k, "k", setting)?.resolve(n, "k")?,
                        v,
                        sigma,
                        sigma_tilde,
                    }
                }
                "random-design-bound" => LinregCase::RandomDesignBound {
                    v_tilde: DVector::from_column_slice(&required(&cfg.v_tilde, "v_tilde", setting)?),
                    v,
                    sigma,
                    sigma_tilde,
                    sigma_dagger: required(&cfg.sigma_dagger, "sigma_dagger", setting)?,
                    mean_offset: cfg.mean_offset.unwrap_or(0.0),
                },
                other => return Err(config_err(format!("unknown case {other:?}"))),
            };
            let out = overlap::linreg_overlap(&lin, alpha).map_err(config_err)?;
            (out.probability, out.upper_bound)
        }
    };
    Ok(AsymptoticOutput {
        setting,
        probability,
        is_bound,
    })
}

pub fn cmd_asymptotic(args: &AsymptoticArgs) -> CliResult<String> {
    let mut cfg: AsymptoticConfig = load_config(args.config.as_deref())?;
    macro_rules! set {
        ($($field:ident),*) => {$(
            if args.$field.is_some() {
                cfg.$field = args.$field.clone();
            }
        )*};
    }
    set!(
        setting,
        arm,
        case,
        alpha,
        c,
        n,
        m,
        sigma_quadform,
        sigma,
        sigma_tilde,
        sigma_dagger,
        mean_offset
    );
    for (flag, slot) in [
        (args.model_cov, &mut cfg.model_cov),
        (args.true_cov, &mut cfg.true_cov),
        (args.j, &mut cfg.j),
        (args.k, &mut cfg.k),
    ] {
        if let Some(s) = flag {
            *slot = Some(MatrixInput::Scalar(s));
        }
    }
    for (flag, slot, what) in [
        (&args.u, &mut cfg.u, "u"),
        (&args.v, &mut cfg.v, "v"),
        (&args.v_tilde, &mut cfg.v_tilde, "v_tilde"),
    ] {
        if let Some(s) = flag {
            *slot = Some(parse_list(s, what)?);
        }
    }
    let out = evaluate_asymptotic(&cfg)?;
    if args.json {
        serde_json::to_string(&out).map_err(runtime_err)
    } else {
        Ok(format!("{:.6}", out.probability))
    }
}

fn load_dataset(path: &Option<PathBuf>) -> CliResult<Dataset> {
    let path = path
        .as_ref()
        .ok_or_else(|| config_err("missing `data` (dataset CSV path)"))?;
    let file = fs::File::open(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    simgen::read_dataset_csv(file).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

#[derive(Debug, Serialize)]
struct MomentsFile {
    /// False when the components were sampled, so the closed-form gap includes Monte Carlo error.
    exact_enumeration: bool,
    bagged: BaggedMoments,
    closed_form: Option<BaggedMoments>,
    max_abs_difference: Option<f64>,
}

#[derive(Debug, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
enum ChooseBFile {
    Ok(crate::bagging::ChooseBDiagnostic),
    InsufficientComponents { components: usize, message: String },
    NotApplicable { message: String },
}

fn max_abs_diff(a: &BaggedMoments, b: &BaggedMoments) -> f64 {
    let mean = (a.mean_vector() - b.mean_vector()).amax();
    let cov = (a.cov_matrix() - b.cov_matrix()).amax();
    mean.max(cov)
}

pub fn cmd_bag_fit(args: &BagFitArgs) -> CliResult<()> {
    let mut cfg: BagFitConfig = load_config(args.common.config.as_deref())?;
    if args.data.is_some() {
        cfg.data = args.data.clone();
    }
    if let Some(b) = args.b {
        cfg.b = b;
    }
    if let Some(m) = args.m {
        cfg.m = Some(m);
    }
    cfg.exact |= args.exact;
    cfg.root_seed = resolve_seed(args.common.seed, cfg.root_seed)?;
    if let Some(t) = args.common.threads {
        cfg.threads = Some(t);
    }
    let data = load_dataset(&cfg.data)?;
    let model = cfg.model.build(&data)?;
    let m = cfg.m.unwrap_or(data.n());
    if m == 0 {
        return Err(config_err("m must be positive"));
    }
    if cfg.b == 0 && !cfg.exact {
        return Err(config_err("b must be at least 1"));
    }
    let u = match &cfg.direction {
        Some(u) => DVector::from_column_slice(u),
        None => DVector::from_fn(data.dim(), |i, _| if i == 0 { 1.0 } else { 0.0 }),
    };
    if u.len() != data.dim() || u.norm() == 0.0 {
        return Err(config_err(format!(
            "direction must be a nonzero vector of length {}",
            data.dim()
        )));
    }
    set_threads(cfg.threads)?;
    let out = OutputDir::new(
        output_dir(&args.common.out, &cfg.output_dir),
        "bag-fit",
        cfg.root_seed,
        &cfg,
    )?;
    let bp: BaggedPosterior = if cfg.exact {
        bag_exact(&model, &data, m).map_err(|e| match e {
            Error::EnumerationTooLarge { .. } => config_err(e),
            other => runtime_err(other),
        })?
    } else {
        bag_monte_carlo(&model, &data, m, cfg.b, &SeedPath::root(cfg.root_seed)).map_err(runtime_err)?
    };
    out.write_json("bagged_posterior.json", &bp.to_json())?;
    let bagged = bagged_moments(&bp).map_err(runtime_err)?;
    let closed_form = match &model {
        Model::GaussianLocation(g) => {
            Some(gaussian_location_bagged_moments_closed_form(g, &data, m).map_err(runtime_err)?)
        }
        _ => None,
    };
    let max_abs_difference = closed_form.as_ref().map(|c| max_abs_diff(&bagged, c));
    out.write_json(
        "moments.json",
        &MomentsFile {
            exact_enumeration: cfg.exact,
            bagged,
            closed_form,
            max_abs_difference,
        },
    )?;
    let diag = match choose_b_diagnostic(&bp, &u) {
        Ok(d) => ChooseBFile::Ok(d),
        Err(e @ Error::InsufficientComponents(k)) => ChooseBFile::InsufficientComponents {
            components: k,
            message: e.to_string(),
        },
        Err(e @ Error::InvalidArgument(_)) if cfg.exact => ChooseBFile::NotApplicable {
            message: format!("exact enumeration has no Monte Carlo error: {e}"),
        },
        Err(e) => return Err(runtime_err(e)),
    };
    out.write_json("choose_b.json", &diag)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SamplerRunsFile<H: Serialize> {
    long_run_hyper: H,
    runs: Vec<sampler::ShortRunMeta<H>>,
}

pub fn cmd_sample(args: &SampleArgs) -> CliResult<()> {
    let mut cfg: SampleConfig = load_config(args.common.config.as_deref())?;
    if args.data.is_some() {
        cfg.data = args.data.clone();
    }
    if let Some(t) = args.t {
        cfg.t = t;
    }
    if let Some(t) = args.t_flat {
        cfg.t_flat = t;
    }
    if let Some(b) = args.b {
        cfg.b = b;
    }
    if let Some(m) = args.m {
        cfg.m = Some(m);
    }
    cfg.root_seed = resolve_seed(args.common.seed, cfg.root_seed)?;
    if let Some(t) = args.common.threads {
        cfg.threads = Some(t);
    }
    let data = load_dataset(&cfg.data)?;
    let model = cfg.model.build(&data)?;
    let sampler_cfg = SamplerConfig {
        t: cfg.t,
        t_flat: cfg.t_flat,
        m: cfg.m.unwrap_or(data.n()),
        b: cfg.b,
        discard_fraction: cfg.discard_fraction,
    };
    sampler_cfg.validate().map_err(classify_validation)?;
    let dim = cfg.model.param_dim(&data);
    let start = cfg.start.clone().unwrap_or_else(|| vec![0.0; dim]);
    if start.len() != dim {
        return Err(config_err(format!(
            "start must have {dim} entries, got {}",
            start.len()
        )));
    }
    if !(cfg.proposal_sd > 0.0 && cfg.proposal_sd.is_finite()) {
        return Err(config_err(format!(
            "proposal_sd must be positive, got {}",
            cfg.proposal_sd
        )));
    }
    set_threads(cfg.threads)?;
    let out = OutputDir::new(
        output_dir(&args.common.out, &cfg.output_dir),
        "sample",
        cfg.root_seed,
        &cfg,
    )?;
    let root = SeedPath::root(cfg.root_seed);
    match cfg.procedure {
        ProcedureKind::Rwm => {
            let proc_ = MetropolisProcedure {
                model,
                default_start: start,
            };
            let hyper = RwmHyper {
                proposal_sd: cfg.proposal_sd,
            };
            let res = sampler::bayesbag_sample(&proc_, &data, &sampler_cfg, &hyper, &root).map_err(runtime_err)?;
            out.write_csv("samples.csv", |w| res.write_csv(w))?;
            out.write_json(
                "sampler_runs.json",
                &SamplerRunsFile {
                    long_run_hyper: res.long_run_hyper,
                    runs: res.runs,
                },
            )?;
        }
        ProcedureKind::Exact => {
            let Model::GaussianLocation(g) = model else {
                return Err(config_err("procedure `exact` is only available for gaussian-location"));
            };
            let proc_ = ExactGaussianLocationSampler { model: g };
            let res = sampler::bayesbag_sample(&proc_, &data, &sampler_cfg, &(), &root).map_err(runtime_err)?;
            out.write_csv("samples.csv", |w| res.write_csv(w))?;
            out.write_json(
                "sampler_runs.json",
                &SamplerRunsFile {
                    long_run_hyper: res.long_run_hyper,
                    runs: res.runs,
                },
            )?;
        }
    }
    Ok(())
}

/// Runs the CLI on `argv` and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::OverlapSim(a) => cmd_overlap_sim(a),
        Command::LocationDemo(a) => cmd_location_demo(a),
        Command::Asymptotic(a) => cmd_asymptotic(a).map(|s| println!("{s}")),
        Command::BagFit(a) => cmd_bag_fit(a),
        Command::Sample(a) => cmd_sample(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn asym(json: &str) -> CliResult<AsymptoticOutput> {
        serde_json::from_str(json)
            .map_err(config_err)
            .and_then(|c| evaluate_asymptotic(&c))
    }

    #[test]
    fn asymptotic_examples() {
        let p = asym(r#"{"setting": "location", "model_cov": 1.0, "true_cov": 1.0}"#).unwrap();
        assert!((p.probability - 0.994410).abs() < 1e-4);
        let p = asym(r#"{"setting": "growing-dimension", "arm": "bagged", "sigma_quadform": 1.0, "n": 2, "m": 2}"#)
            .unwrap();
        assert!((p.probability - 0.699896).abs() < 1e-4);
        assert!(p.is_bound);
        let p =
            asym(r#"{"setting": "linear-regression", "case": "fixed-design", "v": [0.5, -1.0, 2.0], "sigma": 1.0, "k": 4.0}"#).unwrap();
        assert!((p.probability - 0.834263).abs() < 1e-4);
    }

    #[test]
    fn asymptotic_errors_are_config_errors() {
        assert!(matches!(asym(r#"{"setting": "bogus"}"#), Err(CliError::Config(_))));
        assert!(matches!(
            asym(r#"{"setting": "location", "model_cov": 1.0}"#),
            Err(CliError::Config(_))
        ));
        assert!(matches!(
            asym(r#"{"setting": "regular", "j": [[1, 1], [1, 1]], "k": 1.0}"#),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn unknown_keys_rejected_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, "{\n  \"n\": 10,\n  \"bogus\": 1\n}\n").unwrap();
        match load_config::<LocationDemoConfig>(Some(&path)) {
            Err(CliError::Config(msg)) => assert!(msg.contains(":3:"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn defaults_parse() {
        let _ = OverlapSimConfig::default();
        let _ = LocationDemoConfig::default();
        let _ = BagFitConfig::default();
        let _ = SampleConfig::default();
    }
}
