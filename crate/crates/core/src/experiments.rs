//! Replicate-pair experiments: overlap estimation for regression and
//! location models, bound-violation summaries, MLPD comparisons and paired
//! t intervals.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bagging::{bag_monte_carlo, bagged_predictive_log_density, BaggedPosterior};
use crate::error::{Error, Result};
use crate::models::{ConjugateModel, Dataset, FlatLinRegModel, GaussianLocationModel, Model, NIGRegressionModel};
use crate::overlap::{
    estimate_overlap, intervals_overlap, overlap_indicators, DirectionalPosterior, IntervalMode, OverlapReport,
};
use crate::randstream::SeedPath;
use crate::simgen::{self, DGPConfig, LocationScenario};
use crate::special;

pub const DEFAULT_LEVELS: [f64; 3] = [0.8, 0.9, 0.95];
pub const HISTOGRAM_BINS: usize = 20;

fn default_levels() -> Vec<f64> {
    DEFAULT_LEVELS.to_vec()
}
fn default_b() -> usize {
    20
}
fn default_r() -> usize {
    20
}
fn default_test_points() -> usize {
    100
}
fn default_mode() -> IntervalMode {
    IntervalMode::MixtureQuantile
}
fn default_a0() -> f64 {
    2.0
}
fn default_b0() -> f64 {
    1.0
}
fn default_lambda() -> f64 {
    1.0
}

/// Regression model fitted in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    NormalInverseGamma {
        #[serde(default = "default_a0")]
        a0: f64,
        #[serde(default = "default_b0")]
        b0: f64,
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    /// Flat prior with the unbiased residual variance of each dataset
    /// plugged in for `sigma^2`.
    FlatPlugIn,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::NormalInverseGamma {
            a0: 2.0,
            b0: 1.0,
            lambda: 1.0,
        }
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if let ModelSpec::NormalInverseGamma { a0, b0, lambda } = *self {
            NIGRegressionModel::new(a0, b0, lambda)?;
        }
        Ok(())
    }

    /// The concrete model for one dataset.
    pub fn model_for(&self, data: &Dataset) -> Result<Model> {
        match *self {
            ModelSpec::NormalInverseGamma { a0, b0, lambda } => {
                Ok(Model::NigRegression(NIGRegressionModel::new(a0, b0, lambda)?))
            }
            ModelSpec::FlatPlugIn => Ok(Model::FlatLinReg(FlatLinRegModel::new(
                FlatLinRegModel::residual_variance(data)?,
            )?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MRule {
    #[default]
    EqualToN,
    Explicit(usize),
}

impl MRule {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            MRule::EqualToN => n,
            MRule::Explicit(m) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub dgp: DGPConfig,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub m_rule: MRule,
    #[serde(default = "default_b")]
    pub b: usize,
    #[serde(default = "default_r")]
    pub r: usize,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "default_test_points")]
    pub test_point_count: usize,
    #[serde(default)]
    pub root_seed: u64,
    /// Interval construction for the bagged arm.
    #[serde(default = "default_mode")]
    pub interval_mode: IntervalMode,
}

impl ExperimentSpec {
    pub fn new(dgp: DGPConfig) -> Self {
        Self {
            dgp,
            model: ModelSpec::default(),
            m_rule: MRule::EqualToN,
            b: default_b(),
            r: default_r(),
            levels: default_levels(),
            test_point_count: default_test_points(),
            root_seed: 0,
            interval_mode: default_mode(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        self.model.validate()?;
        check_levels(&self.levels)?;
        if self.r == 0 {
            return Err(Error::invalid("r must be at least 1"));
        }
        if self.b == 0 {
            return Err(Error::invalid("b must be at least 1"));
        }
        if self.test_point_count == 0 {
            return Err(Error::invalid("test_point_count must be at least 1"));
        }
        if self.m_rule.resolve(self.dgp.n) == 0 {
            return Err(Error::invalid("bootstrap size m must be positive"));
        }
        Ok(())
    }
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::invalid("at least one level is required"));
    }
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::invalid(format!("levels must lie in (0, 1), got {l}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Standard,
    Bagged,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Standard => "standard",
            Method::Bagged => "bagged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelFraction {
    pub level: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: Method,
    pub report: OverlapReport,
    /// Fraction of test points with estimated overlap below `level^2`.
    pub violation_fractions: Vec<LevelFraction>,
    pub mlpd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub standard: MethodResult,
    pub bagged: MethodResult,
    /// Violation fractions of the bagged arm with moment-matched intervals.
    pub bagged_moment_matched_violation_fractions: Vec<LevelFraction>,
    /// Per-replicate MLPD differences, bagged minus standard.
    pub mlpd_differences: Vec<f64>,
    /// 99% paired t interval; absent with fewer than two replicates.
    pub mlpd_diff_ci: Option<(f64, f64)>,
    pub replicates_used: usize,
    pub failed_replicates: usize,
}

fn violation_fractions(report: &OverlapReport, levels: &[f64]) -> Vec<LevelFraction> {
    levels
        .iter()
        .map(|&level| LevelFraction {
            level,
            fraction: report.violation_fraction(level),
        })
        .collect()
}

struct ReplicateOutcome {
    standard: Vec<Vec<bool>>,
    bagged: Vec<Vec<bool>>,
    bagged_mm: Vec<Vec<bool>>,
    mlpd_standard: f64,
    mlpd_bagged: f64,
}

/// Substream layout: test points at `root/0`, replicate `r` under `root/1/r`
/// with datasets at `/0` and `/1`, test outcomes at `/2` and bootstrap
/// streams at `/3/k`.
fn replicate_path(root: &SeedPath, r: usize) -> SeedPath {
    root.child(1).child(r as u32)
}

fn run_replicate(
    spec: &ExperimentSpec,
    rep: &SeedPath,
    test_z: &DMatrix<f64>,
    directions: &[DVector<f64>],
) -> Result<ReplicateOutcome> {
    let data = [
        simgen::gen_regression_data(&spec.dgp, &rep.child(0))?,
        simgen::gen_regression_data(&spec.dgp, &rep.child(1))?,
    ];
    let test_y = simgen::gen_outcomes(&spec.dgp, test_z, &rep.child(2))?;
    let m = spec.m_rule.resolve(spec.dgp.n);
    let mut standard = Vec::with_capacity(2);
    let mut bagged: Vec<BaggedPosterior> = Vec::with_capacity(2);
    let mut models = Vec::with_capacity(2);
    for (k, d) in data.iter().enumerate() {
        let model = spec.model.model_for(d)?;
        standard.push(model.fit(d)?);
        bagged.push(bag_monte_carlo(&model, d, m, spec.b, &rep.child(3).child(k as u32))?);
        models.push(model);
    }
    let levels = &spec.levels;
    let std_ind = overlap_indicators(&standard[0], &standard[1], directions, levels, spec.interval_mode)?;
    let bag_ind = overlap_indicators(&bagged[0], &bagged[1], directions, levels, spec.interval_mode)?;
    let mm_ind = if spec.interval_mode == IntervalMode::MomentMatchedNormal {
        bag_ind.clone()
    } else {
        overlap_indicators(
            &bagged[0],
            &bagged[1],
            directions,
            levels,
            IntervalMode::MomentMatchedNormal,
        )?
    };
    let mut lp_standard = 0.0;
    let mut lp_bagged = 0.0;
    for (k, model) in models.iter().enumerate() {
        for (i, z) in directions.iter().enumerate() {
            lp_standard += model.predictive(&standard[k], z)?.ln_pdf(test_y[i]);
            lp_bagged += bagged_predictive_log_density(&bagged[k], model, z, test_y[i])?;
        }
    }
    let count = (2 * directions.len()) as f64;
    Ok(ReplicateOutcome {
        standard: std_ind,
        bagged: bag_ind,
        bagged_mm: mm_ind,
        mlpd_standard: lp_standard / count,
        mlpd_bagged: lp_bagged / count,
    })
}

/// Runs the replicate-pair protocol: `r` independent dataset pairs, one
/// fixed set of test points whose rows serve as directions `u`, overlap
/// indicators for both arms, and per-replicate MLPD on shared test outcomes.
pub fn run_overlap_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let root = SeedPath::root(spec.root_seed);
    let test_z = simgen::gen_test_points(&spec.dgp, spec.test_point_count, &root.child(0))?;
    let directions: Vec<DVector<f64>> = test_z.row_iter().map(|r| r.transpose()).collect();
    let outcomes: Vec<Result<ReplicateOutcome>> = (0..spec.r)
        .into_par_iter()
        .map(|r| run_replicate(spec, &replicate_path(&root, r), &test_z, &directions))
        .collect();
    let mut kept = Vec::with_capacity(spec.r);
    let mut last_err = None;
    for o in outcomes {
        match o {
            Ok(o) => kept.push(o),
            Err(e) => last_err = Some(e),
        }
    }
    let failed = spec.r - kept.len();
    if kept.is_empty() {
        return Err(Error::AllComponentsFailed {
            attempted: spec.r,
            last: last_err.map_or_else(String::new, |e| e.to_string()),
        });
    }
    if failed > 0 {
        log::warn!("{failed} of {} replicates failed and were excluded", spec.r);
    }
    let gather = |f: fn(&ReplicateOutcome) -> &Vec<Vec<bool>>| -> Vec<Vec<Vec<bool>>> {
        kept.iter().map(|o| f(o).clone()).collect()
    };
    let std_report = OverlapReport::from_indicators(&gather(|o| &o.standard), &spec.levels, failed);
    let bag_report = OverlapReport::from_indicators(&gather(|o| &o.bagged), &spec.levels, failed);
    let mm_report = OverlapReport::from_indicators(&gather(|o| &o.bagged_mm), &spec.levels, failed);
    let n_used = kept.len() as f64;
    let diffs: Vec<f64> = kept.iter().map(|o| o.mlpd_bagged - o.mlpd_standard).collect();
    let mlpd_diff_ci = if diffs.len() >= 2 {
        Some(paired_t_interval(&diffs, 0.99)?)
    } else {
        None
    };
    Ok(ExperimentResult {
        standard: MethodResult {
            method: Method::Standard,
            violation_fractions: violation_fractions(&std_report, &spec.levels),
            report: std_report,
            mlpd: kept.iter().map(|o| o.mlpd_standard).sum::<f64>() / n_used,
        },
        bagged: MethodResult {
            method: Method::Bagged,
            violation_fractions: violation_fractions(&bag_report, &spec.levels),
            report: bag_report,
            mlpd: kept.iter().map(|o| o.mlpd_bagged).sum::<f64>() / n_used,
        },
        bagged_moment_matched_violation_fractions: violation_fractions(&mm_report, &spec.levels),
        mlpd_differences: diffs,
        mlpd_diff_ci,
        replicates_used: kept.len(),
        failed_replicates: failed,
    })
}

pub const EXPERIMENT_CSV_HEADER: [&str; 7] = [
    "method",
    "direction_id",
    "level",
    "overlap_prob",
    "bound",
    "replicates",
    "violated",
];

impl ExperimentResult {
    pub fn methods(&self) -> [&MethodResult; 2] {
        [&self.standard, &self.bagged]
    }

    /// One row per method, test point and level.
    pub fn write_overlap_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(EXPERIMENT_CSV_HEADER)?;
        for m in self.methods() {
            for d in &m.report.per_direction {
                w.write_record([
                    m.method.name().to_string(),
                    d.direction_id.to_string(),
                    d.level.to_string(),
                    d.overlap_prob.to_string(),
                    d.bound().to_string(),
                    d.replicates.to_string(),
                    d.violated().to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn histogram(&self, bins: usize) -> Vec<HistogramRow> {
        let mut rows = Vec::new();
        for m in self.methods() {
            let mut levels: Vec<f64> = Vec::new();
            for d in &m.report.per_direction {
                if !levels.contains(&d.level) {
                    levels.push(d.level);
                }
            }
            for level in levels {
                let values: Vec<f64> = m
                    .report
                    .per_direction
                    .iter()
                    .filter(|d| d.level == level)
                    .map(|d| d.overlap_prob)
                    .collect();
                for (k, count) in bin_counts(&values, bins).into_iter().enumerate() {
                    rows.push(HistogramRow {
                        method: m.method,
                        level,
                        bin_lower: k as f64 / bins as f64,
                        bin_upper: (k + 1) as f64 / bins as f64,
                        count,
                    });
                }
            }
        }
        rows
    }

    pub fn write_histogram_csv<W: Write>(&self, writer: W, bins: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["method", "level", "bin_lower", "bin_upper", "count"])?;
        for row in self.histogram(bins) {
            w.write_record([
                row.method.name().to_string(),
                row.level.to_string(),
                row.bin_lower.to_string(),
                row.bin_upper.to_string(),
                row.count.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> ExperimentSummary {
        ExperimentSummary {
            violation_fractions: vec![
                MethodFractions {
                    method: "standard".into(),
                    fractions: self.standard.violation_fractions.clone(),
                },
                MethodFractions {
                    method: "bagged".into(),
                    fractions: self.bagged.violation_fractions.clone(),
                },
                MethodFractions {
                    method: "bagged-moment-matched".into(),
                    fractions: self.bagged_moment_matched_violation_fractions.clone(),
                },
            ],
            mlpd_standard: self.standard.mlpd,
            mlpd_bagged: self.bagged.mlpd,
            mlpd_diff_mean: self.mlpd_differences.iter().sum::<f64>() / self.mlpd_differences.len() as f64,
            mlpd_diff_ci_99: self.mlpd_diff_ci,
            replicates_used: self.replicates_used,
            failed_replicates: self.failed_replicates,
        }
    }
}

/// Counts of values in `bins` equal-width bins over `[0, 1]`; the last bin is closed.
pub fn bin_counts(values: &[f64], bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins.max(1)];
    let last = counts.len() - 1;
    for &v in values.iter().filter(|v| v.is_finite()) {
        let k = ((v.clamp(0.0, 1.0) * counts.len() as f64).floor() as usize).min(last);
        counts[k] += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub method: Method,
    pub level: f64,
    pub bin_lower: f64,
    pub bin_upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodFractions {
    pub method: String,
    pub fractions: Vec<LevelFraction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub violation_fractions: Vec<MethodFractions>,
    pub mlpd_standard: f64,
    pub mlpd_bagged: f64,
    pub mlpd_diff_mean: f64,
    pub mlpd_diff_ci_99: Option<(f64, f64)>,
    pub replicates_used: usize,
    pub failed_replicates: usize,
}

/// `mean -/+ t_{n-1, (1+confidence)/2} * sd / sqrt(n)`.
pub fn paired_t_interval(differences: &[f64], confidence: f64) -> Result<(f64, f64)> {
    let n = differences.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let nf = n as f64;
    let mean = differences.iter().sum::<f64>() / nf;
    let var = differences.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let q = special::student_t_quantile(0.5 * (1.0 + confidence), nf - 1.0);
    let half = q * (var / nf).sqrt();
    Ok((mean - half, mean + half))
}

/// Gaussian location overlap experiment: `r` pairs of datasets of size `n`
/// from `N(true_mean, true_cov)`, standard and bagged (`b` components of
/// size `m`) posteriors, overlap along each direction at each level.
#[derive(Debug, Clone)]
pub struct LocationExperiment {
    pub model: GaussianLocationModel,
    pub true_mean: DVector<f64>,
    pub true_cov: DMatrix<f64>,
    pub n: usize,
    pub m: usize,
    pub b: usize,
    pub r: usize,
    pub levels: Vec<f64>,
    pub directions: Vec<DVector<f64>>,
    pub interval_mode: IntervalMode,
    pub root_seed: u64,
}

impl LocationExperiment {
    /// Scalar experiment for a [`LocationScenario`] with `M = N`.
    pub fn scalar(
        scenario: &LocationScenario,
        n: usize,
        b: usize,
        r: usize,
        levels: Vec<f64>,
        root_seed: u64,
    ) -> Result<Self> {
        scenario.validate()?;
        Ok(Self {
            model: GaussianLocationModel::scalar(scenario.model_v, scenario.prior_precision)?,
            true_mean: DVector::from_element(1, scenario.true_mean),
            true_cov: DMatrix::from_element(1, 1, scenario.true_sd * scenario.true_sd),
            n,
            m: n,
            b,
            r,
            levels,
            directions: vec![DVector::from_element(1, 1.0)],
            interval_mode: IntervalMode::MixtureQuantile,
            root_seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationExperimentResult {
    pub standard: OverlapReport,
    pub bagged: OverlapReport,
}

pub fn run_location_experiment(exp: &LocationExperiment) -> Result<LocationExperimentResult> {
    check_levels(&exp.levels)?;
    if exp.n == 0 || exp.m == 0 || exp.b == 0 {
        return Err(Error::invalid("n, m and b must be positive"));
    }
    let root = SeedPath::root(exp.root_seed);
    let pair = |r: usize| -> Result<((Dataset, SeedPath), (Dataset, SeedPath))> {
        let rep = root.child(0).child(r as u32);
        let make = |k: u32| -> Result<(Dataset, SeedPath)> {
            let d = simgen::gen_gaussian_location_data(&exp.true_mean, &exp.true_cov, exp.n, &rep.child(k))?;
            Ok((d, rep.child(2).child(k)))
        };
        Ok((make(0)?, make(1)?))
    };
    let standard = estimate_overlap(
        pair,
        |(d, _): &(Dataset, SeedPath)| exp.model.fit(d),
        &exp.directions,
        &exp.levels,
        exp.r,
        exp.interval_mode,
    )?;
    let bagged = estimate_overlap(
        pair,
        |(d, path): &(Dataset, SeedPath)| bag_monte_carlo(&exp.model, d, exp.m, exp.b, path),
        &exp.directions,
        &exp.levels,
        exp.r,
        exp.interval_mode,
    )?;
    Ok(LocationExperimentResult { standard, bagged })
}

/// Overlap of standard credible sets when the model is correct: each
/// replicate draws `theta` from the (proper) prior, then two datasets from
/// `N(theta, V)`.
pub fn prior_draw_overlap(
    model: &GaussianLocationModel,
    directions: &[DVector<f64>],
    n: usize,
    levels: &[f64],
    draws: usize,
    root_seed: u64,
) -> Result<OverlapReport> {
    let prior_cov = crate::linalg::SpdFactor::new(model.v0_inv(), "prior precision")
        .map_err(|_| Error::invalid("prior draws need a proper (positive-definite precision) prior"))?
        .inverse();
    let zero = DVector::zeros(model.dim());
    let root = SeedPath::root(root_seed);
    estimate_overlap(
        |r| {
            let rep = root.child(r as u32);
            let theta = simgen::gen_gaussian_location_data(&zero, &prior_cov, 1, &rep.child(0))?;
            let theta = theta.location_matrix().expect("location data").row(0).transpose();
            let a = simgen::gen_gaussian_location_data(&theta, model.v(), n, &rep.child(1))?;
            let b = simgen::gen_gaussian_location_data(&theta, model.v(), n, &rep.child(2))?;
            Ok((a, b))
        },
        |d: &Dataset| model.fit(d),
        directions,
        levels,
        draws,
        IntervalMode::MomentMatchedNormal,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoDataset {
    pub index: usize,
    pub standard_mean: f64,
    pub standard_sd: f64,
    pub standard_lower: f64,
    pub standard_upper: f64,
    pub bagged_mean: f64,
    pub bagged_sd: f64,
    pub bagged_lower: f64,
    pub bagged_upper: f64,
    pub standard_covers_truth: bool,
    pub bagged_covers_truth: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoPair {
    pub first: usize,
    pub second: usize,
    pub standard_overlap: bool,
    pub bagged_overlap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoSummary {
    pub datasets: Vec<DemoDataset>,
    pub pairs: Vec<DemoPair>,
    pub standard_overlap_rate: f64,
    pub bagged_overlap_rate: f64,
}

/// Standard and bagged (`M = N`, `b` components) posteriors for
/// `num_datasets` independent location datasets, with their central
/// `1 - alpha` intervals, pairwise overlap and coverage of the true mean.
pub fn location_demo_experiment(
    scenario: &LocationScenario,
    n: usize,
    num_datasets: usize,
    alpha: f64,
    b: usize,
    mode: IntervalMode,
    root: &SeedPath,
) -> Result<DemoSummary> {
    if num_datasets < 2 {
        return Err(Error::invalid(format!("need at least 2 datasets, got {num_datasets}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let model = GaussianLocationModel::scalar(scenario.model_v, scenario.prior_precision)?;
    let u = DVector::from_element(1, 1.0);
    let fits: Vec<Result<_>> = (0..num_datasets)
        .into_par_iter()
        .map(|k| {
            let data = simgen::gen_location_data(scenario, n, &root.child(0).child(k as u32))?;
            let standard = DirectionalPosterior::marginal(&model.fit(&data)?, &u)?;
            let bagged = bag_monte_carlo(&model, &data, n, b, &root.child(1).child(k as u32))?.marginal(&u)?;
            let si = standard.interval(alpha, mode)?;
            let bi = bagged.interval(alpha, mode)?;
            Ok((standard, bagged, si, bi))
        })
        .collect();
    let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;
    let datasets = fits
        .iter()
        .enumerate()
        .map(|(index, (s, bg, si, bi))| DemoDataset {
            index,
            standard_mean: s.mean(),
            standard_sd: s.variance().sqrt(),
            standard_lower: si.lower,
            standard_upper: si.upper,
            bagged_mean: bg.mean(),
            bagged_sd: bg.variance().sqrt(),
            bagged_lower: bi.lower,
            bagged_upper: bi.upper,
            standard_covers_truth: si.contains(scenario.true_mean),
            bagged_covers_truth: bi.contains(scenario.true_mean),
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..num_datasets {
        for j in i + 1..num_datasets {
            pairs.push(DemoPair {
                first: i,
                second: j,
                standard_overlap: intervals_overlap(&fits[i].2, &fits[j].2),
                bagged_overlap: intervals_overlap(&fits[i].3, &fits[j].3),
            });
        }
    }
    let np = pairs.len() as f64;
    Ok(DemoSummary {
        standard_overlap_rate: pairs.iter().filter(|p| p.standard_overlap).count() as f64 / np,
        bagged_overlap_rate: pairs.iter().filter(|p| p.bagged_overlap).count() as f64 / np,
        datasets,
        pairs,
    })
}

impl DemoSummary {
    pub fn write_datasets_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for d in &self.datasets {
            w.serialize(d)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_pairs_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for p in &self.pairs {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }
}
