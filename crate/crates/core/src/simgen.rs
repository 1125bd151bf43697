//! Synthetic data: random- and fixed-design regression generators and the
//! misspecified Gaussian location scenario.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::Dataset;
use crate::randstream::{SeedPath, Stream};

/// Path tag for the non-grid covariates of the fixed design, which depend
/// only on `(root seed, N, D)`.
const FIXED_DESIGN_TAG: u32 = 0xF1_0ED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FKind {
    #[default]
    Linear,
    /// Elementwise cube.
    Nonlinear,
}

fn default_h() -> u32 {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GKind {
    #[default]
    Uncorrelated,
    Correlated {
        kappa: f64,
        #[serde(default = "default_h")]
        h: u32,
    },
    FixedDesignHeteroskedastic,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaRule {
    /// `beta[j] = 4 / sqrt(j + 1)` for 0-based `j`.
    #[default]
    FourOverSqrtD,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationScenario {
    pub true_mean: f64,
    pub true_sd: f64,
    /// Model variance `V` assumed by the (scalar) location model.
    pub model_v: f64,
    /// Prior precision `V0^{-1}`; zero means a flat prior.
    #[serde(default)]
    pub prior_precision: f64,
}

impl LocationScenario {
    /// Data N(0, 5^2) analysed with V = 1 and a flat prior.
    pub fn misspecified_demo() -> Self {
        Self {
            true_mean: 0.0,
            true_sd: 5.0,
            model_v: 1.0,
            prior_precision: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.true_sd > 0.0 && self.true_sd.is_finite()) {
            return Err(Error::invalid(format!(
                "true_sd must be positive, got {}",
                self.true_sd
            )));
        }
        if !self.true_mean.is_finite() {
            return Err(Error::invalid("true_mean must be finite"));
        }
        if !(self.model_v > 0.0 && self.model_v.is_finite()) {
            return Err(Error::invalid(format!(
                "model_v must be positive, got {}",
                self.model_v
            )));
        }
        if !(self.prior_precision >= 0.0 && self.prior_precision.is_finite()) {
            return Err(Error::invalid("prior_precision must be finite and nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DGPConfig {
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub f_kind: FKind,
    #[serde(default)]
    pub g_kind: GKind,
    #[serde(default)]
    pub beta_rule: BetaRule,
    /// Drop the noise term entirely.
    #[serde(default)]
    pub noiseless: bool,
    #[serde(default)]
    pub location_scenario: Option<LocationScenario>,
}

impl DGPConfig {
    pub fn new(n: usize, d: usize, f_kind: FKind, g_kind: GKind) -> Self {
        Self {
            n,
            d,
            f_kind,
            g_kind,
            beta_rule: BetaRule::FourOverSqrtD,
            noiseless: false,
            location_scenario: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::invalid(format!(
                "n and d must be positive, got n={} d={}",
                self.n, self.d
            )));
        }
        match self.g_kind {
            GKind::Uncorrelated => {}
            GKind::Correlated { kappa, h } => {
                if !(kappa > 0.0 && kappa.is_finite()) {
                    return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
                }
                if h <= 2 {
                    return Err(Error::invalid(format!("h must exceed 2, got {h}")));
                }
            }
            GKind::FixedDesignHeteroskedastic => {
                grid_side(self.n)?;
                if self.d < 3 {
                    return Err(Error::invalid(format!(
                        "the fixed design needs d >= 3 (intercept plus two grid columns), got {}",
                        self.d
                    )));
                }
            }
        }
        if let BetaRule::Explicit(b) = &self.beta_rule {
            if b.len() != self.d {
                return Err(Error::invalid(format!(
                    "explicit beta has length {} but d = {}",
                    b.len(),
                    self.d
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("explicit beta has a non-finite entry"));
            }
        }
        if let Some(s) = &self.location_scenario {
            s.validate()?;
        }
        Ok(())
    }

    pub fn beta(&self) -> DVector<f64> {
        match &self.beta_rule {
            BetaRule::FourOverSqrtD => DVector::from_fn(self.d, |j, _| 4.0 / ((j + 1) as f64).sqrt()),
            BetaRule::Explicit(b) => DVector::from_column_slice(b),
        }
    }
}

fn grid_side(n: usize) -> Result<usize> {
    let q = (n as f64).sqrt().round() as usize;
    if q * q != n {
        return Err(Error::invalid(format!(
            "fixed design needs n to be a perfect square, got {n}"
        )));
    }
    Ok(q)
}

fn grid_point(k: usize, q: usize) -> f64 {
    if q == 1 {
        0.0
    } else {
        -2.0 + 4.0 * k as f64 / (q - 1) as f64
    }
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn normal_rows<R: Rng + ?Sized>(rows: usize, d: usize, rng: &mut R) -> DMatrix<f64> {
    let mut z = DMatrix::zeros(rows, d);
    for i in 0..rows {
        for j in 0..d {
            z[(i, j)] = standard_normal(rng);
        }
    }
    z
}

/// Squared-exponential kernel `exp(-(j - k)^2 / kappa^2)` over coordinates.
fn coordinate_kernel(d: usize, kappa: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |j, k| {
        let diff = j as f64 - k as f64;
        (-(diff * diff) / (kappa * kappa)).exp()
    })
}

fn correlated_rows<R: Rng + ?Sized>(rows: usize, d: usize, kappa: f64, h: u32, rng: &mut R) -> Result<DMatrix<f64>> {
    let root = linalg::psd_sqrt(&coordinate_kernel(d, kappa));
    let chi = ChiSquared::new(h as f64).map_err(|e| Error::invalid(format!("chi-squared({h}): {e}")))?;
    let mut z = DMatrix::zeros(rows, d);
    let mut e = DVector::zeros(d);
    for i in 0..rows {
        let xi: f64 = chi.sample(rng);
        for v in e.iter_mut() {
            *v = standard_normal(rng);
        }
        let g = &root * &e;
        let scale = (xi / (h as f64 - 2.0)).sqrt();
        for j in 0..d {
            // 1-based odd coordinates carry the rescaled-t tails
            z[(i, j)] = if j % 2 == 0 { g[j] / scale } else { g[j] };
        }
    }
    Ok(z)
}

/// The fixed design for `(root seed, n, d)`: intercept, a row-major
/// `q x q` grid over `[-2, 2]^2`, then standard normal columns.
pub fn fixed_design(root_seed: u64, n: usize, d: usize) -> Result<DMatrix<f64>> {
    let q = grid_side(n)?;
    if d < 3 {
        return Err(Error::invalid(format!("the fixed design needs d >= 3, got {d}")));
    }
    let mut rng = SeedPath::new(root_seed, vec![FIXED_DESIGN_TAG, n as u32, d as u32]).stream();
    let rest = normal_rows(n, d - 3, &mut rng);
    Ok(DMatrix::from_fn(n, d, |i, j| match j {
        0 => 1.0,
        1 => grid_point(i / q, q),
        2 => grid_point(i % q, q),
        _ => rest[(i, j - 3)],
    }))
}

fn draw_rows(cfg: &DGPConfig, rows: usize, stream: &SeedPath) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let mut rng: Stream = stream.stream();
    match cfg.g_kind {
        GKind::Uncorrelated => Ok(normal_rows(rows, cfg.d, &mut rng)),
        GKind::Correlated { kappa, h } => correlated_rows(rows, cfg.d, kappa, h, &mut rng),
        GKind::FixedDesignHeteroskedastic => {
            let design = fixed_design(stream.root_seed, cfg.n, cfg.d)?;
            let index: Vec<usize> = (0..rows).map(|_| rng.random_range(0..cfg.n)).collect();
            Ok(design.select_rows(&index))
        }
    }
}

/// `N x D` training regressors. The fixed design ignores the path and is
/// identical for every replicate sharing the root seed.
pub fn gen_regressors(cfg: &DGPConfig, stream: &SeedPath) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    match cfg.g_kind {
        GKind::FixedDesignHeteroskedastic => fixed_design(stream.root_seed, cfg.n, cfg.d),
        _ => draw_rows(cfg, cfg.n, stream),
    }
}

/// Test regressors from the same distribution as training rows; for the
/// fixed design, training rows resampled uniformly.
pub fn gen_test_points(cfg: &DGPConfig, count: usize, stream: &SeedPath) -> Result<DMatrix<f64>> {
    if count == 0 {
        return Err(Error::invalid("test point count must be at least 1"));
    }
    draw_rows(cfg, count, stream)
}

pub fn apply_f(f_kind: FKind, z: &DMatrix<f64>) -> DMatrix<f64> {
    match f_kind {
        FKind::Linear => z.clone(),
        FKind::Nonlinear => z.map(|v| v * v * v),
    }
}

/// Noise variance at a regressor row.
pub fn noise_variance(cfg: &DGPConfig, row: &[f64]) -> f64 {
    if cfg.noiseless {
        return 0.0;
    }
    match cfg.g_kind {
        GKind::FixedDesignHeteroskedastic => 1.0 + row[1] * row[1] + row[2] * row[2],
        _ => 1.0,
    }
}

/// `y = f(Z) beta + eps` with unit or heteroskedastic noise.
pub fn gen_outcomes(cfg: &DGPConfig, z: &DMatrix<f64>, stream: &SeedPath) -> Result<DVector<f64>> {
    cfg.validate()?;
    if z.ncols() != cfg.d {
        return Err(Error::invalid(format!(
            "regressors have {} columns but d = {}",
            z.ncols(),
            cfg.d
        )));
    }
    let mean = apply_f(cfg.f_kind, z) * cfg.beta();
    let mut rng = stream.stream();
    let mut y = mean;
    let mut row = vec![0.0; cfg.d];
    for i in 0..z.nrows() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = z[(i, j)];
        }
        let var = noise_variance(cfg, &row);
        if var > 0.0 {
            y[i] += var.sqrt() * standard_normal(&mut rng);
        }
    }
    Ok(y)
}

/// One regression dataset: regressors from `stream / 0`, outcomes from `stream / 1`.
pub fn gen_regression_data(cfg: &DGPConfig, stream: &SeedPath) -> Result<Dataset> {
    let z = gen_regressors(cfg, &stream.child(0))?;
    let y = gen_outcomes(cfg, &z, &stream.child(1))?;
    Dataset::regression(z, y)
}

/// `n` i.i.d. draws from `N(true_mean, true_sd^2)` as a one-column location dataset.
pub fn gen_location_data(scenario: &LocationScenario, n: usize, stream: &SeedPath) -> Result<Dataset> {
    scenario.validate()?;
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let mut rng = stream.stream();
    let x = DMatrix::from_fn(n, 1, |_, _| {
        scenario.true_mean + scenario.true_sd * standard_normal(&mut rng)
    });
    Dataset::location(x)
}

/// `n` i.i.d. draws from `N(mean, cov)` (any PSD `cov`) as a location dataset.
pub fn gen_gaussian_location_data(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    n: usize,
    stream: &SeedPath,
) -> Result<Dataset> {
    let d = mean.len();
    if cov.shape() != (d, d) {
        return Err(Error::invalid(format!("covariance must be {d}x{d}")));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if !linalg::is_psd(cov, 1e-10) {
        return Err(Error::invalid("covariance must be symmetric positive semidefinite"));
    }
    let root = linalg::psd_sqrt(cov);
    let e = normal_rows(n, d, &mut stream.stream());
    let mut x = e * root.transpose();
    for mut row in x.row_iter_mut() {
        row += mean.transpose();
    }
    Dataset::location(x)
}

/// Writes a dataset as CSV: `z_0..z_{D-1},y` for regression, `x_0..` for location.
pub fn write_dataset_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    match data {
        Dataset::Location { x } => {
            w.write_record((0..x.ncols()).map(|j| format!("x_{j}")))?;
            for i in 0..x.nrows() {
                w.write_record(x.row(i).iter().map(|v| v.to_string()))?;
            }
        }
        Dataset::Regression { z, y } => {
            let mut header: Vec<String> = (0..z.ncols()).map(|j| format!("z_{j}")).collect();
            header.push("y".into());
            w.write_record(&header)?;
            for i in 0..z.nrows() {
                let mut rec: Vec<String> = z.row(i).iter().map(|v| v.to_string()).collect();
                rec.push(y[i].to_string());
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset written by [`write_dataset_csv`]. A header ending in `y`
/// gives a regression dataset; otherwise every column is a location coordinate.
pub fn read_dataset_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| format_error(1, 0, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(format_error(1, 1, "missing header row".into()));
    }
    let regression = header.last().is_some_and(|h| h == "y");
    if regression && header.len() < 2 {
        return Err(format_error(
            1,
            1,
            "regression data needs at least one z column before y".into(),
        ));
    }
    let width = header.len();
    let mut values: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| format_error(row, 0, e.to_string()))?;
        if rec.len() != width {
            return Err(format_error(
                row,
                rec.len().min(width) + 1,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| format_error(row, j + 1, format!("cannot parse {field:?} as a number")))?;
            if !v.is_finite() {
                return Err(format_error(row, j + 1, format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(format_error(2, 1, "no data rows".into()));
    }
    let table = DMatrix::from_row_slice(rows, width, &values);
    if regression {
        let z = table.columns(0, width - 1).into_owned();
        let y = table.column(width - 1).into_owned();
        Dataset::regression(z, y)
    } else {
        Dataset::location(table)
    }
}

fn format_error(row: usize, column: usize, message: String) -> Error {
    Error::DataFormat { row, column, message }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column_moments(z: &DMatrix<f64>, j: usize) -> (f64, f64) {
        let n = z.nrows() as f64;
        let mean = z.column(j).sum() / n;
        let var = z.column(j).iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn uncorrelated_moments() {
        let cfg = DGPConfig::new(100_000, 3, FKind::Linear, GKind::Uncorrelated);
        let z = gen_regressors(&cfg, &SeedPath::root(11)).unwrap();
        let n = z.nrows() as f64;
        for j in 0..3 {
            let (mean, var) = column_moments(&z, j);
            assert!(mean.abs() < 4.0 / n.sqrt());
            assert!((var - 1.0).abs() < 4.0 * (2.0 / n).sqrt());
        }
    }

    #[test]
    fn correlated_unit_variance() {
        let cfg = DGPConfig::new(100_000, 4, FKind::Linear, GKind::Correlated { kappa: 2.0, h: 10 });
        let z = gen_regressors(&cfg, &SeedPath::root(12)).unwrap();
        for j in 0..4 {
            let (mean, var) = column_moments(&z, j);
            assert!(mean.abs() < 0.02, "column {j} mean {mean}");
            assert!((var - 1.0).abs() < 0.05, "column {j} variance {var}");
        }
    }

    #[test]
    fn tiny_kappa_decorrelates_even_coordinates() {
        let cfg = DGPConfig::new(20_000, 4, FKind::Linear, GKind::Correlated { kappa: 1e-3, h: 10 });
        let z = gen_regressors(&cfg, &SeedPath::root(13)).unwrap();
        let n = z.nrows() as f64;
        let corr = z.column(1).dot(&z.column(3)) / n;
        assert!(corr.abs() < 4.0 / n.sqrt());
    }

    #[test]
    fn cube_is_elementwise() {
        let z = DMatrix::from_row_slice(1, 2, &[2.0, -1.0]);
        assert_eq!(apply_f(FKind::Nonlinear, &z).as_slice(), &[8.0, -1.0]);
        assert_eq!(apply_f(FKind::Linear, &z), z);
    }

    #[test]
    fn noiseless_linear_outcomes() {
        let mut cfg = DGPConfig::new(30, 4, FKind::Linear, GKind::Uncorrelated);
        cfg.noiseless = true;
        let z = gen_regressors(&cfg, &SeedPath::root(1)).unwrap();
        let y = gen_outcomes(&cfg, &z, &SeedPath::root(2)).unwrap();
        assert_eq!(y, &z * cfg.beta());
    }

    #[test]
    fn null_beta_noise_variance() {
        let mut cfg = DGPConfig::new(100_000, 1, FKind::Linear, GKind::Uncorrelated);
        cfg.beta_rule = BetaRule::Explicit(vec![0.0]);
        let z = gen_regressors(&cfg, &SeedPath::root(3)).unwrap();
        let y = gen_outcomes(&cfg, &z, &SeedPath::root(4)).unwrap();
        let n = y.len() as f64;
        let mean = y.sum() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n).sqrt());
    }

    #[test]
    fn fixed_design_layout() {
        let cfg = DGPConfig::new(9, 4, FKind::Linear, GKind::FixedDesignHeteroskedastic);
        let a = gen_regressors(&cfg, &SeedPath::new(5, vec![0, 0])).unwrap();
        let b = gen_regressors(&cfg, &SeedPath::new(5, vec![7, 1])).unwrap();
        assert_eq!(a, b);
        assert!(a.column(0).iter().all(|&v| v == 1.0));
        assert_eq!((a[(0, 1)], a[(0, 2)]), (-2.0, -2.0));
        assert_eq!((a[(8, 1)], a[(8, 2)]), (2.0, 2.0));
        assert_eq!((a[(1, 1)], a[(1, 2)]), (-2.0, 0.0));
        assert_eq!(
            noise_variance(&cfg, a.row(8).iter().copied().collect::<Vec<_>>().as_slice()),
            9.0
        );

        let bad = DGPConfig::new(10, 4, FKind::Linear, GKind::FixedDesignHeteroskedastic);
        assert!(gen_regressors(&bad, &SeedPath::root(1)).is_err());
    }

    #[test]
    fn fixed_design_test_points_are_training_rows() {
        let cfg = DGPConfig::new(16, 5, FKind::Linear, GKind::FixedDesignHeteroskedastic);
        let design = fixed_design(8, 16, 5).unwrap();
        let test = gen_test_points(&cfg, 10, &SeedPath::new(8, vec![99])).unwrap();
        for i in 0..10 {
            assert!((0..16).any(|k| design.row(k) == test.row(i)));
        }
    }

    #[test]
    fn beta_rule_grows() {
        let big = DGPConfig::new(1, 500, FKind::Linear, GKind::Uncorrelated)
            .beta()
            .norm_squared();
        let small = DGPConfig::new(1, 100, FKind::Linear, GKind::Uncorrelated)
            .beta()
            .norm_squared();
        assert!(big > small);
        assert_eq!(DGPConfig::new(1, 4, FKind::Linear, GKind::Uncorrelated).beta()[3], 2.0);
    }

    #[test]
    fn location_draws() {
        let s = LocationScenario::misspecified_demo();
        let d = gen_location_data(&s, 100_000, &SeedPath::root(21)).unwrap();
        let x = d.location_matrix().unwrap();
        let n = x.nrows() as f64;
        let mean = x.sum() / n;
        let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd / 5.0 - 1.0).abs() < 0.02);
        assert_eq!(d, gen_location_data(&s, 100_000, &SeedPath::root(21)).unwrap());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let cfg = DGPConfig::new(5, 2, FKind::Nonlinear, GKind::Uncorrelated);
        let data = gen_regression_data(&cfg, &SeedPath::root(3)).unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&data, &mut buf).unwrap();
        assert!(buf.starts_with(b"z_0,z_1,y\n"));
        assert_eq!(read_dataset_csv(buf.as_slice()).unwrap(), data);

        let bad = "z_0,y\n1.0,2.0\n1.0,abc\n";
        match read_dataset_csv(bad.as_bytes()) {
            Err(Error::DataFormat { row, column, .. }) => assert_eq!((row, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let ragged = "x_0,x_1\n1,2\n3\n";
        assert!(matches!(
            read_dataset_csv(ragged.as_bytes()),
            Err(Error::DataFormat { row: 3, .. })
        ));
    }
}
