//! Credible intervals, the interval-overlap criterion, Monte Carlo overlap
//! estimation and closed-form asymptotic overlap probabilities.

use std::io::Write;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bagging::BaggedPosterior;
use crate::error::{Error, Result};
use crate::linalg::{self, SpdFactor};
use crate::models::{check_direction, ComponentPosterior, ScalarPosterior};
use crate::special;

/// Closed interval `[lower, upper]` at credibility `level = 1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl CredibleInterval {
    pub fn new(lower: f64, upper: f64, level: f64) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::invalid(format!("interval lower {lower} exceeds upper {upper}")));
        }
        check_level(level)?;
        Ok(Self { lower, upper, level })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("level must lie in (0, 1), got {level}")));
    }
    Ok(())
}

/// Equal-tailed interval `center -/+ q(1 - alpha/2) * scale`.
pub fn central_interval(posterior: &ScalarPosterior, alpha: f64) -> Result<CredibleInterval> {
    check_alpha(alpha)?;
    let lower = posterior.quantile(0.5 * alpha);
    let upper = posterior.quantile(1.0 - 0.5 * alpha);
    Ok(CredibleInterval {
        lower,
        upper,
        level: 1.0 - alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalMode {
    /// Central interval of the normal with the mixture's mean and variance.
    #[default]
    MomentMatchedNormal,
    /// Equal-tailed quantiles of the mixture itself.
    MixtureQuantile,
}

/// Weighted mixture of scalar posteriors: the distribution of `u'theta`
/// under a bagged (or standard, one-component) posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMixture {
    components: Vec<(f64, ScalarPosterior)>,
}

/// Absolute tolerance on mixture quantiles, relative to `max(1, |x|)`.
pub const MIXTURE_QUANTILE_TOL: f64 = 1e-10;

impl ScalarMixture {
    pub fn new(components: Vec<(f64, ScalarPosterior)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if !((total - 1.0).abs() < 1e-9) || components.iter().any(|c| !(c.0 >= 0.0)) {
            return Err(Error::invalid(format!(
                "mixture weights must be nonnegative and sum to 1 (sum {total})"
            )));
        }
        Ok(Self { components })
    }

    pub fn single(p: ScalarPosterior) -> Self {
        Self {
            components: vec![(1.0, p)],
        }
    }

    pub fn components(&self) -> &[(f64, ScalarPosterior)] {
        &self.components
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|(w, p)| w * p.mean()).sum()
    }

    /// Mixture variance by the law of total variance.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.components
            .iter()
            .map(|(w, p)| w * (p.variance() + (p.mean() - mean).powi(2)))
            .sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components.iter().map(|(w, p)| w * p.cdf(x)).sum()
    }

    fn pdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|(w, p)| if p.scale() > 0.0 { w * p.ln_pdf(x).exp() } else { 0.0 })
            .sum()
    }

    /// Mixture quantile. The root is bracketed by the smallest and largest
    /// component quantiles, then refined by bisection (with Newton steps
    /// accepted only when they stay inside the bracket).
    pub fn quantile(&self, p: f64) -> f64 {
        if self.components.len() == 1 {
            return self.components[0].1.quantile(p);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut cache: Vec<(u64, f64)> = Vec::new();
        for (w, c) in &self.components {
            if *w == 0.0 {
                continue;
            }
            let q = match c {
                ScalarPosterior::Student(s) => {
                    let key = s.dof.to_bits();
                    let std_q = match cache.iter().find(|(k, _)| *k == key) {
                        Some(&(_, q)) => q,
                        None => {
                            let q = special::student_t_quantile(p, s.dof);
                            cache.push((key, q));
                            q
                        }
                    };
                    s.center + s.scale * std_q
                }
                other => other.quantile(p),
            };
            lo = lo.min(q);
            hi = hi.max(q);
        }
        if !(hi > lo) {
            return lo;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..400 {
            let f = self.cdf(x) - p;
            if f > 0.0 {
                hi = x;
            } else if f < 0.0 {
                lo = x;
            } else {
                return x;
            }
            if hi - lo <= MIXTURE_QUANTILE_TOL * x.abs().max(1.0) {
                break;
            }
            let density = self.pdf(x);
            let newton = x - f / density;
            x = if density > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            // stop once a Newton step lands within tolerance of the last iterate
            if (hi - lo) <= 4.0 * MIXTURE_QUANTILE_TOL * x.abs().max(1.0) {
                break;
            }
        }
        x
    }

    pub fn interval(&self, alpha: f64, mode: IntervalMode) -> Result<CredibleInterval> {
        check_alpha(alpha)?;
        if self.components.len() == 1 {
            return central_interval(&self.components[0].1, alpha);
        }
        match mode {
            IntervalMode::MomentMatchedNormal => {
                let var = self.variance();
                if !var.is_finite() {
                    return Err(Error::invalid(
                        "moment matching needs finite component variances (Student dof > 2)",
                    ));
                }
                central_interval(&ScalarPosterior::normal(self.mean(), var), alpha)
            }
            IntervalMode::MixtureQuantile => Ok(CredibleInterval {
                lower: self.quantile(0.5 * alpha),
                upper: self.quantile(1.0 - 0.5 * alpha),
                level: 1.0 - alpha,
            }),
        }
    }
}

/// A fitted posterior that yields the distribution of any linear functional.
pub trait DirectionalPosterior {
    fn marginal(&self, u: &DVector<f64>) -> Result<ScalarMixture>;
}

impl DirectionalPosterior for ComponentPosterior {
    fn marginal(&self, u: &DVector<f64>) -> Result<ScalarMixture> {
        Ok(ScalarMixture::single(ComponentPosterior::marginal(self, u)?))
    }
}

impl DirectionalPosterior for BaggedPosterior {
    fn marginal(&self, u: &DVector<f64>) -> Result<ScalarMixture> {
        check_direction(u, self.dim())?;
        let components = self
            .components()
            .iter()
            .map(|c| Ok((c.weight, c.posterior.marginal(u)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ScalarMixture { components })
    }
}

/// Scalar posteriors are their own (one-dimensional) marginal; `u` must be `[1]`-shaped.
impl DirectionalPosterior for ScalarPosterior {
    fn marginal(&self, u: &DVector<f64>) -> Result<ScalarMixture> {
        check_direction(u, 1)?;
        Ok(ScalarMixture::single(self.affine(0.0, u[0])))
    }
}

impl DirectionalPosterior for ScalarMixture {
    fn marginal(&self, u: &DVector<f64>) -> Result<ScalarMixture> {
        check_direction(u, 1)?;
        Ok(ScalarMixture {
            components: self.components.iter().map(|(w, p)| (*w, p.affine(0.0, u[0]))).collect(),
        })
    }
}

pub fn bagged_interval(
    bp: &BaggedPosterior,
    u: &DVector<f64>,
    alpha: f64,
    mode: IntervalMode,
) -> Result<CredibleInterval> {
    bp.marginal(u)?.interval(alpha, mode)
}

/// Closed intervals overlap iff `max(lowers) <= min(uppers)`; touching
/// endpoints count as overlap.
pub fn intervals_overlap(a: &CredibleInterval, b: &CredibleInterval) -> bool {
    a.lower.max(b.lower) <= a.upper.min(b.upper)
}

/// Lower bound `(1 - alpha)(1 - alpha')` on the overlap probability of two
/// valid confidence sets.
pub fn overlap_bound(alpha: f64, alpha_prime: f64) -> Result<f64> {
    for a in [alpha, alpha_prime] {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::invalid(format!("alpha must lie in [0, 1), got {a}")));
        }
    }
    Ok((1.0 - alpha) * (1.0 - alpha_prime))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PosteriorKind {
    Standard,
    Bagged,
}

/// Limiting overlap probability for the Gaussian location model with model
/// covariance `V` and true data covariance `sigma_true`; `c = lim M/N` is
/// used by the bagged arm only.
pub fn asymptotic_overlap_location(
    v: &DMatrix<f64>,
    sigma_true: &DMatrix<f64>,
    u: &DVector<f64>,
    alpha: f64,
    c: f64,
    which: PosteriorKind,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_direction(u, v.nrows())?;
    if sigma_true.shape() != v.shape() {
        return Err(Error::invalid("V and the true covariance must have the same shape"));
    }
    let true_q = linalg::quad_form(sigma_true, u);
    if !(true_q > 0.0) {
        return Err(Error::invalid(format!("u' Sigma u must be positive, got {true_q}")));
    }
    let model_q = linalg::quad_form(v, u);
    let ratio = match which {
        PosteriorKind::Standard => model_q / true_q,
        PosteriorKind::Bagged => {
            if !(c > 0.0) {
                return Err(Error::invalid(format!("c must be positive, got {c}")));
            }
            (model_q + true_q) / c / true_q
        }
    };
    Ok(central_normal(special::z_two_sided(alpha) * 2f64.sqrt() * ratio.sqrt()))
}

fn central_normal(x: f64) -> f64 {
    special::normal_central_prob(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowingDimArm {
    /// Exact finite-sample overlap of the standard posterior.
    StandardExact,
    /// Student-t lower bound for the bagged posterior.
    BaggedLowerBound,
}

/// Growing-dimension Gaussian location model (`V = I`, flat prior, Gaussian
/// data, `|u| = 1`).
pub fn growing_dim_overlap(
    sigma_true_quadform: f64,
    alpha: f64,
    n: usize,
    m: usize,
    which: GrowingDimArm,
) -> Result<f64> {
    check_alpha(alpha)?;
    let z = special::z_two_sided(alpha);
    match which {
        GrowingDimArm::StandardExact => {
            if !(sigma_true_quadform > 0.0) {
                return Err(Error::invalid(format!(
                    "u' Sigma u must be positive, got {sigma_true_quadform}"
                )));
            }
            Ok(central_normal(z * 2f64.sqrt() / sigma_true_quadform.sqrt()))
        }
        GrowingDimArm::BaggedLowerBound => {
            if n < 2 {
                return Err(Error::invalid(format!("the t bound needs n >= 2, got {n}")));
            }
            if m == 0 {
                return Err(Error::invalid("bootstrap size m must be positive"));
            }
            let dof = 2.0 * n as f64 - 2.0;
            Ok(special::student_t_central_prob(
                z * ((n as f64 - 1.0) / m as f64).sqrt(),
                dof,
            ))
        }
    }
}

/// Inputs to the regular-model overlap formula: expected Hessian `J`, score
/// covariance `K`, `c = lim M/N`, direction and level.
#[derive(Debug, Clone)]
pub struct SandwichInputs {
    pub j: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub c: f64,
    pub u: DVector<f64>,
    pub alpha: f64,
}

impl SandwichInputs {
    pub fn new(j: DMatrix<f64>, k: DMatrix<f64>, c: f64, u: DVector<f64>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(c > 0.0) {
            return Err(Error::invalid(format!("c must be positive, got {c}")));
        }
        if j.shape() != k.shape() || !j.is_square() {
            return Err(Error::invalid("J and K must be square matrices of the same size"));
        }
        check_direction(&u, j.nrows())?;
        for (m, name) in [(&j, "J"), (&k, "K")] {
            if linalg::relative_asymmetry(m) > 1e-10 {
                return Err(Error::invalid(format!("{name} is not symmetric")));
            }
        }
        SpdFactor::new(&k, "K")?;
        Ok(Self { j, k, c, u, alpha })
    }

    /// `J^{-1} K J^{-1}`.
    pub fn sandwich(&self) -> Result<DMatrix<f64>> {
        let j_inv = SpdFactor::new(&self.j, "J")?.inverse();
        Ok(&j_inv * &self.k * &j_inv)
    }
}

pub fn asymptotic_overlap_regular(inputs: &SandwichInputs, which: PosteriorKind) -> Result<f64> {
    let j_factor = SpdFactor::new(&inputs.j, "J")?;
    let bayes_q = j_factor.inv_quad_form(&inputs.u);
    let sandwich_q = linalg::quad_form(&inputs.sandwich()?, &inputs.u);
    let ratio = match which {
        PosteriorKind::Standard => bayes_q / sandwich_q,
        PosteriorKind::Bagged => (bayes_q / inputs.c + sandwich_q / inputs.c) / sandwich_q,
    };
    Ok(central_normal(
        special::z_two_sided(inputs.alpha) * 2f64.sqrt() * ratio.sqrt(),
    ))
}

/// Geometry of two flat-prior linear-regression fits, one variant per case
/// of the closed-form overlap result.
#[derive(Debug, Clone, PartialEq)]
pub enum LinregCase {
    /// Correct mean and homoskedastic noise `sigma_dagger`.
    Correct {
        v: DVector<f64>,
        v_tilde: DVector<f64>,
        sigma: f64,
        sigma_tilde: f64,
        sigma_dagger: f64,
    },
    /// Shared design `Z`, arbitrary mean and outcome covariance `K(Z)`.
    FixedDesign {
        v: DVector<f64>,
        sigma: f64,
        sigma_tilde: f64,
        k: DMatrix<f64>,
    },
    /// Homoskedastic noise, arbitrary mean; `mean_offset = v'm(Z) - v~'m(Z~)`.
    RandomDesignBound {
        v: DVector<f64>,
        v_tilde: DVector<f64>,
        sigma: f64,
        sigma_tilde: f64,
        sigma_dagger: f64,
        mean_offset: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinregOverlap {
    pub probability: f64,
    /// True when `probability` is only an upper bound.
    pub upper_bound: bool,
}

pub fn linreg_overlap(case: &LinregCase, alpha: f64) -> Result<LinregOverlap> {
    check_alpha(alpha)?;
    let z = special::z_two_sided(alpha);
    let positive = |x: f64, what: &str| -> Result<f64> {
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(Error::invalid(format!("{what} must be positive, got {x}")))
        }
    };
    match case {
        LinregCase::Correct {
            v,
            v_tilde,
            sigma,
            sigma_tilde,
            sigma_dagger,
        } => {
            let (nv, nt) = (v.norm(), v_tilde.norm());
            let denom =
                positive(*sigma_dagger, "sigma_dagger")? * positive((nv * nv + nt * nt).sqrt(), "|v|^2 + |v~|^2")?;
            Ok(LinregOverlap {
                probability: central_normal(z * (sigma * nv + sigma_tilde * nt) / denom),
                upper_bound: false,
            })
        }
        LinregCase::FixedDesign {
            v,
            sigma,
            sigma_tilde,
            k,
        } => {
            if k.nrows() != v.len() || !k.is_square() {
                return Err(Error::invalid("K(Z) must be N x N with N = len(v)"));
            }
            let q = positive(linalg::quad_form(k, v), "v' K(Z) v")?;
            let x = z * (sigma + sigma_tilde) * v.norm() / (2f64.sqrt() * q.sqrt());
            Ok(LinregOverlap {
                probability: central_normal(x),
                upper_bound: false,
            })
        }
        LinregCase::RandomDesignBound {
            v,
            v_tilde,
            sigma,
            sigma_tilde,
            sigma_dagger,
            mean_offset,
        } => {
            let sd = positive(*sigma_dagger, "sigma_dagger")?;
            let norm = positive((v.norm_squared() + v_tilde.norm_squared()).sqrt(), "|v|^2 + |v~|^2")?;
            let shift = mean_offset / (sd * norm);
            let half_width = z * (sigma * sigma + sigma_tilde * sigma_tilde).sqrt() / sd;
            // P(|W + shift| <= h) = Phi(h - shift) - Phi(-h - shift)
            let p = special::normal_cdf(half_width - shift) - special::normal_cdf(-half_width - shift);
            Ok(LinregOverlap {
                probability: p.max(0.0),
                upper_bound: true,
            })
        }
    }
}

/// Estimated overlap probability for one direction at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionOverlap {
    pub direction_id: usize,
    pub level: f64,
    pub overlap_prob: f64,
    pub replicates: usize,
}

impl DirectionOverlap {
    pub fn bound(&self) -> f64 {
        self.level * self.level
    }

    pub fn violated(&self) -> bool {
        self.overlap_prob < self.bound()
    }

    /// Binomial standard error of the estimate at the bound.
    pub fn bound_standard_error(&self) -> f64 {
        let b = self.bound();
        (b * (1.0 - b) / self.replicates.max(1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub per_direction: Vec<DirectionOverlap>,
    pub failed_replicates: usize,
}

pub const OVERLAP_CSV_HEADER: [&str; 6] = [
    "direction_id",
    "level",
    "overlap_prob",
    "bound",
    "replicates",
    "violated",
];

impl OverlapReport {
    /// Aggregates per-replicate indicators `[replicate][direction][level]`.
    pub fn from_indicators(indicators: &[Vec<Vec<bool>>], levels: &[f64], failed: usize) -> Self {
        let r = indicators.len();
        let n_dir = indicators.first().map_or(0, Vec::len);
        let mut per_direction = Vec::with_capacity(n_dir * levels.len());
        for d in 0..n_dir {
            for (l, &level) in levels.iter().enumerate() {
                let hits = indicators.iter().filter(|rep| rep[d][l]).count();
                per_direction.push(DirectionOverlap {
                    direction_id: d,
                    level,
                    overlap_prob: if r == 0 { f64::NAN } else { hits as f64 / r as f64 },
                    replicates: r,
                });
            }
        }
        Self {
            per_direction,
            failed_replicates: failed,
        }
    }

    pub fn get(&self, direction_id: usize, level: f64) -> Option<&DirectionOverlap> {
        self.per_direction
            .iter()
            .find(|d| d.direction_id == direction_id && d.level == level)
    }

    /// Fraction of directions whose estimate falls below the bound at `level`.
    pub fn violation_fraction(&self, level: f64) -> f64 {
        let rows: Vec<_> = self.per_direction.iter().filter(|d| d.level == level).collect();
        if rows.is_empty() {
            return f64::NAN;
        }
        rows.iter().filter(|d| d.violated()).count() as f64 / rows.len() as f64
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(OVERLAP_CSV_HEADER)?;
        for d in &self.per_direction {
            w.write_record([
                d.direction_id.to_string(),
                d.level.to_string(),
                d.overlap_prob.to_string(),
                d.bound().to_string(),
                d.replicates.to_string(),
                d.violated().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Overlap indicators `[direction][level]` for one pair of fitted posteriors.
pub fn overlap_indicators<P: DirectionalPosterior + ?Sized, Q: DirectionalPosterior + ?Sized>(
    first: &P,
    second: &Q,
    directions: &[DVector<f64>],
    levels: &[f64],
    mode: IntervalMode,
) -> Result<Vec<Vec<bool>>> {
    directions
        .iter()
        .map(|u| {
            let a = first.marginal(u)?;
            let b = second.marginal(u)?;
            levels
                .iter()
                .map(|&level| {
                    check_level(level)?;
                    let alpha = 1.0 - level;
                    Ok(intervals_overlap(&a.interval(alpha, mode)?, &b.interval(alpha, mode)?))
                })
                .collect()
        })
        .collect()
}

/// Monte Carlo overlap probabilities: for each of `r` replicate dataset
/// pairs, fit both datasets and record whether the central intervals for
/// every direction and level intersect. Replicates whose fits fail are
/// dropped and counted.
pub fn estimate_overlap<D, P, S, F>(
    pair_source: S,
    fit: F,
    directions: &[DVector<f64>],
    levels: &[f64],
    r: usize,
    mode: IntervalMode,
) -> Result<OverlapReport>
where
    D: Send,
    P: DirectionalPosterior,
    S: Fn(usize) -> Result<(D, D)> + Sync,
    F: Fn(&D) -> Result<P> + Sync,
{
    if r == 0 {
        return Err(Error::invalid("replicate count r must be at least 1"));
    }
    if directions.is_empty() || levels.is_empty() {
        return Err(Error::invalid("need at least one direction and one level"));
    }
    for &level in levels {
        check_level(level)?;
    }
    let results: Vec<Result<Vec<Vec<bool>>>> = (0..r)
        .into_par_iter()
        .map(|rep| {
            let (a, b) = pair_source(rep)?;
            let pa = fit(&a)?;
            let pb = fit(&b)?;
            overlap_indicators(&pa, &pb, directions, levels, mode)
        })
        .collect();
    let mut indicators = Vec::with_capacity(r);
    let mut last_err = None;
    for res in results {
        match res {
            Ok(ind) => indicators.push(ind),
            Err(e) => last_err = Some(e),
        }
    }
    let failed = r - indicators.len();
    if indicators.is_empty() {
        return Err(Error::AllComponentsFailed {
            attempted: r,
            last: last_err.map_or_else(String::new, |e| e.to_string()),
        });
    }
    if failed > 0 {
        warn!("overlap estimation: {failed} of {r} replicates failed and were excluded");
    }
    Ok(OverlapReport::from_indicators(&indicators, levels, failed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::StudentScalarPosterior;
    use approx::assert_abs_diff_eq;

    const Z975: f64 = 1.959_963_984_540_054;

    #[test]
    fn standard_normal_interval() {
        let ci = central_interval(&ScalarPosterior::normal(0.0, 1.0), 0.05).unwrap();
        assert_abs_diff_eq!(ci.lower, -Z975, epsilon = 1e-10);
        assert_abs_diff_eq!(ci.upper, Z975, epsilon = 1e-10);
        assert!(central_interval(&ScalarPosterior::normal(0.0, 1.0), 1.0).is_err());
        assert!(central_interval(&ScalarPosterior::normal(0.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn location_scale_interval() {
        let ci = central_interval(&ScalarPosterior::normal(3.0, 4.0), 0.1).unwrap();
        let base = central_interval(&ScalarPosterior::normal(0.0, 1.0), 0.1).unwrap();
        assert_abs_diff_eq!(ci.lower, 3.0 + 2.0 * base.lower, epsilon = 1e-12);
        assert_abs_diff_eq!(ci.upper, 3.0 + 2.0 * base.upper, epsilon = 1e-12);
    }

    #[test]
    fn student_interval_approaches_gaussian() {
        let t = ScalarPosterior::Student(StudentScalarPosterior::new(0.0, 1.0, 1e6).unwrap());
        let ci = central_interval(&t, 0.05).unwrap();
        assert_abs_diff_eq!(ci.upper, Z975, epsilon = 1e-3);
    }

    #[test]
    fn overlap_closed_interval_convention() {
        let iv = |a, b| CredibleInterval::new(a, b, 0.95).unwrap();
        assert!(intervals_overlap(&iv(0.0, 1.0), &iv(1.0, 2.0)));
        assert!(!intervals_overlap(&iv(0.0, 1.0), &iv(2.0, 3.0)));
        assert!(intervals_overlap(&iv(0.0, 3.0), &iv(1.0, 2.0)));
    }

    #[test]
    fn bound_values() {
        assert_eq!(overlap_bound(0.05, 0.05).unwrap(), 0.9025);
        assert_eq!(overlap_bound(0.0, 0.3).unwrap(), 0.7);
        assert_abs_diff_eq!(overlap_bound(0.2, 0.1).unwrap(), 0.72, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_mixture_centered() {
        let m = ScalarMixture::new(vec![
            (0.5, ScalarPosterior::normal(-1.0, 1.0)),
            (0.5, ScalarPosterior::normal(1.0, 1.0)),
        ])
        .unwrap();
        for mode in [IntervalMode::MomentMatchedNormal, IntervalMode::MixtureQuantile] {
            let ci = m.interval(0.05, mode).unwrap();
            assert_abs_diff_eq!(ci.lower + ci.upper, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn linreg_case_values() {
        let v = DVector::from_vec(vec![0.3, -0.2, 0.5]);
        let correct = linreg_overlap(
            &LinregCase::Correct {
                v: v.clone(),
                v_tilde: v.clone(),
                sigma: 1.3,
                sigma_tilde: 1.3,
                sigma_dagger: 1.3,
            },
            0.05,
        )
        .unwrap();
        assert!(!correct.upper_bound);
        assert_abs_diff_eq!(
            correct.probability,
            special::normal_central_prob(Z975 * 2f64.sqrt()),
            epsilon = 1e-14
        );

        let fixed = linreg_overlap(
            &LinregCase::FixedDesign {
                v: v.clone(),
                sigma: 1.0,
                sigma_tilde: 1.0,
                k: DMatrix::identity(3, 3) * 4.0,
            },
            0.05,
        )
        .unwrap();
        assert_abs_diff_eq!(
            fixed.probability,
            special::normal_central_prob(Z975 / 2f64.sqrt()),
            epsilon = 1e-14
        );

        let bound = linreg_overlap(
            &LinregCase::RandomDesignBound {
                v: v.clone(),
                v_tilde: v.clone() * 2.0,
                sigma: 1.0,
                sigma_tilde: 1.0,
                sigma_dagger: 1.0,
                mean_offset: 0.0,
            },
            0.05,
        )
        .unwrap();
        assert!(bound.upper_bound);
        assert_abs_diff_eq!(
            bound.probability,
            special::normal_central_prob(Z975 * 2f64.sqrt()),
            epsilon = 1e-14
        );

        assert!(linreg_overlap(
            &LinregCase::FixedDesign {
                v: v.clone(),
                sigma: 1.0,
                sigma_tilde: 1.0,
                k: DMatrix::zeros(3, 3),
            },
            0.05
        )
        .is_err());
    }

    #[test]
    fn location_errors() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let zero = DMatrix::from_element(1, 1, 0.0);
        let u = DVector::from_element(1, 1.0);
        assert!(asymptotic_overlap_location(&one, &zero, &u, 0.05, 1.0, PosteriorKind::Standard).is_err());
        assert!(asymptotic_overlap_location(&one, &one, &u, 0.05, 0.0, PosteriorKind::Bagged).is_err());
        assert!(growing_dim_overlap(1.0, 0.05, 1, 1, GrowingDimArm::BaggedLowerBound).is_err());
    }

    #[test]
    fn singular_j_rejected() {
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let k = DMatrix::identity(2, 2);
        let inputs = SandwichInputs {
            j,
            k,
            c: 1.0,
            u: DVector::from_vec(vec![1.0, 0.0]),
            alpha: 0.05,
        };
        assert!(matches!(
            asymptotic_overlap_regular(&inputs, PosteriorKind::Standard),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn estimate_trivial_cases() {
        let u = [DVector::from_element(1, 1.0)];
        let levels = [0.8, 0.95];
        let constant = estimate_overlap(
            |r| Ok((r as f64, -(r as f64))),
            |_: &f64| Ok(ScalarPosterior::normal(0.0, 1.0)),
            &u,
            &levels,
            10,
            IntervalMode::MomentMatchedNormal,
        )
        .unwrap();
        assert!(constant.per_direction.iter().all(|d| d.overlap_prob == 1.0));

        let disjoint = estimate_overlap(
            |_| Ok((0.0, 100.0)),
            |x: &f64| Ok(ScalarPosterior::normal(*x, 1.0)),
            &u,
            &levels,
            1,
            IntervalMode::MomentMatchedNormal,
        )
        .unwrap();
        assert!(disjoint.per_direction.iter().all(|d| d.overlap_prob == 0.0));
        assert!(disjoint.per_direction.iter().all(|d| d.violated()));

        let failing = estimate_overlap(
            |r| {
                if r % 2 == 0 {
                    Ok((0.0, 0.0))
                } else {
                    Err(Error::invalid("boom"))
                }
            },
            |x: &f64| Ok(ScalarPosterior::normal(*x, 1.0)),
            &u,
            &levels,
            4,
            IntervalMode::MomentMatchedNormal,
        )
        .unwrap();
        assert_eq!(failing.failed_replicates, 2);
        assert_eq!(failing.per_direction[0].replicates, 2);
    }

    #[test]
    fn csv_layout() {
        let report = OverlapReport::from_indicators(&[vec![vec![true, false]]], &[0.8, 0.95], 0);
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "direction_id,level,overlap_prob,bound,replicates,violated");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].ends_with(",true"));
    }
}
