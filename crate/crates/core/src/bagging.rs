//! Bagged posteriors: the average of standard posteriors over bootstrap
//! datasets, either by exact enumeration of every bootstrap multiset or by
//! `B` Monte Carlo draws.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::models::{
    column_means, ComponentPosterior, ConjugateModel, Dataset, GaussianLocationModel, GaussianPosterior, NigPosterior,
};
use crate::randstream::{draw_counts, resample, BootstrapCounts, SeedPath};

/// Largest `N^M` that [`bag_exact`] will enumerate.
pub const EXACT_ENUMERATION_CAP: u64 = 100_000;

/// Default number of bootstrap datasets.
pub const DEFAULT_B: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// Monte Carlo component drawn from this substream.
    Seeded { seed_path: SeedPath },
    /// Enumerated bootstrap multiset with these multiplicities.
    ExactEnumeration { counts: Vec<u32> },
}

#[derive(Debug, Clone)]
pub struct BaggedComponent {
    pub weight: f64,
    pub posterior: ComponentPosterior,
    pub provenance: Provenance,
}

#[derive(Debug, Clone)]
pub struct BaggedPosterior {
    components: Vec<BaggedComponent>,
    m: usize,
    attempted: usize,
}

impl BaggedPosterior {
    fn from_fits(fits: Vec<(Provenance, f64, Result<ComponentPosterior>)>, m: usize) -> Result<Self> {
        let attempted = fits.len();
        let mut last_err = None;
        let mut components = Vec::with_capacity(attempted);
        for (provenance, weight, fit) in fits {
            match fit {
                Ok(posterior) => components.push(BaggedComponent {
                    weight,
                    posterior,
                    provenance,
                }),
                Err(e) => last_err = Some(e),
            }
        }
        if components.is_empty() {
            return Err(Error::AllComponentsFailed {
                attempted,
                last: last_err.map_or_else(|| "no components".to_string(), |e| e.to_string()),
            });
        }
        let skipped = attempted - components.len();
        if skipped > 0 {
            warn!(
                "bagging: skipped {skipped} of {attempted} component fits ({})",
                last_err.map_or_else(String::new, |e| e.to_string())
            );
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        for c in &mut components {
            c.weight /= total;
        }
        let dim = components[0].posterior.dim();
        if components.iter().any(|c| c.posterior.dim() != dim) {
            return Err(Error::invalid("bagged components disagree on parameter dimension"));
        }
        Ok(Self {
            components,
            m,
            attempted,
        })
    }

    pub fn components(&self) -> &[BaggedComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.components[0].posterior.dim()
    }

    /// Number of component fits that failed and were dropped.
    pub fn skipped(&self) -> usize {
        self.attempted - self.components.len()
    }

    pub fn attempted(&self) -> usize {
        self.attempted
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().map(|c| c.weight)
    }
}

/// Exact bagged posterior: one component per bootstrap multiset, weighted by
/// its multinomial probability `M! / prod(k_i!) * N^{-M}`.
pub fn bag_exact<M: ConjugateModel + ?Sized>(model: &M, data: &Dataset, m: usize) -> Result<BaggedPosterior> {
    bag_exact_with_cap(model, data, m, EXACT_ENUMERATION_CAP)
}

pub fn bag_exact_with_cap<M: ConjugateModel + ?Sized>(
    model: &M,
    data: &Dataset,
    m: usize,
    cap: u64,
) -> Result<BaggedPosterior> {
    let n = data.n();
    if n == 0 {
        return Err(Error::invalid("cannot bag an empty dataset"));
    }
    let sequences = (n as f64).powi(m as i32);
    if sequences > cap as f64 {
        return Err(Error::EnumerationTooLarge { sequences, cap });
    }
    let total = sequences;
    let fits: Vec<_> = compositions(n, m)
        .into_par_iter()
        .map(|counts| {
            let weight = multinomial_coefficient(&counts) / total;
            let fit = BootstrapCounts::new(counts.clone())
                .and_then(|c| resample(data, &c))
                .and_then(|d| model.fit(&d));
            (Provenance::ExactEnumeration { counts }, weight, fit)
        })
        .collect();
    BaggedPosterior::from_fits(fits, m)
}

/// All vectors of `n` nonnegative integers summing to `m`, in lexicographic
/// order (largest first count first).
fn compositions(n: usize, m: usize) -> Vec<Vec<u32>> {
    fn rec(n: usize, m: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(m);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=m).rev() {
            prefix.push(k);
            rec(n, m - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, m as u32, &mut Vec::with_capacity(n), &mut out);
    out
}

/// `M! / prod(k_i!)`, exact as long as it fits in a u128.
fn multinomial_coefficient(counts: &[u32]) -> f64 {
    let mut coef: u128 = 1;
    let mut total: u128 = 0;
    for &k in counts {
        for j in 1..=k as u128 {
            total += 1;
            coef = coef * total / j;
        }
    }
    coef as f64
}

/// Monte Carlo bagged posterior from `b` bootstrap datasets of size `m`.
/// Component `i` uses the substream `root / i`. Fits that fail are dropped
/// and the remaining weights renormalized.
pub fn bag_monte_carlo<M: ConjugateModel + ?Sized>(
    model: &M,
    data: &Dataset,
    m: usize,
    b: usize,
    root: &SeedPath,
) -> Result<BaggedPosterior> {
    if b == 0 {
        return Err(Error::invalid("number of bootstrap datasets b must be at least 1"));
    }
    let n = data.n();
    let weight = 1.0 / b as f64;
    let fits: Vec<_> = (0..b)
        .into_par_iter()
        .map(|i| {
            let seed_path = root.child(i as u32);
            let fit = draw_counts(n, m, &seed_path)
                .and_then(|c| resample(data, &c))
                .and_then(|d| model.fit(&d));
            (Provenance::Seeded { seed_path }, weight, fit)
        })
        .collect();
    BaggedPosterior::from_fits(fits, m)
}

/// Mean and covariance of the bagged posterior split by the law of total
/// covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggedMoments {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    /// Average component covariance.
    pub within_cov: Vec<Vec<f64>>,
    /// Covariance of the component means.
    pub between_cov: Vec<Vec<f64>>,
}

impl BaggedMoments {
    fn from_matrices(mean: DVector<f64>, within: DMatrix<f64>, between: DMatrix<f64>) -> Self {
        let within = linalg::symmetrize(&within);
        let between = linalg::symmetrize(&between);
        let cov = &within + &between;
        Self {
            mean: mean.iter().copied().collect(),
            cov: linalg::to_rows(&cov),
            within_cov: linalg::to_rows(&within),
            between_cov: linalg::to_rows(&between),
        }
    }

    pub fn mean_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.mean)
    }

    pub fn cov_matrix(&self) -> DMatrix<f64> {
        linalg::from_rows(&self.cov).expect("rectangular by construction")
    }

    pub fn within_matrix(&self) -> DMatrix<f64> {
        linalg::from_rows(&self.within_cov).expect("rectangular by construction")
    }

    pub fn between_matrix(&self) -> DMatrix<f64> {
        linalg::from_rows(&self.between_cov).expect("rectangular by construction")
    }
}

pub fn bagged_moments(bp: &BaggedPosterior) -> Result<BaggedMoments> {
    let d = bp.dim();
    let mut mean = DVector::zeros(d);
    for c in bp.components() {
        mean += c.posterior.mean() * c.weight;
    }
    let mut within = DMatrix::zeros(d, d);
    let mut between = DMatrix::zeros(d, d);
    for c in bp.components() {
        within += c.posterior.cov()? * c.weight;
        let delta = c.posterior.mean() - &mean;
        between += &delta * delta.transpose() * c.weight;
    }
    Ok(BaggedMoments::from_matrices(mean, within, between))
}

/// Closed-form bagged moments for the Gaussian location model:
/// mean `R_M x_bar_N`, covariance `V_M + M^{-1} R_M Sigma_hat_N R_M'`.
pub fn gaussian_location_bagged_moments_closed_form(
    model: &GaussianLocationModel,
    data: &Dataset,
    m: usize,
) -> Result<BaggedMoments> {
    let x = data
        .location_matrix()
        .ok_or_else(|| Error::invalid("closed-form bagged moments need a location dataset"))?;
    if m == 0 {
        return Err(Error::invalid("bootstrap size m must be positive"));
    }
    let n = x.nrows();
    let x_bar = column_means(x);
    let mut sigma_hat = DMatrix::zeros(x.ncols(), x.ncols());
    for row in x.row_iter() {
        let r = row.transpose() - &x_bar;
        sigma_hat += &r * r.transpose();
    }
    sigma_hat /= n as f64;
    let r_m = model.shrinkage(m)?;
    let v_m = model.posterior_cov(m)?;
    let mean = &r_m * &x_bar;
    let between = &r_m * sigma_hat * r_m.transpose() / m as f64;
    Ok(BaggedMoments::from_matrices(mean, v_m, between))
}

/// `log sum_b w_b p_b(y_new | z_new)` with max-shift stabilization.
pub fn bagged_predictive_log_density<M: ConjugateModel + ?Sized>(
    bp: &BaggedPosterior,
    model: &M,
    z_new: &DVector<f64>,
    y_new: f64,
) -> Result<f64> {
    let terms = bp
        .components()
        .iter()
        .map(|c| Ok(c.weight.ln() + model.predictive(&c.posterior, z_new)?.ln_pdf(y_new)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(log_sum_exp(&terms))
}

pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Monte Carlo standard errors of the bagged mean and standard deviation of
/// `u'theta`, treating the `B` components as i.i.d. draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChooseBDiagnostic {
    pub b: usize,
    pub bagged_mean: f64,
    pub bagged_sd: f64,
    pub mc_standard_error_of_mean: f64,
    pub mc_standard_error_of_sd: f64,
}

pub fn choose_b_diagnostic(bp: &BaggedPosterior, u: &DVector<f64>) -> Result<ChooseBDiagnostic> {
    let b = bp.len();
    if b < 2 {
        return Err(Error::InsufficientComponents(b));
    }
    let w0 = 1.0 / b as f64;
    if bp.weights().any(|w| (w - w0).abs() > 1e-12) {
        return Err(Error::invalid("choose-B diagnostic requires equal component weights"));
    }
    let mut firsts = Vec::with_capacity(b);
    let mut seconds = Vec::with_capacity(b);
    for c in bp.components() {
        let s = c.posterior.marginal(u)?;
        let (mean, var) = (s.mean(), s.variance());
        firsts.push(mean);
        seconds.push(var + mean * mean);
    }
    let bf = b as f64;
    let m1 = firsts.iter().sum::<f64>() / bf;
    let m2 = seconds.iter().sum::<f64>() / bf;
    let (mut c11, mut c12, mut c22) = (0.0, 0.0, 0.0);
    for (a, q) in firsts.iter().zip(&seconds) {
        c11 += (a - m1) * (a - m1);
        c12 += (a - m1) * (q - m2);
        c22 += (q - m2) * (q - m2);
    }
    let denom = bf - 1.0;
    let (c11, c12, c22) = (c11 / denom, c12 / denom, c22 / denom);
    let var = (m2 - m1 * m1).max(0.0);
    let sd = var.sqrt();
    let se_mean = (c11 / bf).sqrt();
    // delta method for g(m1, m2) = sqrt(m2 - m1^2)
    let se_sd = if sd > 0.0 {
        let g1 = -m1 / sd;
        let g2 = 0.5 / sd;
        ((g1 * g1 * c11 + 2.0 * g1 * g2 * c12 + g2 * g2 * c22) / bf)
            .max(0.0)
            .sqrt()
    } else {
        0.0
    };
    Ok(ChooseBDiagnostic {
        b,
        bagged_mean: m1,
        bagged_sd: sd,
        mc_standard_error_of_mean: se_mean,
        mc_standard_error_of_sd: se_sd,
    })
}

pub const JSON_SCHEMA_ID: &str = "bagbayes.bagged_posterior.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaggedPosteriorJson {
    pub schema: String,
    pub m: usize,
    pub attempted: usize,
    pub skipped: usize,
    pub components: Vec<ComponentJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentJson {
    pub weight: f64,
    pub provenance: Provenance,
    pub posterior: PosteriorJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PosteriorJson {
    Gaussian {
        mean: Vec<f64>,
        cov: Vec<Vec<f64>>,
    },
    NormalInverseGamma {
        mean: Vec<f64>,
        precision: Vec<Vec<f64>>,
        a_n: f64,
        b_n: f64,
    },
}

impl BaggedPosterior {
    pub fn to_json(&self) -> BaggedPosteriorJson {
        let components = self
            .components
            .iter()
            .map(|c| ComponentJson {
                weight: c.weight,
                provenance: c.provenance.clone(),
                posterior: match &c.posterior {
                    ComponentPosterior::Gaussian(g) => PosteriorJson::Gaussian {
                        mean: g.mean.iter().copied().collect(),
                        cov: linalg::to_rows(&g.cov),
                    },
                    ComponentPosterior::Nig(p) => PosteriorJson::NormalInverseGamma {
                        mean: p.mean.iter().copied().collect(),
                        precision: linalg::to_rows(&p.precision),
                        a_n: p.a_n,
                        b_n: p.b_n,
                    },
                },
            })
            .collect();
        BaggedPosteriorJson {
            schema: JSON_SCHEMA_ID.to_string(),
            m: self.m,
            attempted: self.attempted,
            skipped: self.skipped(),
            components,
        }
    }

    pub fn from_json(doc: &BaggedPosteriorJson) -> Result<Self> {
        if doc.schema != JSON_SCHEMA_ID {
            return Err(Error::invalid(format!("unknown schema {:?}", doc.schema)));
        }
        let fits = doc
            .components
            .iter()
            .map(|c| {
                let post = match &c.posterior {
                    PosteriorJson::Gaussian { mean, cov } => linalg::from_rows(cov)
                        .and_then(|cov| GaussianPosterior::new(DVector::from_column_slice(mean), cov))
                        .map(ComponentPosterior::Gaussian),
                    PosteriorJson::NormalInverseGamma {
                        mean,
                        precision,
                        a_n,
                        b_n,
                    } => linalg::from_rows(precision).and_then(|precision| {
                        let inv = linalg::SpdFactor::new(&precision, "precision")?.inverse();
                        Ok(ComponentPosterior::Nig(NigPosterior {
                            mean: DVector::from_column_slice(mean),
                            precision,
                            precision_inv: inv,
                            a_n: *a_n,
                            b_n: *b_n,
                        }))
                    }),
                };
                (c.provenance.clone(), c.weight, post)
            })
            .collect::<Vec<_>>();
        if let Some((_, _, Err(e))) = fits.iter().find(|f| f.2.is_err()) {
            return Err(Error::invalid(format!("bad component in JSON: {e}")));
        }
        let mut bp = Self::from_fits(fits, doc.m)?;
        bp.attempted = doc.attempted;
        Ok(bp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FlatLinRegModel, NIGRegressionModel, ScalarPosterior};
    use approx::assert_relative_eq;

    fn loc(values: &[f64]) -> Dataset {
        Dataset::location(DMatrix::from_column_slice(values.len(), 1, values)).unwrap()
    }

    fn flat1() -> GaussianLocationModel {
        GaussianLocationModel::scalar(1.0, 0.0).unwrap()
    }

    #[test]
    fn exact_two_by_two_weights() {
        let bp = bag_exact(&flat1(), &loc(&[0.0, 2.0]), 2).unwrap();
        let w: Vec<f64> = bp.weights().collect();
        assert_eq!(w, vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn exact_three_by_two() {
        let bp = bag_exact(&flat1(), &loc(&[0.0, 1.0, 5.0]), 2).unwrap();
        assert_eq!(bp.len(), 6);
        assert_relative_eq!(bp.weights().sum::<f64>(), 1.0, epsilon = 1e-12);
        // sequences: each multiset {i,i} once, {i,j} twice, out of 9
        let w: Vec<f64> = bp.weights().map(|w| w * 9.0).collect();
        assert_eq!(w.iter().filter(|&&x| (x - 1.0).abs() < 1e-12).count(), 3);
        assert_eq!(w.iter().filter(|&&x| (x - 2.0).abs() < 1e-12).count(), 3);
    }

    #[test]
    fn exact_single_observation() {
        let model = GaussianLocationModel::scalar(2.0, 0.5).unwrap();
        let bp = bag_exact(&model, &loc(&[1.7]), 4).unwrap();
        assert_eq!(bp.len(), 1);
        assert_eq!(bp.components()[0].weight, 1.0);
        let direct = model.posterior(&loc(&[1.7; 4])).unwrap();
        assert_relative_eq!(bp.components()[0].posterior.mean()[0], direct.mean[0], epsilon = 1e-14);
    }

    #[test]
    fn exact_cap_enforced() {
        let data = loc(&(0..10).map(f64::from).collect::<Vec<_>>());
        assert!(matches!(
            bag_exact(&flat1(), &data, 6),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn exact_moments_match_closed_form() {
        let data = loc(&[0.0, 2.0]);
        let mo = bagged_moments(&bag_exact(&flat1(), &data, 2).unwrap()).unwrap();
        assert_relative_eq!(mo.mean[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(mo.cov[0][0], 1.0, epsilon = 1e-14);
        let cf = gaussian_location_bagged_moments_closed_form(&flat1(), &data, 2).unwrap();
        assert_relative_eq!(cf.cov[0][0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(cf.within_cov[0][0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_edge_cases() {
        let model = GaussianLocationModel::scalar(1.5, 0.2).unwrap();
        let data = loc(&[0.3, -1.0, 2.2, 0.9]);
        let cf = gaussian_location_bagged_moments_closed_form(&model, &data, 4).unwrap();
        let std = model.posterior(&data).unwrap();
        assert_relative_eq!(cf.mean[0], std.mean[0], epsilon = 1e-14);

        let constant = loc(&[3.0; 5]);
        let cf = gaussian_location_bagged_moments_closed_form(&model, &constant, 5).unwrap();
        assert_relative_eq!(cf.between_cov[0][0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(cf.cov[0][0], model.posterior_cov(5).unwrap()[(0, 0)], epsilon = 1e-15);
    }

    fn two_component(means: [f64; 2]) -> BaggedPosterior {
        let fits = means
            .iter()
            .map(|&m| {
                (
                    Provenance::ExactEnumeration { counts: vec![] },
                    0.5,
                    Ok(ComponentPosterior::Gaussian(GaussianPosterior {
                        mean: DVector::from_element(1, m),
                        cov: DMatrix::from_element(1, 1, 1.0),
                    })),
                )
            })
            .collect();
        BaggedPosterior::from_fits(fits, 1).unwrap()
    }

    #[test]
    fn mixture_moment_algebra() {
        let mo = bagged_moments(&two_component([0.0, 2.0])).unwrap();
        assert_relative_eq!(mo.mean[0], 1.0);
        assert_relative_eq!(mo.within_cov[0][0], 1.0);
        assert_relative_eq!(mo.between_cov[0][0], 1.0);
        assert_relative_eq!(mo.cov[0][0], 2.0);
    }

    #[test]
    fn single_component_has_no_between() {
        let bp = bag_monte_carlo(&flat1(), &loc(&[1.0, 4.0, 2.0]), 3, 1, &SeedPath::root(3)).unwrap();
        let mo = bagged_moments(&bp).unwrap();
        assert_eq!(mo.between_cov[0][0], 0.0);
        assert_eq!(mo.cov[0][0], mo.within_cov[0][0]);
    }

    #[test]
    fn monte_carlo_b1_is_one_bootstrap_posterior() {
        let data = loc(&[1.0, 4.0, 2.0]);
        let root = SeedPath::root(11);
        let bp = bag_monte_carlo(&flat1(), &data, 3, 1, &root).unwrap();
        let counts = draw_counts(3, 3, &root.child(0)).unwrap();
        let direct = flat1().posterior(&resample(&data, &counts).unwrap()).unwrap();
        assert_eq!(bp.components()[0].posterior.mean(), &direct.mean);
    }

    #[test]
    fn monte_carlo_deterministic() {
        let data = loc(&[1.0, 4.0, 2.0, -3.0]);
        let a = bag_monte_carlo(&flat1(), &data, 4, 30, &SeedPath::new(5, vec![2])).unwrap();
        let b = bag_monte_carlo(&flat1(), &data, 4, 30, &SeedPath::new(5, vec![2])).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn flat_regression_skips_singular_draws() {
        // two distinct rows in 2-D: any bootstrap that repeats one row is singular
        let data = Dataset::regression(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            DVector::from_vec(vec![1.0, 2.0]),
        )
        .unwrap();
        let model = FlatLinRegModel::new(1.0).unwrap();
        let bp = bag_monte_carlo(&model, &data, 2, 40, &SeedPath::root(1)).unwrap();
        assert!(bp.skipped() > 0);
        assert_eq!(bp.len() + bp.skipped(), 40);
        assert_relative_eq!(bp.weights().sum::<f64>(), 1.0, epsilon = 1e-12);

        let bad = Dataset::regression(
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]),
            DVector::from_vec(vec![1.0, 2.0]),
        )
        .unwrap();
        assert!(matches!(
            bag_monte_carlo(&model, &bad, 2, 5, &SeedPath::root(1)),
            Err(Error::AllComponentsFailed { attempted: 5, .. })
        ));
    }

    #[test]
    fn predictive_examples() {
        let model = NIGRegressionModel::default();
        let data = Dataset::regression(
            DMatrix::from_row_slice(3, 1, &[1.0, 0.5, -1.0]),
            DVector::from_vec(vec![0.4, 0.1, -0.9]),
        )
        .unwrap();
        let z = DVector::from_element(1, 0.7);
        let bp = bag_monte_carlo(&model, &data, 3, 1, &SeedPath::root(4)).unwrap();
        let lp = bagged_predictive_log_density(&bp, &model, &z, 0.3).unwrap();
        let direct = model.predictive(&bp.components()[0].posterior, &z).unwrap().ln_pdf(0.3);
        assert_relative_eq!(lp, direct, epsilon = 1e-13);

        // a mixture of identical components is the component itself
        let mut doubled = bp.clone();
        doubled.components.push(doubled.components[0].clone());
        for c in &mut doubled.components {
            c.weight = 0.5;
        }
        let lp2 = bagged_predictive_log_density(&doubled, &model, &z, 0.3).unwrap();
        assert_relative_eq!(lp, lp2, epsilon = 1e-13);
    }

    #[test]
    fn gaussian_predictive_two_standard_normals() {
        struct Unit;
        impl ConjugateModel for Unit {
            fn fit(&self, _: &Dataset) -> Result<ComponentPosterior> {
                unreachable!()
            }
            fn predictive(&self, _: &ComponentPosterior, _: &DVector<f64>) -> Result<ScalarPosterior> {
                Ok(ScalarPosterior::normal(0.0, 1.0))
            }
            fn log_posterior(&self, _: &Dataset, _: &[f64]) -> Result<f64> {
                unreachable!()
            }
        }
        let bp = two_component([0.0, 0.0]);
        let lp = bagged_predictive_log_density(&bp, &Unit, &DVector::zeros(1), 0.0).unwrap();
        assert_relative_eq!(lp, -0.918_938_533_204_672_7, epsilon = 1e-13);
    }

    #[test]
    fn choose_b_examples() {
        let u = DVector::from_element(1, 1.0);
        let d = choose_b_diagnostic(&two_component([0.0, 2.0]), &u).unwrap();
        assert_relative_eq!(d.mc_standard_error_of_mean, 1.0, epsilon = 1e-14);

        let d = choose_b_diagnostic(&two_component([1.0, 1.0]), &u).unwrap();
        assert_eq!(d.mc_standard_error_of_mean, 0.0);
        assert_eq!(d.mc_standard_error_of_sd, 0.0);

        let bp = bag_monte_carlo(&flat1(), &loc(&[1.0, 2.0]), 2, 1, &SeedPath::root(0)).unwrap();
        assert!(matches!(
            choose_b_diagnostic(&bp, &u),
            Err(Error::InsufficientComponents(1))
        ));
    }

    #[test]
    fn json_round_trip() {
        let data = Dataset::regression(
            DMatrix::from_row_slice(4, 2, &[1.0, 0.5, -1.0, 2.0, 0.3, 0.1, 1.0, 1.0]),
            DVector::from_vec(vec![0.4, 0.1, -0.9, 2.0]),
        )
        .unwrap();
        let bp = bag_monte_carlo(&NIGRegressionModel::default(), &data, 4, 3, &SeedPath::root(9)).unwrap();
        let doc = bp.to_json();
        let text = serde_json::to_string(&doc).unwrap();
        let back: BaggedPosteriorJson = serde_json::from_str(&text).unwrap();
        let bp2 = BaggedPosterior::from_json(&back).unwrap();
        assert_eq!(bp2.to_json(), doc);
    }
}
