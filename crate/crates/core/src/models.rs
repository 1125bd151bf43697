//! Conjugate posteriors for the Gaussian location model, normal–inverse-gamma
//! linear regression, and flat-prior linear regression with known variance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, SpdFactor};
use crate::special;

/// Observations: an `N x D` matrix for the location model, or a design
/// matrix with outcomes for regression.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Location { x: DMatrix<f64> },
    Regression { z: DMatrix<f64>, y: DVector<f64> },
}

impl Dataset {
    pub fn location(x: DMatrix<f64>) -> Result<Self> {
        check_finite_rows(&x, "location data")?;
        Ok(Dataset::Location { x })
    }

    pub fn regression(z: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        check_finite_rows(&z, "design matrix")?;
        if y.len() != z.nrows() {
            return Err(Error::invalid(format!(
                "design has {} rows but {} outcomes were given",
                z.nrows(),
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("outcomes contain a non-finite value"));
        }
        Ok(Dataset::Regression { z, y })
    }

    pub fn n(&self) -> usize {
        match self {
            Dataset::Location { x } => x.nrows(),
            Dataset::Regression { z, .. } => z.nrows(),
        }
    }

    /// Parameter-space dimension `D`.
    pub fn dim(&self) -> usize {
        match self {
            Dataset::Location { x } => x.ncols(),
            Dataset::Regression { z, .. } => z.ncols(),
        }
    }

    pub fn location_matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            Dataset::Location { x } => Some(x),
            Dataset::Regression { .. } => None,
        }
    }

    pub fn regression_parts(&self) -> Option<(&DMatrix<f64>, &DVector<f64>)> {
        match self {
            Dataset::Regression { z, y } => Some((z, y)),
            Dataset::Location { .. } => None,
        }
    }

    /// New dataset built from the given row indices (repeats allowed).
    pub fn select_rows(&self, index: &[usize]) -> Dataset {
        match self {
            Dataset::Location { x } => Dataset::Location {
                x: x.select_rows(index),
            },
            Dataset::Regression { z, y } => Dataset::Regression {
                z: z.select_rows(index),
                y: DVector::from_iterator(index.len(), index.iter().map(|&i| y[i])),
            },
        }
    }

    fn expect_location(&self) -> Result<&DMatrix<f64>> {
        self.location_matrix()
            .ok_or_else(|| Error::invalid("expected a location dataset, got a regression dataset"))
    }

    fn expect_regression(&self) -> Result<(&DMatrix<f64>, &DVector<f64>)> {
        self.regression_parts()
            .ok_or_else(|| Error::invalid("expected a regression dataset, got a location dataset"))
    }
}

fn check_finite_rows(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::invalid(format!(
            "{what} must have at least one row and one column"
        )));
    }
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        let (i, j) = (pos % m.nrows(), pos / m.nrows());
        return Err(Error::invalid(format!(
            "{what}: non-finite entry at row {i}, column {j}"
        )));
    }
    Ok(())
}

/// Multivariate normal posterior summary.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPosterior {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianPosterior {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || !cov.is_square() {
            return Err(Error::invalid("covariance shape does not match the mean"));
        }
        if !linalg::is_psd(&cov, 1e-10) {
            return Err(Error::invalid("covariance is not symmetric positive semidefinite"));
        }
        Ok(Self { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn marginal(&self, u: &DVector<f64>) -> ScalarPosterior {
        ScalarPosterior::Normal {
            mean: self.mean.dot(u),
            var: linalg::quad_form(&self.cov, u).max(0.0),
        }
    }
}

/// Location-scale Student-t distribution of a scalar functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentScalarPosterior {
    pub center: f64,
    pub scale: f64,
    pub dof: f64,
}

impl StudentScalarPosterior {
    pub fn new(center: f64, scale: f64, dof: f64) -> Result<Self> {
        if !(scale > 0.0 && dof > 0.0 && center.is_finite()) {
            return Err(Error::invalid(format!(
                "student posterior needs finite center, scale > 0, dof > 0 (got {center}, {scale}, {dof})"
            )));
        }
        Ok(Self { center, scale, dof })
    }
}

/// Posterior of a scalar functional `u'theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarPosterior {
    Normal { mean: f64, var: f64 },
    Student(StudentScalarPosterior),
}

impl ScalarPosterior {
    pub fn normal(mean: f64, var: f64) -> Self {
        ScalarPosterior::Normal { mean, var }
    }

    pub fn center(&self) -> f64 {
        match *self {
            ScalarPosterior::Normal { mean, .. } => mean,
            ScalarPosterior::Student(s) => s.center,
        }
    }

    pub fn scale(&self) -> f64 {
        match *self {
            ScalarPosterior::Normal { var, .. } => var.sqrt(),
            ScalarPosterior::Student(s) => s.scale,
        }
    }

    pub fn mean(&self) -> f64 {
        self.center()
    }

    /// Variance; infinite for a Student-t with `dof <= 2`.
    pub fn variance(&self) -> f64 {
        match *self {
            ScalarPosterior::Normal { var, .. } => var,
            ScalarPosterior::Student(s) if s.dof > 2.0 => s.scale * s.scale * s.dof / (s.dof - 2.0),
            ScalarPosterior::Student(_) => f64::INFINITY,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let scale = self.scale();
        if scale == 0.0 {
            return if x >= self.center() { 1.0 } else { 0.0 };
        }
        let t = (x - self.center()) / scale;
        match *self {
            ScalarPosterior::Normal { .. } => special::normal_cdf(t),
            ScalarPosterior::Student(s) => special::student_t_cdf(t, s.dof),
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let q = match *self {
            ScalarPosterior::Normal { .. } => special::normal_quantile(p),
            ScalarPosterior::Student(s) => special::student_t_quantile(p, s.dof),
        };
        self.center() + self.scale() * q
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        let scale = self.scale();
        let t = (x - self.center()) / scale;
        match *self {
            ScalarPosterior::Normal { .. } => special::normal_ln_pdf(t) - scale.ln(),
            ScalarPosterior::Student(s) => special::student_t_ln_pdf(t, s.dof) - scale.ln(),
        }
    }

    /// Affine image `a + b * X` for `b > 0`.
    pub fn affine(&self, shift: f64, factor: f64) -> Self {
        match *self {
            ScalarPosterior::Normal { mean, var } => ScalarPosterior::Normal {
                mean: shift + factor * mean,
                var: factor * factor * var,
            },
            ScalarPosterior::Student(s) => ScalarPosterior::Student(StudentScalarPosterior {
                center: shift + factor * s.center,
                scale: factor.abs() * s.scale,
                dof: s.dof,
            }),
        }
    }
}

/// `x_n ~ N(theta, V)` with prior `theta ~ N(0, V0)`; the prior is given by
/// its precision so that `V0^{-1} = 0` encodes the flat prior.
#[derive(Debug, Clone)]
pub struct GaussianLocationModel {
    v: DMatrix<f64>,
    v_inv: DMatrix<f64>,
    v0_inv: DMatrix<f64>,
}

impl GaussianLocationModel {
    pub fn new(v: DMatrix<f64>, v0_inv: DMatrix<f64>) -> Result<Self> {
        if v0_inv.shape() != v.shape() {
            return Err(Error::ModelConstruction(format!(
                "V is {}x{} but the prior precision is {}x{}",
                v.nrows(),
                v.ncols(),
                v0_inv.nrows(),
                v0_inv.ncols()
            )));
        }
        if linalg::relative_asymmetry(&v) > 1e-10 {
            return Err(Error::ModelConstruction("V is not symmetric".into()));
        }
        let factor = SpdFactor::new(&v, "model covariance V").map_err(|e| Error::ModelConstruction(e.to_string()))?;
        if !linalg::is_psd(&v0_inv, 1e-10) {
            return Err(Error::ModelConstruction(
                "prior precision is not symmetric positive semidefinite".into(),
            ));
        }
        Ok(Self {
            v_inv: factor.inverse(),
            v,
            v0_inv,
        })
    }

    pub fn flat(v: DMatrix<f64>) -> Result<Self> {
        let d = v.nrows();
        Self::new(v, DMatrix::zeros(d, d))
    }

    /// One-dimensional model with scalar variance and prior precision.
    pub fn scalar(v: f64, v0_inv: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, v), DMatrix::from_element(1, 1, v0_inv))
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn v0_inv(&self) -> &DMatrix<f64> {
        &self.v0_inv
    }

    /// Posterior covariance `V_n = (V0^{-1} + n V^{-1})^{-1}`.
    pub fn posterior_cov(&self, n: usize) -> Result<DMatrix<f64>> {
        let precision = &self.v0_inv + &self.v_inv * n as f64;
        Ok(SpdFactor::new(&precision, "posterior precision")?.inverse())
    }

    /// Shrinkage matrix `R_n` mapping the sample mean to the posterior mean:
    /// `R_n = n V_n V^{-1} = (V V0^{-1} / n + I)^{-1}`.
    pub fn shrinkage(&self, n: usize) -> Result<DMatrix<f64>> {
        Ok(self.posterior_cov(n)? * &self.v_inv * n as f64)
    }

    /// Posterior from the sufficient statistics `(n, x_bar)`.
    pub fn posterior_from_mean(&self, n: usize, x_bar: &DVector<f64>) -> Result<GaussianPosterior> {
        let cov = self.posterior_cov(n)?;
        let mean = &cov * (&self.v_inv * x_bar) * n as f64;
        Ok(GaussianPosterior { mean, cov })
    }

    pub fn posterior(&self, data: &Dataset) -> Result<GaussianPosterior> {
        gaussian_location_posterior(self, data)
    }

    /// Unnormalized log posterior density at `theta`.
    pub fn log_posterior(&self, data: &Dataset, theta: &[f64]) -> Result<f64> {
        let x = data.expect_location()?;
        let theta = DVector::from_column_slice(theta);
        let mut lp = -0.5 * linalg::quad_form(&self.v0_inv, &theta);
        for row in x.row_iter() {
            let r = row.transpose() - &theta;
            lp -= 0.5 * linalg::quad_form(&self.v_inv, &r);
        }
        Ok(lp)
    }
}

/// Exact conjugate posterior `theta | x ~ N(R_N x_bar, V_N)`.
pub fn gaussian_location_posterior(model: &GaussianLocationModel, data: &Dataset) -> Result<GaussianPosterior> {
    let x = data.expect_location()?;
    if x.ncols() != model.dim() {
        return Err(Error::invalid(format!(
            "data dimension {} does not match model dimension {}",
            x.ncols(),
            model.dim()
        )));
    }
    let n = x.nrows();
    let x_bar = column_means(x);
    model.posterior_from_mean(n, &x_bar)
}

/// Row-order accumulation of the column means.
pub(crate) fn column_means(x: &DMatrix<f64>) -> DVector<f64> {
    let mut sum = DVector::zeros(x.ncols());
    for row in x.row_iter() {
        sum += row.transpose();
    }
    if x.nrows() > 0 {
        sum /= x.nrows() as f64;
    }
    sum
}

/// `sigma^2 ~ InvGam(a0, b0)`, `beta_d | sigma^2 ~ N(0, sigma^2 / lambda)`,
/// `y_n | z_n ~ N(z_n' beta, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NIGRegressionModel {
    pub a0: f64,
    pub b0: f64,
    pub lambda: f64,
}

impl Default for NIGRegressionModel {
    fn default() -> Self {
        Self {
            a0: 2.0,
            b0: 1.0,
            lambda: 1.0,
        }
    }
}

impl NIGRegressionModel {
    pub fn new(a0: f64, b0: f64, lambda: f64) -> Result<Self> {
        if !(a0 > 0.0 && b0 > 0.0 && lambda > 0.0) || !(a0.is_finite() && b0.is_finite() && lambda.is_finite()) {
            return Err(Error::ModelConstruction(format!(
                "NIG hyperparameters must be positive and finite (a0={a0}, b0={b0}, lambda={lambda})"
            )));
        }
        Ok(Self { a0, b0, lambda })
    }

    pub fn posterior(&self, data: &Dataset) -> Result<NigPosterior> {
        nig_regression_posterior(self, data)
    }

    /// Unnormalized log posterior in `theta = (log sigma^2, beta)`.
    pub fn log_posterior(&self, data: &Dataset, theta: &[f64]) -> Result<f64> {
        let (z, y) = data.expect_regression()?;
        if theta.len() != z.ncols() + 1 {
            return Err(Error::invalid("theta must be (log sigma^2, beta)"));
        }
        let log_s2 = theta[0];
        let s2 = log_s2.exp();
        let beta = DVector::from_column_slice(&theta[1..]);
        let resid = y - z * &beta;
        let d = beta.len() as f64;
        let n = y.len() as f64;
        // inverse-gamma prior on sigma^2 plus the log-Jacobian of sigma^2 = exp(log_s2)
        let mut lp = -(self.a0 + 1.0) * log_s2 - self.b0 / s2 + log_s2;
        lp += -0.5 * d * log_s2 - 0.5 * self.lambda * beta.norm_squared() / s2;
        lp += -0.5 * n * log_s2 - 0.5 * resid.norm_squared() / s2;
        Ok(lp)
    }
}

/// Normal–inverse-gamma posterior: `beta | sigma^2 ~ N(mu_N, sigma^2 Lambda_N^{-1})`,
/// `sigma^2 ~ InvGam(a_N, b_N)`.
#[derive(Debug, Clone)]
pub struct NigPosterior {
    pub mean: DVector<f64>,
    pub precision: DMatrix<f64>,
    /// `Lambda_N^{-1}`
    pub precision_inv: DMatrix<f64>,
    pub a_n: f64,
    pub b_n: f64,
}

impl NigPosterior {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn beta_given_sigma2(&self, sigma2: f64) -> GaussianPosterior {
        GaussianPosterior {
            mean: self.mean.clone(),
            cov: &self.precision_inv * sigma2,
        }
    }

    pub fn sigma2_marginal(&self) -> (f64, f64) {
        (self.a_n, self.b_n)
    }

    /// Marginal covariance of `beta`; requires `a_N > 1`.
    pub fn beta_cov(&self) -> Result<DMatrix<f64>> {
        if self.a_n <= 1.0 {
            return Err(Error::NumericalDegeneracy(format!(
                "marginal covariance of beta is infinite for a_N = {}",
                self.a_n
            )));
        }
        Ok(&self.precision_inv * (self.b_n / (self.a_n - 1.0)))
    }

    pub fn marginal_functional(&self, u: &DVector<f64>) -> Result<StudentScalarPosterior> {
        nig_marginal_functional(self, u)
    }

    /// Posterior predictive of a new outcome at regressor `z`.
    pub fn predictive(&self, z: &DVector<f64>) -> StudentScalarPosterior {
        let q = linalg::quad_form(&self.precision_inv, z);
        StudentScalarPosterior {
            center: self.mean.dot(z),
            scale: ((self.b_n / self.a_n) * (1.0 + q)).sqrt(),
            dof: 2.0 * self.a_n,
        }
    }
}

/// Standard normal–inverse-gamma conjugate update.
pub fn nig_regression_posterior(model: &NIGRegressionModel, data: &Dataset) -> Result<NigPosterior> {
    let (z, y) = data.expect_regression()?;
    let d = z.ncols();
    let zt = z.transpose();
    let precision = DMatrix::identity(d, d) * model.lambda + &zt * z;
    let factor = SpdFactor::new(&precision, "NIG posterior precision")?;
    let mean = factor.solve(&(&zt * y));
    // y'y - mu' Lambda mu == |y - Z mu|^2 + lambda |mu|^2
    let resid = y - z * &mean;
    let quad = resid.norm_squared() + model.lambda * mean.norm_squared();
    let a_n = model.a0 + 0.5 * y.len() as f64;
    let b_n = model.b0 + 0.5 * quad;
    if !(b_n > 0.0 && b_n.is_finite()) {
        return Err(Error::NumericalDegeneracy(format!("b_N = {b_n}")));
    }
    Ok(NigPosterior {
        mean,
        precision_inv: factor.inverse(),
        precision,
        a_n,
        b_n,
    })
}

/// `u'beta | data` is Student-t with `2 a_N` degrees of freedom, center
/// `u' mu_N` and scale `sqrt((b_N / a_N) u' Lambda_N^{-1} u)`.
pub fn nig_marginal_functional(posterior: &NigPosterior, u: &DVector<f64>) -> Result<StudentScalarPosterior> {
    check_direction(u, posterior.dim())?;
    let q = linalg::quad_form(&posterior.precision_inv, u);
    StudentScalarPosterior::new(
        posterior.mean.dot(u),
        ((posterior.b_n / posterior.a_n) * q).sqrt(),
        2.0 * posterior.a_n,
    )
}

pub(crate) fn check_direction(u: &DVector<f64>, dim: usize) -> Result<()> {
    if u.len() != dim {
        return Err(Error::invalid(format!(
            "direction has length {} but the parameter has dimension {dim}",
            u.len()
        )));
    }
    if u.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("direction vector u must be nonzero"));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("direction vector has a non-finite entry"));
    }
    Ok(())
}

/// Linear regression with known variance `sigma2` and a flat prior on `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatLinRegModel {
    pub sigma2: f64,
}

impl FlatLinRegModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::ModelConstruction(format!(
                "sigma2 must be positive, got {sigma2}"
            )));
        }
        Ok(Self { sigma2 })
    }

    /// Full posterior `beta | Z, y ~ N((Z'Z)^{-1} Z'y, sigma^2 (Z'Z)^{-1})`.
    pub fn posterior(&self, data: &Dataset) -> Result<GaussianPosterior> {
        let (z, y) = data.expect_regression()?;
        let zt = z.transpose();
        let gram = SpdFactor::new(&(&zt * z), "Z'Z")?;
        let mean = gram.solve(&(&zt * y));
        Ok(GaussianPosterior {
            mean,
            cov: gram.inverse() * self.sigma2,
        })
    }

    pub fn functional(&self, data: &Dataset, u: &DVector<f64>) -> Result<ScalarPosterior> {
        flat_linreg_functional(self, data, u)
    }

    /// Unbiased residual variance `|y - Z beta_hat|^2 / (N - D)`.
    pub fn residual_variance(data: &Dataset) -> Result<f64> {
        let (z, y) = data.expect_regression()?;
        let (n, d) = z.shape();
        if n <= d {
            return Err(Error::InsufficientData { needed: d + 1, got: n });
        }
        let zt = z.transpose();
        let gram = SpdFactor::new(&(&zt * z), "Z'Z")?;
        let beta = gram.solve(&(&zt * y));
        Ok((y - z * beta).norm_squared() / (n - d) as f64)
    }

    pub fn log_posterior(&self, data: &Dataset, theta: &[f64]) -> Result<f64> {
        let (z, y) = data.expect_regression()?;
        let beta = DVector::from_column_slice(theta);
        Ok(-0.5 * (y - z * beta).norm_squared() / self.sigma2)
    }
}

/// `u'beta | Z, y ~ N(v'y, sigma^2 |v|^2)` with `v = Z (Z'Z)^{-1} u`.
pub fn flat_linreg_functional(model: &FlatLinRegModel, data: &Dataset, u: &DVector<f64>) -> Result<ScalarPosterior> {
    let (z, y) = data.expect_regression()?;
    check_direction(u, z.ncols())?;
    let gram = SpdFactor::new(&(z.transpose() * z), "Z'Z")?;
    let v = z * gram.solve(u);
    Ok(ScalarPosterior::Normal {
        mean: v.dot(y),
        var: model.sigma2 * v.norm_squared(),
    })
}

/// Posterior summary of one fitted dataset.
#[derive(Debug, Clone)]
pub enum ComponentPosterior {
    Gaussian(GaussianPosterior),
    Nig(NigPosterior),
}

impl ComponentPosterior {
    pub fn dim(&self) -> usize {
        match self {
            ComponentPosterior::Gaussian(g) => g.dim(),
            ComponentPosterior::Nig(p) => p.dim(),
        }
    }

    pub fn mean(&self) -> &DVector<f64> {
        match self {
            ComponentPosterior::Gaussian(g) => &g.mean,
            ComponentPosterior::Nig(p) => &p.mean,
        }
    }

    pub fn cov(&self) -> Result<DMatrix<f64>> {
        match self {
            ComponentPosterior::Gaussian(g) => Ok(g.cov.clone()),
            ComponentPosterior::Nig(p) => p.beta_cov(),
        }
    }

    pub fn marginal(&self, u: &DVector<f64>) -> Result<ScalarPosterior> {
        check_direction(u, self.dim())?;
        match self {
            ComponentPosterior::Gaussian(g) => Ok(g.marginal(u)),
            ComponentPosterior::Nig(p) => Ok(ScalarPosterior::Student(nig_marginal_functional(p, u)?)),
        }
    }
}

/// A model whose posterior on any dataset is available in closed form.
pub trait ConjugateModel: Sync {
    fn fit(&self, data: &Dataset) -> Result<ComponentPosterior>;

    /// Posterior predictive for a new outcome at regressor `z`.
    fn predictive(&self, _posterior: &ComponentPosterior, _z: &DVector<f64>) -> Result<ScalarPosterior> {
        Err(Error::invalid("this model has no outcome predictive"))
    }

    /// Unnormalized log posterior density, used by the MCMC samplers.
    fn log_posterior(&self, data: &Dataset, theta: &[f64]) -> Result<f64>;
}

impl ConjugateModel for GaussianLocationModel {
    fn fit(&self, data: &Dataset) -> Result<ComponentPosterior> {
        Ok(ComponentPosterior::Gaussian(self.posterior(data)?))
    }

    fn log_posterior(&self, data: &Dataset, theta: &[f64]) -> Result<f64> {
        GaussianLocationModel::log_posterior(self, data, theta)
    }
}

impl ConjugateModel for NIGRegressionModel {
    fn fit(&self, data: &Dataset) -> Result<ComponentPosterior> {
        Ok(ComponentPosterior::Nig(self.posterior(data)?))
    }

    fn predictive(&self, posterior: &ComponentPosterior, z: &DVector<f64>) -> Result<ScalarPosterior> {
        match posterior {
            ComponentPosterior::Nig(p) => Ok(ScalarPosterior::Student(p.predictive(z))),
            ComponentPosterior::Gaussian(_) => Err(Error::invalid("NIG model given a Gaussian component")),
        }
    }

    fn log_posterior(&self, data: &Dataset, theta: &[f64]) -> Result<f64> {
        NIGRegressionModel::log_posterior(self, data, theta)
    }
}

impl ConjugateModel for FlatLinRegModel {
    fn fit(&self, data: &Dataset) -> Result<ComponentPosterior> {
        Ok(ComponentPosterior::Gaussian(self.posterior(data)?))
    }

    /// `N(z'mu, z' Sigma z + sigma^2)` with the plug-in variance.
    fn predictive(&self, posterior: &ComponentPosterior, z: &DVector<f64>) -> Result<ScalarPosterior> {
        match posterior {
            ComponentPosterior::Gaussian(g) => Ok(ScalarPosterior::Normal {
                mean: g.mean.dot(z),
                var: linalg::quad_form(&g.cov, z) + self.sigma2,
            }),
            ComponentPosterior::Nig(_) => Err(Error::invalid("flat model given an NIG component")),
        }
    }

    fn log_posterior(&self, data: &Dataset, theta: &[f64]) -> Result<f64> {
        FlatLinRegModel::log_posterior(self, data, theta)
    }
}

/// Any of the three conjugate families, chosen at runtime.
#[derive(Debug, Clone)]
pub enum Model {
    GaussianLocation(GaussianLocationModel),
    NigRegression(NIGRegressionModel),
    FlatLinReg(FlatLinRegModel),
}

impl ConjugateModel for Model {
    fn fit(&self, data: &Dataset) -> Result<ComponentPosterior> {
        match self {
            Model::GaussianLocation(m) => m.fit(data),
            Model::NigRegression(m) => m.fit(data),
            Model::FlatLinReg(m) => m.fit(data),
        }
    }

    fn predictive(&self, posterior: &ComponentPosterior, z: &DVector<f64>) -> Result<ScalarPosterior> {
        match self {
            Model::GaussianLocation(m) => m.predictive(posterior, z),
            Model::NigRegression(m) => m.predictive(posterior, z),
            Model::FlatLinReg(m) => m.predictive(posterior, z),
        }
    }

    fn log_posterior(&self, data: &Dataset, theta: &[f64]) -> Result<f64> {
        match self {
            Model::GaussianLocation(m) => m.log_posterior(data, theta),
            Model::NigRegression(m) => m.log_posterior(data, theta),
            Model::FlatLinReg(m) => m.log_posterior(data, theta),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn loc(values: &[f64]) -> Dataset {
        Dataset::location(DMatrix::from_column_slice(values.len(), 1, values)).unwrap()
    }

    fn reg(z: &[f64], d: usize, y: &[f64]) -> Dataset {
        Dataset::regression(DMatrix::from_row_slice(y.len(), d, z), DVector::from_column_slice(y)).unwrap()
    }

    #[test]
    fn location_examples() {
        let m = GaussianLocationModel::scalar(1.0, 1.0).unwrap();
        let p = m.posterior(&loc(&[2.0])).unwrap();
        assert_relative_eq!(p.mean[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(p.cov[(0, 0)], 0.5, epsilon = 1e-14);

        let flat = GaussianLocationModel::scalar(1.0, 0.0).unwrap();
        let p = flat.posterior(&loc(&[3.0, 5.0])).unwrap();
        assert_relative_eq!(p.mean[0], 4.0, epsilon = 1e-14);
        assert_relative_eq!(p.cov[(0, 0)], 0.5, epsilon = 1e-14);

        let p = flat.posterior(&loc(&[-1.5, 0.5, 1.0])).unwrap();
        assert_eq!(p.mean[0], 0.0);
    }

    #[test]
    fn non_pd_model_covariance_rejected() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GaussianLocationModel::flat(v),
            Err(Error::ModelConstruction(_))
        ));
    }

    #[test]
    fn shrinkage_matches_printed_form_when_commuting() {
        // with V0 proportional to V the two orderings of (V0^{-1} V / N + I)^{-1} coincide
        let v = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let v0_inv = SpdFactor::new(&(&v * 3.0), "v0").unwrap().inverse();
        let m = GaussianLocationModel::new(v.clone(), v0_inv.clone()).unwrap();
        let n = 7;
        let printed = (&v0_inv * &v / n as f64 + DMatrix::<f64>::identity(2, 2))
            .try_inverse()
            .unwrap();
        assert_relative_eq!(m.shrinkage(n).unwrap(), printed, epsilon = 1e-12);
    }

    #[test]
    fn nig_examples() {
        let model = NIGRegressionModel::new(2.0, 1.0, 1.0).unwrap();
        let p = model.posterior(&reg(&[1.0], 1, &[0.0])).unwrap();
        assert_relative_eq!(p.mean[0], 0.0);
        assert_relative_eq!(p.precision[(0, 0)], 2.0);
        assert_relative_eq!(p.a_n, 2.5);
        assert_relative_eq!(p.b_n, 1.0);

        let p = model.posterior(&reg(&[1.0, 1.0], 1, &[1.0, 3.0])).unwrap();
        assert_relative_eq!(p.mean[0], 4.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(p.a_n, 3.0);
        assert_relative_eq!(p.b_n, 10.0 / 3.0, epsilon = 1e-14);

        let u = DVector::from_element(1, 1.0);
        let s = p.marginal_functional(&u).unwrap();
        assert_relative_eq!(s.center, 4.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(s.dof, 6.0);
        let s2 = p.marginal_functional(&(&u * 2.0)).unwrap();
        assert_relative_eq!(s2.center, 2.0 * s.center, epsilon = 1e-14);
        assert_relative_eq!(s2.scale, 2.0 * s.scale, epsilon = 1e-14);
        assert_eq!(s2.dof, s.dof);
    }

    #[test]
    fn nig_zero_outcomes_give_zero_mean() {
        let model = NIGRegressionModel::default();
        let p = model
            .posterior(&reg(&[1.0, 2.0, -0.5, 0.3, 2.0, 1.0], 2, &[0.0, 0.0, 0.0]))
            .unwrap();
        assert!(p.mean.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn nig_zero_direction_rejected() {
        let p = NIGRegressionModel::default()
            .posterior(&reg(&[1.0], 1, &[0.5]))
            .unwrap();
        assert!(matches!(
            p.marginal_functional(&DVector::zeros(1)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn flat_linreg_examples() {
        let data = reg(&[1.0, 1.0], 1, &[1.0, 3.0]);
        let u = DVector::from_element(1, 1.0);
        let m = FlatLinRegModel::new(1.0).unwrap();
        let s = m.functional(&data, &u).unwrap();
        assert_relative_eq!(s.center(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.variance(), 0.5, epsilon = 1e-14);

        let doubled = FlatLinRegModel::new(2.0).unwrap().functional(&data, &u).unwrap();
        assert_relative_eq!(doubled.variance(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(doubled.center(), s.center(), epsilon = 1e-14);

        // exact interpolation recovers u'beta
        let z = [1.0, 0.5, -1.0, 2.0, 0.3, 0.3, 4.0, -2.0];
        let beta = [1.5, -0.25];
        let y: Vec<f64> = z.chunks(2).map(|r| r[0] * beta[0] + r[1] * beta[1]).collect();
        let data = reg(&z, 2, &y);
        let u = DVector::from_vec(vec![0.7, 2.0]);
        let s = m.functional(&data, &u).unwrap();
        assert_relative_eq!(s.center(), 0.7 * 1.5 - 2.0 * 0.25, epsilon = 1e-12);
    }

    #[test]
    fn flat_linreg_singular_design() {
        let data = reg(&[1.0, 2.0, 2.0, 4.0], 2, &[1.0, 2.0]);
        let err = FlatLinRegModel::new(1.0)
            .unwrap()
            .functional(&data, &DVector::from_vec(vec![1.0, 0.0]))
            .unwrap_err();
        match err {
            Error::RankDeficient { condition, .. } => assert!(condition > 1e12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn student_variance_and_affine() {
        let s = ScalarPosterior::Student(StudentScalarPosterior::new(1.0, 2.0, 5.0).unwrap());
        assert_relative_eq!(s.variance(), 4.0 * 5.0 / 3.0);
        let t = s.affine(1.0, 2.0);
        assert_relative_eq!(t.center(), 3.0);
        assert_relative_eq!(t.scale(), 4.0);
    }
}
