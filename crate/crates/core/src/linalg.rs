//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Smallest accepted ratio between the smallest and largest Cholesky pivot.
pub const PIVOT_RATIO_FLOOR: f64 = 1e-12;

/// Cholesky factorization of a symmetric positive-definite matrix that
/// rejects numerically singular input.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
}

impl SpdFactor {
    pub fn new(m: &DMatrix<f64>, what: &str) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::invalid(format!(
                "{what}: expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("{what}: non-finite entry")));
        }
        let chol = Cholesky::new(m.clone()).ok_or_else(|| Error::RankDeficient {
            what: what.to_string(),
            pivot_ratio: 0.0,
            condition: f64::INFINITY,
        })?;
        let l = chol.l_dirty();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for i in 0..l.nrows() {
            let p = l[(i, i)] * l[(i, i)];
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let ratio = lo / hi;
        if !(ratio >= PIVOT_RATIO_FLOOR) {
            return Err(Error::RankDeficient {
                what: what.to_string(),
                pivot_ratio: ratio,
                condition: 1.0 / ratio,
            });
        }
        Ok(Self { chol })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.solve(b)
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        symmetrize(&self.chol.inverse())
    }

    /// `u' M^{-1} u`, computed as the squared norm of `L^{-1} u`.
    pub fn inv_quad_form(&self, u: &DVector<f64>) -> f64 {
        let l = self.chol.l_dirty();
        let w = l
            .solve_lower_triangular(u)
            .expect("cholesky factor has a nonzero diagonal");
        w.norm_squared()
    }

    pub fn ln_det(&self) -> f64 {
        let l = self.chol.l_dirty();
        2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
    }

    /// Lower-triangular factor `L` with `M = L L'`.
    pub fn lower(&self) -> DMatrix<f64> {
        self.chol.l()
    }
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest absolute asymmetry relative to the largest absolute entry.
pub fn relative_asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (m - m.transpose()).amax() / scale
}

/// Checks a matrix is symmetric and has no eigenvalue below `-tol * trace`.
pub fn is_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() || relative_asymmetry(m) > tol {
        return false;
    }
    let trace = m.trace().abs().max(f64::MIN_POSITIVE);
    let eig = symmetrize(m).symmetric_eigenvalues();
    eig.iter().all(|&e| e >= -tol * trace)
}

/// A square root `A` with `A A' = m` for a symmetric PSD matrix, via the
/// eigendecomposition with negative eigenvalues clipped to zero. Works for
/// kernel matrices too ill-conditioned for Cholesky.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = symmetrize(m).symmetric_eigen();
    let mut vecs = eig.eigenvectors;
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        vecs.column_mut(j).scale_mut(s);
    }
    vecs
}

pub fn quad_form(m: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    u.dot(&(m * u))
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::invalid("ragged matrix rows"));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        match SpdFactor::new(&m, "test") {
            Err(Error::RankDeficient { .. }) => {}
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        assert!(matches!(
            SpdFactor::new(&m, "tiny pivot"),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn inverse_and_quad_form() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let f = SpdFactor::new(&m, "m").unwrap();
        let inv = f.inverse();
        assert_relative_eq!(&m * &inv, DMatrix::identity(2, 2), epsilon = 1e-12);
        let u = DVector::from_vec(vec![1.0, -2.0]);
        assert_relative_eq!(f.inv_quad_form(&u), quad_form(&inv, &u), epsilon = 1e-12);
        assert_relative_eq!(f.ln_det(), 11.0_f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn sqrt_of_singular_kernel() {
        let m = DMatrix::from_fn(5, 5, |i, j| (-((i as f64 - j as f64).powi(2)) / 64.0).exp());
        let a = psd_sqrt(&m);
        assert_relative_eq!(&a * a.transpose(), m, epsilon = 1e-10);
    }
}
