//! Target distributions: finite joint pmfs on a product grid and the Gaussian family
//! with scalar second block.
//!
//! Conditionals follow the sampler convention: `π₁(·|x₁)` is the law of `X₂` given
//! `X₁ = x₁` (it updates `x₂`), and `π₂(·|x₂)` is the law of `X₁` given `X₂ = x₂`.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTarget {
    n1: usize,
    n2: usize,
    joint: DMatrix<f64>,
    /// Row `i` is `π₁(·|x₁ = i)`.
    row_conditionals: DMatrix<f64>,
    /// Row `j` is `π₂(·|x₂ = j)` (stored transposed, `n2 × n1`).
    col_conditionals: DMatrix<f64>,
    marginal1: DVector<f64>,
    marginal2: DVector<f64>,
}

impl FiniteTarget {
    /// Validates and normalizes a nonnegative `n1 × n2` table.
    ///
    /// Zero cells are allowed; rows or columns of zero mass are not, since the
    /// corresponding conditional would be undefined.
    pub fn new(joint: DMatrix<f64>) -> Result<Self> {
        let (n1, n2) = joint.shape();
        if n1 < 2 || n2 < 2 {
            return Err(Error::NotAProbability(format!(
                "grid must be at least 2x2, got {n1}x{n2}"
            )));
        }
        if let Some(bad) = joint.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::NotAProbability(format!("entry {bad} is negative or not finite")));
        }
        let total: f64 = joint.iter().sum();
        if total <= 0.0 {
            return Err(Error::NotAProbability("entries sum to zero".into()));
        }
        let joint = joint / total;
        for i in 0..n1 {
            if joint.row(i).sum() <= 0.0 {
                return Err(Error::DegenerateMarginal { axis: 1, index: i });
            }
        }
        for j in 0..n2 {
            if joint.column(j).sum() <= 0.0 {
                return Err(Error::DegenerateMarginal { axis: 2, index: j });
            }
        }
        let marginal1 = DVector::from_iterator(n1, (0..n1).map(|i| joint.row(i).sum()));
        let marginal2 = DVector::from_iterator(n2, (0..n2).map(|j| joint.column(j).sum()));
        let row_conditionals = DMatrix::from_fn(n1, n2, |i, j| joint[(i, j)] / marginal1[i]);
        let col_conditionals = DMatrix::from_fn(n2, n1, |j, i| joint[(i, j)] / marginal2[j]);
        Ok(FiniteTarget { n1, n2, joint, row_conditionals, col_conditionals, marginal1, marginal2 })
    }

    /// Like [`FiniteTarget::new`] but additionally requires the input to already sum to one.
    pub fn from_probabilities(joint: DMatrix<f64>) -> Result<Self> {
        let total: f64 = joint.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::NotAProbability(format!("entries sum to {total}, not 1")));
        }
        Self::new(joint)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n1 = rows.len();
        let n2 = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n2) {
            return Err(Error::NotAProbability("ragged joint table".into()));
        }
        Self::new(DMatrix::from_fn(n1, n2, |i, j| rows[i][j]))
    }

    /// Random target with joint weights `u_ij · exp(coupling · φ_i ψ_j)`, where `u`
    /// is Exp(1) noise and `φ`, `ψ` are standard normal scores.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n1: usize, n2: usize, coupling: f64) -> Result<Self> {
        let phi: Vec<f64> = (0..n1).map(|_| rng.sample(StandardNormal)).collect();
        let psi: Vec<f64> = (0..n2).map(|_| rng.sample(StandardNormal)).collect();
        let mut joint = DMatrix::<f64>::zeros(n1, n2);
        for i in 0..n1 {
            for j in 0..n2 {
                let u: f64 = Exp1.sample(rng);
                joint[(i, j)] = (u + 1e-3) * (coupling * phi[i] * psi[j]).exp();
            }
        }
        Self::new(joint)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn joint(&self) -> &DMatrix<f64> {
        &self.joint
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.joint[(i, j)]
    }

    pub fn row_conditionals(&self) -> &DMatrix<f64> {
        &self.row_conditionals
    }

    pub fn col_conditionals(&self) -> &DMatrix<f64> {
        &self.col_conditionals
    }

    pub fn marginal1(&self) -> &DVector<f64> {
        &self.marginal1
    }

    pub fn marginal2(&self) -> &DVector<f64> {
        &self.marginal2
    }

    /// Row-major grid index of `(i, j)`.
    pub fn grid_index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTarget {
    p: usize,
    m1: DVector<f64>,
    m2: f64,
    a: DMatrix<f64>,
    b: DVector<f64>,
    a_inv: DMatrix<f64>,
    /// Lower Cholesky factor of `A⁻¹`.
    a_inv_chol: DMatrix<f64>,
}

/// Parameters of `X₂ | X₁` and `X₁ | X₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianConditionals {
    pub x2_mean: f64,
    pub x2_var: f64,
    pub x1_mean: DVector<f64>,
    pub x1_cov: DMatrix<f64>,
}

impl GaussianTarget {
    /// `(X₁, X₂) ~ N((m₁, m₂), [[A, b], [bᵀ, 1]]⁻¹)`.
    pub fn new(m1: DVector<f64>, m2: f64, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let p = m1.len();
        if p == 0 || a.shape() != (p, p) || b.len() != p {
            return Err(Error::InvalidGaussian(format!(
                "dimension mismatch: m1 has {p} entries, A is {}x{}, b has {}",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        if (&a - a.transpose()).abs().max() > 1e-12 {
            return Err(Error::InvalidGaussian("A is not symmetric".into()));
        }
        let min_eig = crate::linalg::min_eigenvalue(&a);
        if min_eig <= 1e-10 {
            return Err(Error::InvalidGaussian(format!(
                "A is not positive definite (min eigenvalue {min_eig:e})"
            )));
        }
        let chol = Cholesky::new(a.clone())
            .ok_or_else(|| Error::InvalidGaussian("Cholesky of A failed".into()))?;
        let a_inv = chol.inverse();
        let quad = b.dot(&(&a_inv * &b));
        if quad >= 1.0 {
            return Err(Error::InvalidGaussian(format!(
                "b'A^-1 b = {quad} must be < 1 for a positive definite precision"
            )));
        }
        if b.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidGaussian("b = 0 makes the components independent".into()));
        }
        let a_inv_chol = Cholesky::new(a_inv.clone())
            .ok_or_else(|| Error::InvalidGaussian("Cholesky of A^-1 failed".into()))?
            .l();
        Ok(GaussianTarget { p, m1, m2, a, b, a_inv, a_inv_chol })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m1(&self) -> &DVector<f64> {
        &self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn a_inv(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    pub(crate) fn a_inv_chol(&self) -> &DMatrix<f64> {
        &self.a_inv_chol
    }

    /// `bᵀA⁻¹b`, the squared maximal correlation.
    pub fn squared_max_correlation(&self) -> f64 {
        self.b.dot(&(&self.a_inv * &self.b))
    }

    /// Marginal variance of `X₂` (Schur complement of `A`).
    pub fn x2_variance(&self) -> f64 {
        1.0 / (1.0 - self.squared_max_correlation())
    }

    /// Full `(p+1) × (p+1)` covariance, the inverse of the precision matrix.
    pub fn covariance(&self) -> DMatrix<f64> {
        let p = self.p;
        let mut prec = DMatrix::<f64>::zeros(p + 1, p + 1);
        prec.view_mut((0, 0), (p, p)).copy_from(&self.a);
        for i in 0..p {
            prec[(i, p)] = self.b[i];
            prec[(p, i)] = self.b[i];
        }
        prec[(p, p)] = 1.0;
        prec.try_inverse().expect("precision is positive definite by construction")
    }

    /// Value of `f(x₁, x₂) = x₂ − m₂ + bᵀ(x₁ − m₁)`.
    pub fn example_function(&self, x1: &[f64], x2: f64) -> f64 {
        x2 - self.m2 + x1.iter().zip(self.m1.iter()).zip(self.b.iter()).map(|((x, m), b)| b * (x - m)).sum::<f64>()
    }

    /// `‖f‖²` of [`GaussianTarget::example_function`] under the target.
    pub fn example_function_norm_sq(&self) -> f64 {
        let w = DVector::from_iterator(self.p + 1, self.b.iter().copied().chain(std::iter::once(1.0)));
        w.dot(&(self.covariance() * &w))
    }

    /// Cell-center discretization of a `p = 1` target on a `grid × grid` lattice spanning
    /// `±half_width` marginal standard deviations around the mean. Returns the target
    /// and the lattice coordinates of both axes.
    pub fn discretize(&self, grid: usize, half_width: f64) -> Result<(FiniteTarget, Vec<f64>, Vec<f64>)> {
        if self.p != 1 {
            return Err(Error::InvalidGaussian("discretization supports p = 1 only".into()));
        }
        let cov = self.covariance();
        let axis = |mean: f64, var: f64| -> Vec<f64> {
            let sd = var.sqrt();
            let h = 2.0 * half_width * sd / grid as f64;
            (0..grid).map(|k| mean - half_width * sd + (k as f64 + 0.5) * h).collect()
        };
        let xs1 = axis(self.m1[0], cov[(0, 0)]);
        let xs2 = axis(self.m2, cov[(1, 1)]);
        let a = self.a[(0, 0)];
        let b = self.b[0];
        let joint = DMatrix::from_fn(grid, grid, |i, j| {
            let d1 = xs1[i] - self.m1[0];
            let d2 = xs2[j] - self.m2;
            (-0.5 * (a * d1 * d1 + 2.0 * b * d1 * d2 + d2 * d2)).exp()
        });
        Ok((FiniteTarget::new(joint)?, xs1, xs2))
    }
}

/// Exact conditional laws at `(x1, x2)`.
pub fn gaussian_conditionals(target: &GaussianTarget, x1: &DVector<f64>, x2: f64) -> GaussianConditionals {
    let x2_mean = target.m2 - target.b.dot(&(x1 - &target.m1));
    let x1_mean = &target.m1 - (&target.a_inv * &target.b) * (x2 - target.m2);
    GaussianConditionals { x2_mean, x2_var: 1.0, x1_mean, x1_cov: target.a_inv.clone() }
}

/// Maximal correlation between `X₁` and `X₂`, `√(bᵀA⁻¹b)`.
pub fn gaussian_max_correlation(target: &GaussianTarget) -> f64 {
    target.squared_max_correlation().sqrt()
}

/// Relative cost of one `π₂(·|x₂)` draw in units of one `π₁(·|x₁)` draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    tau: f64,
}

impl CostModel {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        Ok(CostModel { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { tau: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn target(rows: &[&[f64]]) -> Result<FiniteTarget> {
        FiniteTarget::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn binary_target_marginals() {
        let t = target(&[&[0.4, 0.1], &[0.1, 0.4]]).unwrap();
        assert!((t.marginal1()[0] - 0.5).abs() < 1e-15);
        assert!((t.marginal2()[1] - 0.5).abs() < 1e-15);
        assert!((t.row_conditionals()[(0, 0)] - 0.8).abs() < 1e-15);
        assert!((t.col_conditionals()[(1, 0)] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn product_and_block_diagonal_targets_validate() {
        assert!(target(&[&[0.25, 0.25], &[0.25, 0.25]]).is_ok());
        assert!(target(&[&[0.5, 0.0], &[0.0, 0.5]]).is_ok());
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(target(&[&[0.5, -0.1], &[0.3, 0.3]]), Err(Error::NotAProbability(_))));
        assert!(matches!(target(&[&[0.0, 0.0], &[0.0, 0.0]]), Err(Error::NotAProbability(_))));
        assert_eq!(
            target(&[&[0.5, 0.5], &[0.0, 0.0]]).unwrap_err(),
            Error::DegenerateMarginal { axis: 1, index: 1 }
        );
        assert_eq!(
            target(&[&[0.5, 0.0], &[0.5, 0.0]]).unwrap_err(),
            Error::DegenerateMarginal { axis: 2, index: 1 }
        );
        assert!(target(&[&[1.0, 0.0]]).is_err());
        assert!(FiniteTarget::from_probabilities(DMatrix::from_element(2, 2, 0.3)).is_err());
    }

    #[test]
    fn gaussian_conditionals_one_dimensional() {
        let g = GaussianTarget::new(DVector::from_element(1, 0.0), 0.0, DMatrix::identity(1, 1), DVector::from_element(1, 0.6)).unwrap();
        let c = gaussian_conditionals(&g, &DVector::from_element(1, 1.0), 0.0);
        assert!((c.x2_mean + 0.6).abs() < 1e-15);
        assert_eq!(c.x2_var, 1.0);
        let centered = gaussian_conditionals(&g, g.m1(), 3.0);
        assert_eq!(centered.x2_mean, g.m2());
        assert!((gaussian_max_correlation(&g) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn gaussian_conditionals_two_dimensional() {
        let m1 = DVector::from_vec(vec![1.0, -2.0]);
        let g = GaussianTarget::new(m1.clone(), 0.5, DMatrix::identity(2, 2), DVector::from_vec(vec![0.5, 0.5])).unwrap();
        let c = gaussian_conditionals(&g, &m1, 1.5);
        assert!((c.x1_mean[0] - 0.5).abs() < 1e-15);
        assert!((c.x1_mean[1] + 2.5).abs() < 1e-15);
        assert!((c.x1_cov.clone() - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-15);
    }

    #[test]
    fn gaussian_max_correlation_scaled_precision() {
        let g = GaussianTarget::new(DVector::zeros(2), 0.0, DMatrix::identity(2, 2) * 2.0, DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert!((gaussian_max_correlation(&g) - 0.5_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_validation() {
        let z = DVector::<f64>::zeros(1);
        assert!(GaussianTarget::new(z.clone(), 0.0, DMatrix::identity(1, 1), DVector::zeros(1)).is_err());
        assert!(GaussianTarget::new(z.clone(), 0.0, DMatrix::identity(1, 1), DVector::from_element(1, 1.0)).is_err());
        assert!(GaussianTarget::new(z.clone(), 0.0, -DMatrix::<f64>::identity(1, 1), DVector::from_element(1, 0.1)).is_err());
        assert!(GaussianTarget::new(z, 0.0, DMatrix::identity(2, 2), DVector::from_element(1, 0.1)).is_err());
    }

    #[test]
    fn example_function_has_unit_norm() {
        let g = GaussianTarget::new(DVector::from_vec(vec![0.3, 1.0]), 2.0, DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]), DVector::from_vec(vec![0.4, 0.2])).unwrap();
        assert!((g.example_function_norm_sq() - 1.0).abs() < 1e-12);
        assert!((g.x2_variance() - g.covariance()[(2, 2)]).abs() < 1e-12);
    }

    #[test]
    fn cost_model_rejects_nonpositive() {
        assert!(CostModel::new(0.0).is_err());
        assert!(CostModel::new(-1.0).is_err());
        assert_eq!(CostModel::new(2.5).unwrap().tau(), 2.5);
    }

    proptest! {
        #[test]
        fn total_probability_and_scale_invariance(
            cells in proptest::collection::vec(0.01f64..1.0, 12),
            scale in 0.1f64..100.0,
        ) {
            let joint = DMatrix::from_row_slice(3, 4, &cells);
            let t = FiniteTarget::new(joint.clone()).unwrap();
            // Σ_i π₁(i) π₁(j | i) = π₂(j)
            for j in 0..4 {
                let s: f64 = (0..3).map(|i| t.marginal1()[i] * t.row_conditionals()[(i, j)]).sum();
                prop_assert!((s - t.marginal2()[j]).abs() < 1e-12);
            }
            let scaled = FiniteTarget::new(joint * scale).unwrap();
            prop_assert!((scaled.row_conditionals() - t.row_conditionals()).abs().max() < 1e-12);
            prop_assert!((scaled.col_conditionals() - t.col_conditionals()).abs().max() < 1e-12);
        }
    }
}
