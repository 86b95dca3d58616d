//! The mean-zero function space `L₀²(π)` of a finite target, the conditional-expectation
//! projections `P₁`, `P₂`, and their two-projection canonical form.
//!
//! Functions are represented by coordinates in a π-orthonormal basis of the mean-zero
//! subspace, so the π-inner product becomes the Euclidean dot product and `P₁`, `P₂`
//! become symmetric idempotent matrices.

use nalgebra::{DMatrix, DVector, SVD};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    householder_complement, hstack, orthonormal_complement, pin_sign, projection_range,
    sorted_symmetric_eigen, symmetrize,
};
use crate::target::FiniteTarget;

/// `L₀²(π)` restricted to the support of `π`.
///
/// Grid cells of probability zero are never visited by the chains and carry no
/// weight, so the space has dimension `|support| − 1`.
#[derive(Debug, Clone)]
pub struct WeightedFunctionSpace {
    n1: usize,
    n2: usize,
    states: Vec<(usize, usize)>,
    grid_to_state: Vec<Option<usize>>,
    weights: DVector<f64>,
    /// `|support| × dim`; column `k` holds the values of basis function `k` on the support.
    basis: DMatrix<f64>,
}

/// A centered function on the grid together with its coordinates in the space basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFunction {
    /// Row-major values on the `n1 × n2` grid; π-null cells hold 0.
    pub values: Vec<f64>,
    pub coords: DVector<f64>,
}

impl StateFunction {
    pub fn norm_sq(&self) -> f64 {
        self.coords.norm_squared()
    }
}

impl WeightedFunctionSpace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Support states in row-major order.
    pub fn states(&self) -> &[(usize, usize)] {
        &self.states
    }

    pub fn state_index(&self, i: usize, j: usize) -> Option<usize> {
        self.grid_to_state[i * self.n2 + j]
    }

    /// π restricted to the support.
    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Gram matrix of the basis under `⟨f, g⟩ = Σ π(x) f(x) g(x)`.
    pub fn gram(&self) -> DMatrix<f64> {
        let weighted = DMatrix::from_fn(self.basis.nrows(), self.dim(), |s, k| self.weights[s] * self.basis[(s, k)]);
        self.basis.transpose() * weighted
    }

    /// Centers `values` (row-major over the grid) and computes its coordinates.
    pub fn function(&self, values: &[f64]) -> Result<StateFunction> {
        if values.len() != self.n1 * self.n2 {
            return Err(Error::InvalidParameter(format!(
                "function has {} values, grid has {}",
                values.len(),
                self.n1 * self.n2
            )));
        }
        let on_support = DVector::from_iterator(self.states.len(), self.states.iter().map(|&(i, j)| values[i * self.n2 + j]));
        let mean = on_support.dot(&self.weights);
        let centered = on_support.add_scalar(-mean);
        let weighted = centered.component_mul(&self.weights);
        let coords = self.basis.transpose() * weighted;
        Ok(self.assemble(coords, &centered))
    }

    pub fn function_from<F: Fn(usize, usize) -> f64>(&self, f: F) -> StateFunction {
        let values: Vec<f64> = (0..self.n1 * self.n2).map(|g| f(g / self.n2, g % self.n2)).collect();
        self.function(&values).expect("length matches grid")
    }

    /// Indicator of `x_coordinate = index` (coordinate is 1 or 2), centered.
    pub fn indicator(&self, coordinate: usize, index: usize) -> Result<StateFunction> {
        let limit = if coordinate == 1 { self.n1 } else { self.n2 };
        if !(coordinate == 1 || coordinate == 2) || index >= limit {
            return Err(Error::InvalidParameter(format!("no grid index {index} on coordinate {coordinate}")));
        }
        Ok(self.function_from(|i, j| {
            let hit = if coordinate == 1 { i == index } else { j == index };
            if hit { 1.0 } else { 0.0 }
        }))
    }

    pub fn from_coords(&self, coords: DVector<f64>) -> StateFunction {
        let on_support = &self.basis * &coords;
        self.assemble(coords, &on_support)
    }

    fn assemble(&self, coords: DVector<f64>, on_support: &DVector<f64>) -> StateFunction {
        let mut values = vec![0.0; self.n1 * self.n2];
        for (s, &(i, j)) in self.states.iter().enumerate() {
            values[i * self.n2 + j] = on_support[s];
        }
        StateFunction { values, coords }
    }
}

/// Builds an orthonormal basis of the π-mean-zero functions on the support of `target`.
pub fn build_space(target: &FiniteTarget) -> WeightedFunctionSpace {
    let (n1, n2) = (target.n1(), target.n2());
    let mut states = Vec::new();
    let mut grid_to_state = vec![None; n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            if target.prob(i, j) > 0.0 {
                grid_to_state[i * n2 + j] = Some(states.len());
                states.push((i, j));
            }
        }
    }
    let weights = DVector::from_iterator(states.len(), states.iter().map(|&(i, j)| target.prob(i, j)));
    let sqrt_w = weights.map(f64::sqrt);
    let q = householder_complement(&sqrt_w);
    let basis = DMatrix::from_fn(q.nrows(), q.ncols(), |s, k| q[(s, k)] / sqrt_w[s]);
    WeightedFunctionSpace { n1, n2, states, grid_to_state, weights, basis }
}

/// Full row-stochastic transition matrices on the support: `K₁` resamples `x₂` from
/// `π₁(·|x₁)`, `K₂` resamples `x₁` from `π₂(·|x₂)`.
pub fn transition_matrices(target: &FiniteTarget, space: &WeightedFunctionSpace) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = space.states.len();
    let mut k1 = DMatrix::<f64>::zeros(n, n);
    let mut k2 = DMatrix::<f64>::zeros(n, n);
    for (s, &(i, j)) in space.states.iter().enumerate() {
        for jj in 0..target.n2() {
            if let Some(t) = space.state_index(i, jj) {
                k1[(s, t)] = target.row_conditionals()[(i, jj)];
            }
        }
        for ii in 0..target.n1() {
            if let Some(t) = space.state_index(ii, j) {
                k2[(s, t)] = target.col_conditionals()[(j, ii)];
            }
        }
    }
    (k1, k2)
}

/// Matrices of `P₁` and `P₂` in the coordinates of `space`.
pub fn build_projections(target: &FiniteTarget, space: &WeightedFunctionSpace) -> (DMatrix<f64>, DMatrix<f64>) {
    let (k1, k2) = transition_matrices(target, space);
    let weighted_basis = DMatrix::from_fn(space.basis.nrows(), space.dim(), |s, k| space.weights[s] * space.basis[(s, k)]);
    let project = |k: &DMatrix<f64>| symmetrize(&(weighted_basis.transpose() * (k * &space.basis)));
    (project(&k1), project(&k2))
}

/// Singular-value thresholds that split the canonical correlations into
/// `M₀₀` (≥ 1 − `one`), `M` (strictly between) and orthogonal parts (≤ `zero`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub zero: f64,
    pub one: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { zero: 1e-9, one: 1e-9 }
    }
}

/// Halmos decomposition `L₀² = M₀₀ ⊕ M₀₁ ⊕ M₁₀ ⊕ M₁₁ ⊕ M` with `M = P₁M ⊕ (I−P₁)M`
/// and canonical form `P₁|_M = Γ*[[I,0],[0,0]]Γ`, `P₂|_M = Γ*[[C²,CS],[CS,S²]]Γ`, `Γ = I ⊕ W`.
#[derive(Debug, Clone)]
pub struct ProjectionDecomposition {
    p1: DMatrix<f64>,
    p2: DMatrix<f64>,
    basis_m01: DMatrix<f64>,
    basis_m10: DMatrix<f64>,
    basis_m11: DMatrix<f64>,
    basis_p1m: DMatrix<f64>,
    basis_ip1m: DMatrix<f64>,
    c: DVector<f64>,
    w: DMatrix<f64>,
    tolerances: Tolerances,
}

impl ProjectionDecomposition {
    pub fn dim(&self) -> usize {
        self.p1.nrows()
    }

    pub fn p1(&self) -> &DMatrix<f64> {
        &self.p1
    }

    pub fn p2(&self) -> &DMatrix<f64> {
        &self.p2
    }

    pub fn dim_m00(&self) -> usize {
        0
    }

    pub fn dim_m01(&self) -> usize {
        self.basis_m01.ncols()
    }

    pub fn dim_m10(&self) -> usize {
        self.basis_m10.ncols()
    }

    pub fn dim_m11(&self) -> usize {
        self.basis_m11.ncols()
    }

    /// `q = dim(P₁M) = dim((I−P₁)M)`.
    pub fn q(&self) -> usize {
        self.c.len()
    }

    pub fn basis_m01(&self) -> &DMatrix<f64> {
        &self.basis_m01
    }

    pub fn basis_m10(&self) -> &DMatrix<f64> {
        &self.basis_m10
    }

    pub fn basis_m11(&self) -> &DMatrix<f64> {
        &self.basis_m11
    }

    pub fn basis_p1m(&self) -> &DMatrix<f64> {
        &self.basis_p1m
    }

    pub fn basis_ip1m(&self) -> &DMatrix<f64> {
        &self.basis_ip1m
    }

    /// Canonical correlations (diagonal of `C`), nonincreasing.
    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    /// Diagonal of `S = √(I − C²)`.
    pub fn s(&self) -> DVector<f64> {
        self.c.map(|c| (1.0 - c * c).sqrt())
    }

    /// The pairing `W : (I−P₁)M → P₁M` as a matrix from `basis_ip1m` to `basis_p1m` coordinates.
    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
    }

    /// `‖C‖`, the largest canonical correlation.
    pub fn norm_c(&self) -> f64 {
        self.c[0]
    }

    /// Canonical coordinates `(f₀, W f₁)` of the `M`-part of a coordinate vector.
    pub fn canonical_coordinates(&self, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let x0 = self.basis_p1m.transpose() * v;
        let x1 = &self.w * (self.basis_ip1m.transpose() * v);
        (x0, x1)
    }

    /// Inverse of [`ProjectionDecomposition::canonical_coordinates`]: the element of `M`
    /// with canonical coordinates `(x0, x1)`.
    pub fn from_canonical(&self, x0: &DVector<f64>, x1: &DVector<f64>) -> DVector<f64> {
        &self.basis_p1m * x0 + &self.basis_ip1m * (self.w.transpose() * x1)
    }

    /// `Γ*` as a `dim × 2q` matrix: columns map canonical coordinates back into the space.
    pub fn gamma_adjoint(&self) -> DMatrix<f64> {
        let lower = &self.basis_ip1m * self.w.transpose();
        hstack(&[&self.basis_p1m, &lower], self.dim())
    }
}

/// Computes the two-projection decomposition of `(p1, p2)`.
///
/// Canonical correlations are the singular values of `U₁ᵀU₂`, where `U₁`, `U₂` are
/// orthonormal bases of the ranges of `P₁` and `P₂`.
pub fn halmos_decompose(p1: &DMatrix<f64>, p2: &DMatrix<f64>, tolerances: Tolerances) -> Result<ProjectionDecomposition> {
    let dim = p1.nrows();
    let u1 = projection_range(p1);
    let u2 = projection_range(p2);
    let (k1, k2) = (u1.ncols(), u2.ncols());
    let cross = u1.transpose() * &u2;

    let (sigma, left, right) = sorted_svd(&cross);
    let mut m00 = 0usize;
    let mut pairs: Vec<(f64, DVector<f64>, DVector<f64>)> = Vec::new();
    let mut kept_left: Vec<DVector<f64>> = Vec::new();
    let mut kept_right: Vec<DVector<f64>> = Vec::new();
    for (k, &s) in sigma.iter().enumerate() {
        if s >= 1.0 - tolerances.one {
            m00 += 1;
        } else if s > tolerances.zero {
            pairs.push((s, left.column(k).into_owned(), right.column(k).into_owned()));
        } else {
            continue;
        }
        kept_left.push(left.column(k).into_owned());
        kept_right.push(right.column(k).into_owned());
    }
    if m00 > 0 {
        return Err(Error::ReducibleTarget { dim: m00 });
    }
    if pairs.is_empty() {
        return Err(Error::IndependentComponents);
    }

    let stack = |vs: &[DVector<f64>], n: usize| -> DMatrix<f64> {
        let mut m = DMatrix::<f64>::zeros(n, vs.len());
        for (k, v) in vs.iter().enumerate() {
            m.set_column(k, v);
        }
        m
    };
    let basis_m01 = &u1 * orthonormal_complement(&stack(&kept_left, k1), k1);
    let basis_m10 = &u2 * orthonormal_complement(&stack(&kept_right, k2), k2);

    let q = pairs.len();
    let mut basis_p1m = DMatrix::<f64>::zeros(dim, q);
    let mut basis_ip1m = DMatrix::<f64>::zeros(dim, q);
    let mut c = DVector::<f64>::zeros(q);
    for (k, (s, a, b)) in pairs.into_iter().enumerate() {
        let mut e = &u1 * &a;
        let mut h2 = &u2 * &b;
        let before = e.clone();
        pin_sign(&mut e);
        if e != before {
            h2.neg_mut();
        }
        let sine = (1.0 - s * s).sqrt();
        let g = (&h2 - &e * s) / sine;
        basis_p1m.set_column(k, &e);
        basis_ip1m.set_column(k, &g);
        c[k] = s;
    }

    let occupied = hstack(&[&basis_m01, &basis_m10, &basis_p1m, &basis_ip1m], dim);
    let basis_m11 = orthonormal_complement(&occupied, dim);

    Ok(ProjectionDecomposition {
        p1: p1.clone(),
        p2: p2.clone(),
        basis_m01,
        basis_m10,
        basis_m11,
        basis_p1m,
        basis_ip1m,
        c,
        w: DMatrix::identity(q, q),
        tolerances,
    })
}

/// Singular values in decreasing order with matching left/right vectors.
fn sorted_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    if m.nrows() == 0 || m.ncols() == 0 {
        return (Vec::new(), DMatrix::zeros(m.nrows(), 0), DMatrix::zeros(m.ncols(), 0));
    }
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V");
    let n = svd.singular_values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let left = DMatrix::from_fn(u.nrows(), n, |r, k| u[(r, order[k])]);
    let right = DMatrix::from_fn(vt.ncols(), n, |r, k| vt[(order[k], r)]);
    (values, left, right)
}

/// Cosine of the Friedrichs angle between `H₁` and `H₂`, i.e. `‖C‖`.
pub fn friedrichs_cosine(dec: &ProjectionDecomposition) -> f64 {
    dec.norm_c()
}

/// Maximal correlation of `(X₁, X₂)` computed directly from the joint table: the
/// second singular value of `D₁^{-1/2} Π D₂^{-1/2}` (the first, equal to 1, belongs
/// to the constants).
pub fn maximal_correlation_direct(target: &FiniteTarget) -> f64 {
    let m1 = target.marginal1();
    let m2 = target.marginal2();
    let g = DMatrix::from_fn(target.n1(), target.n2(), |i, j| {
        target.prob(i, j) / (m1[i] * m2[j]).sqrt() - (m1[i] * m2[j]).sqrt()
    });
    SVD::new(g, false, false).singular_values.max()
}

/// Orthogonal components of `f` (coordinate vectors), `f = f01 + f10 + f11 + f0 + f1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionComponents {
    pub f01: DVector<f64>,
    pub f10: DVector<f64>,
    pub f11: DVector<f64>,
    pub f0: DVector<f64>,
    pub f1: DVector<f64>,
}

impl FunctionComponents {
    pub fn sum(&self) -> DVector<f64> {
        &self.f01 + &self.f10 + &self.f11 + &self.f0 + &self.f1
    }

    pub fn all(&self) -> [&DVector<f64>; 5] {
        [&self.f01, &self.f10, &self.f11, &self.f0, &self.f1]
    }
}

pub fn decompose_function(f: &StateFunction, dec: &ProjectionDecomposition) -> FunctionComponents {
    decompose_coords(&f.coords, dec)
}

pub(crate) fn decompose_coords(v: &DVector<f64>, dec: &ProjectionDecomposition) -> FunctionComponents {
    let project = |b: &DMatrix<f64>| b * (b.transpose() * v);
    FunctionComponents {
        f01: project(&dec.basis_m01),
        f10: project(&dec.basis_m10),
        f11: project(&dec.basis_m11),
        f0: project(&dec.basis_p1m),
        f1: project(&dec.basis_ip1m),
    }
}

/// Largest discrepancy between the eigenvalues of `(1−r)P₁ + rP₂` restricted to `M` and
/// the closed-form pairs `(1 ± √((1−2r)² + 4r(1−r)cᵢ²)) / 2`.
pub fn verify_nishio(dec: &ProjectionDecomposition, r: f64) -> f64 {
    let mut predicted = nishio_eigenvalues(dec.c(), r);
    let basis = hstack(&[&dec.basis_p1m, &dec.basis_ip1m], dec.dim());
    let mix = dec.p1() * (1.0 - r) + dec.p2() * r;
    let restricted = basis.transpose() * mix * &basis;
    let (computed, _) = sorted_symmetric_eigen(&restricted);
    predicted.sort_by(|a, b| b.total_cmp(a));
    predicted
        .iter()
        .zip(computed.iter())
        .fold(0.0_f64, |acc, (p, c)| acc.max((p - c).abs()))
}

pub fn nishio_eigenvalues(c: &DVector<f64>, r: f64) -> Vec<f64> {
    c.iter()
        .flat_map(|&ci| {
            let root = ((1.0 - 2.0 * r).powi(2) + 4.0 * r * (1.0 - r) * ci * ci).sqrt();
            [(1.0 + root) / 2.0, (1.0 - root) / 2.0]
        })
        .collect()
}

/// Residuals `‖Pᵢ Π_M − Γ* Bᵢ Γ‖_max` of the block formulas for `P₁|_M` and `P₂|_M`.
pub fn reconstruction_residuals(dec: &ProjectionDecomposition) -> (f64, f64) {
    let q = dec.q();
    let c = dec.c();
    let s = dec.s();
    let mut b1 = DMatrix::<f64>::zeros(2 * q, 2 * q);
    let mut b2 = DMatrix::<f64>::zeros(2 * q, 2 * q);
    for k in 0..q {
        b1[(k, k)] = 1.0;
        b2[(k, k)] = c[k] * c[k];
        b2[(k, q + k)] = c[k] * s[k];
        b2[(q + k, k)] = c[k] * s[k];
        b2[(q + k, q + k)] = s[k] * s[k];
    }
    let g = dec.gamma_adjoint();
    let pi_m = &g * g.transpose();
    let r1 = (dec.p1() * &pi_m - &g * b1 * g.transpose()).abs().max();
    let r2 = (dec.p2() * &pi_m - &g * b2 * g.transpose()).abs().max();
    (r1, r2)
}

/// Export form of a decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionSummary {
    pub dim: usize,
    pub dim_m00: usize,
    pub dim_m01: usize,
    pub dim_m10: usize,
    pub dim_m11: usize,
    pub q: usize,
    pub canonical_correlations: Vec<f64>,
    pub residual_p1: f64,
    pub residual_p2: f64,
}

impl From<&ProjectionDecomposition> for DecompositionSummary {
    fn from(dec: &ProjectionDecomposition) -> Self {
        let (residual_p1, residual_p2) = reconstruction_residuals(dec);
        DecompositionSummary {
            dim: dec.dim(),
            dim_m00: dec.dim_m00(),
            dim_m01: dec.dim_m01(),
            dim_m10: dec.dim_m10(),
            dim_m11: dec.dim_m11(),
            q: dec.q(),
            canonical_correlations: dec.c().iter().copied().collect(),
            residual_p1,
            residual_p2,
        }
    }
}

/// Space, projections and decomposition of a finite target in one call.
pub fn analyze_target(target: &FiniteTarget, tolerances: Tolerances) -> Result<(WeightedFunctionSpace, ProjectionDecomposition)> {
    let space = build_space(target);
    let (p1, p2) = build_projections(target, &space);
    let dec = halmos_decompose(&p1, &p2, tolerances)?;
    Ok((space, dec))
}
