//! Small dense linear-algebra helpers shared by the projection and theory modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Orthonormal basis (as columns) of the complement of the unit vector `s` in `R^n`,
/// taken from the Householder reflection that maps `s` onto `±e_0`.
pub fn householder_complement(s: &DVector<f64>) -> DMatrix<f64> {
    let n = s.len();
    let mut v = s.clone();
    let sign = if s[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let vv = v.dot(&v);
    let mut h = DMatrix::<f64>::identity(n, n);
    if vv > 0.0 {
        h -= (&v * v.transpose()) * (2.0 / vv);
    }
    h.columns(1, n - 1).into_owned()
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in decreasing order.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::<f64>::zeros(m.nrows(), n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        pin_sign(&mut col);
        vectors.set_column(k, &col);
    }
    (values, vectors)
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(m)).eigenvalues.min()
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn spectral_norm_symmetric(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(m))
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Orthonormal basis of the range of an (approximately) orthogonal projection matrix.
pub fn projection_range(p: &DMatrix<f64>) -> DMatrix<f64> {
    let (values, vectors) = sorted_symmetric_eigen(p);
    let rank = values.iter().filter(|&&v| v > 0.5).count();
    vectors.columns(0, rank).into_owned()
}

/// Orthonormal basis of the complement, in `R^n`, of the span of the orthonormal columns of `basis`.
pub fn orthonormal_complement(basis: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    if basis.ncols() == 0 {
        return DMatrix::identity(n, n);
    }
    let proj = DMatrix::<f64>::identity(n, n) - basis * basis.transpose();
    projection_range(&proj)
}

/// Horizontal concatenation of column blocks with a common row count.
pub fn hstack(blocks: &[&DMatrix<f64>], nrows: usize) -> DMatrix<f64> {
    let ncols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::<f64>::zeros(nrows, ncols);
    let mut at = 0;
    for b in blocks {
        if b.ncols() > 0 {
            out.columns_mut(at, b.ncols()).copy_from(b);
            at += b.ncols();
        }
    }
    out
}

/// Flip `v` so that its largest-magnitude entry is positive.
pub fn pin_sign(v: &mut DVector<f64>) {
    let mut best = 0.0_f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best + 1e-12 {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.neg_mut();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn householder_complement_is_orthonormal_and_orthogonal_to_s() {
        let s = DVector::from_vec(vec![0.1_f64, 0.2, 0.3, 0.4]).map(f64::sqrt);
        let q = householder_complement(&s);
        assert_eq!(q.shape(), (4, 3));
        let gram = q.transpose() * &q;
        assert!((gram - DMatrix::identity(3, 3)).abs().max() < 1e-14);
        assert!((q.transpose() * &s).abs().max() < 1e-14);
    }

    #[test]
    fn complement_of_empty_basis_is_identity() {
        let c = orthonormal_complement(&DMatrix::zeros(3, 0), 3);
        assert_eq!(c.ncols(), 3);
    }

    #[test]
    fn complement_dimension() {
        let b = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let c = orthonormal_complement(&b, 3);
        assert_eq!(c.ncols(), 2);
        assert!((b.transpose() * c).abs().max() < 1e-14);
    }
}
