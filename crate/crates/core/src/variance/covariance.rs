//! Multivariate asymptotic covariance and the data-augmentation special case.

use nalgebra::DMatrix;

use super::policy::ScanPolicy;
use super::variance_value;
use crate::error::{Error, Result};
use crate::projection::{decompose_function, ProjectionDecomposition, StateFunction};

/// Asymptotic covariance of `(f₁, …, f_k)` by polarization of the scalar variance.
pub fn asymptotic_covariance_matrix(fs: &[StateFunction], dec: &ProjectionDecomposition, policy: &ScanPolicy) -> Result<DMatrix<f64>> {
    let k = fs.len();
    let diag: Vec<f64> = fs.iter().map(|f| variance_value(&f.coords, dec, policy)).collect::<Result<_>>()?;
    let mut m = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        m[(i, i)] = diag[i];
        for j in 0..i {
            let sum = &fs[i].coords + &fs[j].coords;
            let v = (variance_value(&sum, dec, policy)? - diag[i] - diag[j]) / 2.0;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// `(V_D(f), V_R(f, r))` for `f ∈ H₁ = M₀₁ ⊕ P₁M`, where only `f₀₁` and `f₀` contribute.
pub fn data_augmentation_variances(f: &StateFunction, dec: &ProjectionDecomposition, r: f64) -> Result<(f64, f64)> {
    ScanPolicy::Rg { r }.validate()?;
    let parts = decompose_function(f, dec);
    let residual = (parts.f10.norm_squared() + parts.f11.norm_squared() + parts.f1.norm_squared()).sqrt();
    if residual > 1e-10 * f.coords.norm().max(1.0) {
        return Err(Error::NotInH1 { residual });
    }
    super::sigma::check_geometric(dec.c(), dec.tolerances().one)?;
    let n01 = parts.f01.norm_squared();
    let x0 = dec.basis_p1m().transpose() * &f.coords;
    let (mut qd, mut qr) = (0.0, 0.0);
    for (k, &ci) in dec.c().iter().enumerate() {
        let t = ci * ci / (1.0 - ci * ci);
        qd += (2.0 + 4.0 * t) * x0[k] * x0[k];
        qr += ((2.0 - r) / r + 2.0 / (r * (1.0 - r)) * t) * x0[k] * x0[k];
    }
    Ok((2.0 * n01 + qd, (2.0 - r) / r * n01 + qr))
}
