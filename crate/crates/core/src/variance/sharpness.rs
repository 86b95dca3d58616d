//! Functions showing that `V_D ≤ k₁(r) V_R(r)` cannot be improved when `‖C‖` is near 1.

use nalgebra::DVector;
use serde::Serialize;

use super::constants::comparison_constants;
use super::policy::ScanPolicy;
use super::variance_value;
use crate::error::{Error, Result};
use crate::projection::ProjectionDecomposition;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Coordinates of `f` in the function-space basis.
    #[serde(skip)]
    pub coords: DVector<f64>,
    /// Canonical pair the witness lives on.
    pub pair: usize,
    pub eta: f64,
    pub v_d: f64,
    pub v_r: f64,
    pub ratio: f64,
}

/// Builds `f` with `V_D(f) > η V_R(f, r)`.
///
/// For `η < k₁(r)`, `ηΣ_R − Σ_D` splits into a PSD block plus a diagonal term on `P₁M`
/// whose coefficient on pair `i` is `((2−r)/r)η − 2 + (α − β²/γ) cᵢ²/sᵢ²`. A pair where that
/// is negative gives `f = f₀ − (β/γ) W*CS⁻¹ f₀` with `f₀` the pair's `P₁M` direction.
pub fn sharpness_witness(dec: &ProjectionDecomposition, r: f64, eta: f64) -> Result<Witness> {
    let policy_r = ScanPolicy::Rg { r };
    policy_r.validate()?;
    let (k1, _) = comparison_constants(r);
    if eta >= k1 {
        return Err(Error::NoWitness(format!("eta = {eta} is not below k1({r}) = {k1}")));
    }
    let alpha = 2.0 * eta / (r * (1.0 - r)) - 4.0;
    let beta = 2.0 * eta / (1.0 - r) - 2.0;
    let gamma = (1.0 + r) * eta / (1.0 - r) - 2.0;
    let base = (2.0 - r) / r * eta - 2.0;
    let q = dec.q();
    let c = dec.c();

    let mut candidates: Vec<(usize, DVector<f64>, DVector<f64>)> = Vec::new();
    if gamma > 0.0 {
        let best = (0..q)
            .map(|i| {
                let t = c[i] * c[i] / (1.0 - c[i] * c[i]);
                (i, base + (alpha - beta * beta / gamma) * t)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((i, value)) = best {
            if value < 0.0 {
                let s = (1.0 - c[i] * c[i]).sqrt();
                let mut x0 = DVector::zeros(q);
                let mut x1 = DVector::zeros(q);
                x0[i] = 1.0;
                x1[i] = -(beta / gamma) * c[i] / s;
                candidates.push((i, x0, x1));
            }
        }
    } else {
        // ηΣ_R − Σ_D has a nonpositive (I−P₁)M coefficient; that direction alone may work
        for i in 0..q {
            let mut x1 = DVector::zeros(q);
            x1[i] = 1.0;
            candidates.push((i, DVector::zeros(q), x1));
        }
    }

    for (pair, x0, x1) in candidates {
        let coords = dec.from_canonical(&x0, &x1);
        let v_d = variance_value(&coords, dec, &ScanPolicy::Dg)?;
        let v_r = variance_value(&coords, dec, &policy_r)?;
        if v_d > eta * v_r {
            return Ok(Witness { coords, pair, eta, v_d, v_r, ratio: v_d / v_r });
        }
    }
    Err(Error::NoWitness(format!(
        "no canonical direction gives V_D > {eta} V_R at r = {r} (max canonical correlation {})",
        dec.norm_c()
    )))
}
