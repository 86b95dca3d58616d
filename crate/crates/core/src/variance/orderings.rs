//! Loewner-order checks between the Σ operators on `M`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::constants::{comparison_constants, mdg_constants, mdg_sandwich};
use super::policy::ScanPolicy;
use super::sigma::{assemble, pair_block, BlockCoefficients};
use crate::linalg::min_eigenvalue;
use crate::projection::ProjectionDecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockPsdCheck {
    /// `a, c, d ≥ 0` and `ac − b² ≥ 0`, the sufficient conditions.
    pub conditions_hold: bool,
    /// Smallest eigenvalue of the assembled `2q × 2q` block.
    pub min_eigenvalue: f64,
}

/// Tests whether `[[dI + aC²S⁻², bCS⁻¹], [bCS⁻¹, cI]]` is positive semi-definite, both
/// through the scalar conditions and exactly. `slack` absorbs rounding in the conditions.
pub fn check_block_psd(k: &BlockCoefficients, dec: &ProjectionDecomposition, slack: f64) -> BlockPsdCheck {
    let conditions_hold = k.a >= -slack && k.c >= -slack && k.d >= -slack && k.a * k.c - k.b * k.b >= -slack;
    let block = assemble(dec.c(), |ci| k.pair(ci));
    BlockPsdCheck { conditions_hold, min_eigenvalue: min_eigenvalue(&block) }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingCheck {
    /// `"X <= Y"`; the reported eigenvalue is that of `Y − X`.
    pub name: String,
    pub min_eigenvalue: f64,
}

/// Every claimed ordering `X ≤ Y` among `Σ_D`, `Σ_R(r)`, `Σ_M(l)`, `Σ_S`, with the
/// smallest eigenvalue of `Y − X` on `M`.
pub fn ordering_suite(dec: &ProjectionDecomposition, r: f64, l: u32) -> Vec<OrderingCheck> {
    ordering_suite_perturbed(dec, r, l, 0.0)
}

/// [`ordering_suite`] with `shift · I` added to `Σ_D`, for exercising failure reporting.
pub fn ordering_suite_perturbed(dec: &ProjectionDecomposition, r: f64, l: u32, sigma_d_shift: f64) -> Vec<OrderingCheck> {
    orderings_for_correlations(dec.c(), r, l, sigma_d_shift)
}

/// The ordering suite for any set of canonical correlations.
pub fn orderings_for_correlations(c: &DVector<f64>, r: f64, l: u32, sigma_d_shift: f64) -> Vec<OrderingCheck> {
    let block = |p: ScanPolicy| assemble(c, |ci| pair_block(&p, ci));
    let n = 2 * c.len();
    let sd = block(ScanPolicy::Dg) + DMatrix::<f64>::identity(n, n) * sigma_d_shift;
    let sr = block(ScanPolicy::Rg { r });
    let rl = 1.0 / (l as f64 + 1.0);
    let srl = block(ScanPolicy::Rg { r: rl });
    let sm = block(ScanPolicy::Mdg { l });
    let ss = block(ScanPolicy::Rss);
    let (k1, k2) = comparison_constants(r);
    let (m1, m2) = mdg_constants(l);
    let check = |name: String, lower: &DMatrix<f64>, upper: DMatrix<f64>| OrderingCheck {
        name,
        min_eigenvalue: min_eigenvalue(&(upper - lower)),
    };
    vec![
        check(format!("SD <= k1({r}) SR({r})"), &sd, &sr * k1),
        check(format!("SR({r}) <= k2({r}) SD"), &sr, &sd * k2),
        check(format!("SM({l}) <= SR(1/{})", l + 1), &sm, srl.clone()),
        check(format!("SR(1/{}) <= {:.4} SM({l})", l + 1, mdg_sandwich(l)), &srl, &sm * mdg_sandwich(l)),
        check(format!("SM({l}) <= m1({l}) SD"), &sm, &sd * m1),
        check(format!("SD <= m2({l}) SM({l})"), &sd, &sm * m2),
        check("SD <= 2 SS".to_string(), &sd, &ss * 2.0),
    ]
}
