//! Asymptotic-variance operators restricted to `M`, in canonical coordinates.
//!
//! Every operator is block-diagonal across canonical pairs, so it is stored as one
//! symmetric 2×2 matrix per canonical correlation `cᵢ`, acting on `(f₀ᵢ, (W f₁)ᵢ)`.

use nalgebra::{DMatrix, DVector};

use super::policy::ScanPolicy;
use crate::error::{Error, Result};

/// Canonical correlations above `1 − NEAR_ONE` trigger a conditioning warning.
pub const NEAR_ONE: f64 = 1e-6;

/// Coefficients of `[[dI + aC²S⁻², bCS⁻¹], [bCS⁻¹, cI]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl BlockCoefficients {
    pub fn pair(&self, ci: f64) -> [[f64; 2]; 2] {
        let si = (1.0 - ci * ci).sqrt();
        let off = self.b * ci / si;
        [[self.d + self.a * ci * ci / (si * si), off], [off, self.c]]
    }

    pub fn scaled(&self, k: f64) -> Self {
        BlockCoefficients { a: k * self.a, b: k * self.b, c: k * self.c, d: k * self.d }
    }

    pub fn minus(&self, o: &Self) -> Self {
        BlockCoefficients { a: self.a - o.a, b: self.b - o.b, c: self.c - o.c, d: self.d - o.d }
    }
}

/// Block coefficients of `Σ_D`, `Σ_R(r)`, `Σ_M(l)`; `None` for RSS, whose block has a
/// different shape.
pub fn block_coefficients(policy: &ScanPolicy) -> Option<BlockCoefficients> {
    match *policy {
        ScanPolicy::Dg => Some(BlockCoefficients { a: 4.0, b: 2.0, c: 2.0, d: 2.0 }),
        ScanPolicy::Rg { r } => Some(BlockCoefficients {
            a: 2.0 / (r * (1.0 - r)),
            b: 2.0 / (1.0 - r),
            c: (1.0 + r) / (1.0 - r),
            d: (2.0 - r) / r,
        }),
        ScanPolicy::Mdg { l } => {
            let l = l as f64;
            Some(BlockCoefficients { a: 2.0 * (l + 1.0), b: 2.0, c: (l + 3.0) / (l + 1.0), d: l + 1.0 })
        }
        ScanPolicy::Rss => None,
    }
}

/// The 2×2 block of the policy's Σ on the canonical pair with correlation `ci`.
pub fn pair_block(policy: &ScanPolicy, ci: f64) -> [[f64; 2]; 2] {
    match block_coefficients(policy) {
        Some(k) => k.pair(ci),
        None => {
            let si2 = 1.0 - ci * ci;
            let q = 1.0 - ci * ci / 4.0;
            let off = ci / si2.sqrt() / q;
            [[(1.0 + 2.0 * ci * ci / si2 + ci * ci / 4.0) / q, off], [off, (1.0 + ci * ci / 4.0) / q]]
        }
    }
}

pub(crate) fn check_geometric(c: &DVector<f64>, one: f64) -> Result<()> {
    let norm_c = c.iter().fold(0.0_f64, |m, &v| m.max(v));
    if norm_c >= 1.0 - one {
        Err(Error::NotGeometric { norm_c })
    } else {
        Ok(())
    }
}

/// Assembles per-pair blocks into a `2q × 2q` matrix ordered `(f₀, W f₁)`.
pub fn assemble(c: &DVector<f64>, block: impl Fn(f64) -> [[f64; 2]; 2]) -> DMatrix<f64> {
    let q = c.len();
    let mut m = DMatrix::<f64>::zeros(2 * q, 2 * q);
    for (k, &ci) in c.iter().enumerate() {
        let b = block(ci);
        m[(k, k)] = b[0][0];
        m[(k, q + k)] = b[0][1];
        m[(q + k, k)] = b[1][0];
        m[(q + k, q + k)] = b[1][1];
    }
    m
}

/// `Σ` of the policy on `M` as a `2q × 2q` matrix in canonical coordinates.
pub fn sigma_block(policy: &ScanPolicy, c: &DVector<f64>, one: f64) -> Result<DMatrix<f64>> {
    policy.validate()?;
    check_geometric(c, one)?;
    Ok(assemble(c, |ci| pair_block(policy, ci)))
}

/// `⟨x, Σ x⟩` over canonical coordinates `x = (x0, x1)`.
pub fn quadratic_form(policy: &ScanPolicy, c: &DVector<f64>, x0: &DVector<f64>, x1: &DVector<f64>) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, &ci)| {
            let b = pair_block(policy, ci);
            b[0][0] * x0[k] * x0[k] + 2.0 * b[0][1] * x0[k] * x1[k] + b[1][1] * x1[k] * x1[k]
        })
        .sum()
}
