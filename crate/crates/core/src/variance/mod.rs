//! Closed-form asymptotic variances of the four scan policies.

pub mod constants;
pub mod covariance;
pub mod oracle;
pub mod orderings;
pub mod policy;
pub mod sharpness;
pub mod sigma;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::Result;
use crate::projection::{decompose_coords, ProjectionDecomposition, StateFunction};
use crate::target::GaussianTarget;

pub use constants::{comparison_constants, kappa, max_l, mdg_constants, optimal_r, optimal_r_numeric};
pub use covariance::{asymptotic_covariance_matrix, data_augmentation_variances};
pub use oracle::{asymptotic_variance_series_oracle, OracleValue, DEFAULT_MAX_TERMS, ORACLE_TAIL};
pub use orderings::{check_block_psd, ordering_suite, ordering_suite_perturbed, orderings_for_correlations, BlockPsdCheck, OrderingCheck};
pub use policy::{step_time, ScanPolicy};
pub use sharpness::{sharpness_witness, Witness};
pub use sigma::{sigma_block, BlockCoefficients};

/// What the closed-form variance needs to know about `f`: the squared norms of its
/// `M₀₁`, `M₁₀`, `M₁₁` parts and the canonical coordinates of its `M` part.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalParts {
    pub n01: f64,
    pub n10: f64,
    pub n11: f64,
    pub c: DVector<f64>,
    pub x0: DVector<f64>,
    pub x1: DVector<f64>,
    pub tol_one: f64,
}

impl CanonicalParts {
    pub fn from_function(f: &StateFunction, dec: &ProjectionDecomposition) -> Self {
        Self::from_coords(&f.coords, dec)
    }

    pub fn from_coords(v: &DVector<f64>, dec: &ProjectionDecomposition) -> Self {
        let parts = decompose_coords(v, dec);
        let (x0, x1) = dec.canonical_coordinates(v);
        CanonicalParts {
            n01: parts.f01.norm_squared(),
            n10: parts.f10.norm_squared(),
            n11: parts.f11.norm_squared(),
            c: dec.c().clone(),
            x0,
            x1,
            tol_one: dec.tolerances().one,
        }
    }

    /// The function `x₂ − m₂ + bᵀ(x₁ − m₁)` of a Gaussian target lies in `(I−P₁)M`, on the
    /// single canonical pair with correlation `√(bᵀA⁻¹b)`, and has unit norm.
    pub fn gaussian_example(target: &GaussianTarget) -> Self {
        let one = DVector::from_element(1, 1.0);
        CanonicalParts {
            n01: 0.0,
            n10: 0.0,
            n11: 0.0,
            c: DVector::from_element(1, target.squared_max_correlation().sqrt()),
            x0: DVector::zeros(1),
            x1: one * target.example_function_norm_sq().sqrt(),
            tol_one: 1e-9,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.n01 + self.n10 + self.n11 + self.x0.norm_squared() + self.x1.norm_squared()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceComponents {
    pub f01: f64,
    pub f10: f64,
    pub f11: f64,
    #[serde(rename = "M_block")]
    pub m_block: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    pub policy: ScanPolicy,
    pub tau: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "V_adj")]
    pub v_adj: f64,
    pub components: VarianceComponents,
    pub warnings: Vec<String>,
    pub provenance: &'static str,
}

pub fn asymptotic_variance(f: &StateFunction, dec: &ProjectionDecomposition, policy: &ScanPolicy, tau: f64) -> Result<VarianceReport> {
    variance_from_parts(&CanonicalParts::from_function(f, dec), policy, tau)
}

pub fn variance_from_parts(parts: &CanonicalParts, policy: &ScanPolicy, tau: f64) -> Result<VarianceReport> {
    policy.validate()?;
    crate::target::CostModel::new(tau)?;
    sigma::check_geometric(&parts.c, parts.tol_one)?;
    let (k01, k10, k11) = policy.component_coefficients();
    let components = VarianceComponents {
        f01: k01 * parts.n01,
        f10: k10 * parts.n10,
        f11: k11 * parts.n11,
        m_block: sigma::quadratic_form(policy, &parts.c, &parts.x0, &parts.x1),
    };
    let v = components.f01 + components.f10 + components.f11 + components.m_block;
    let mut warnings = Vec::new();
    let norm_c = parts.c.iter().fold(0.0_f64, |m, &x| m.max(x));
    if norm_c > 1.0 - sigma::NEAR_ONE {
        warnings.push(format!("ill-conditioned: max canonical correlation {norm_c} is within 1e-6 of 1"));
    }
    Ok(VarianceReport {
        policy: *policy,
        tau,
        v,
        v_adj: step_time(policy, tau) * v,
        components,
        warnings,
        provenance: "closed_form",
    })
}

/// `V(f)` only, for callers that do not need the full report.
pub fn variance_value(v: &DVector<f64>, dec: &ProjectionDecomposition, policy: &ScanPolicy) -> Result<f64> {
    Ok(variance_from_parts(&CanonicalParts::from_coords(v, dec), policy, 1.0)?.v)
}
