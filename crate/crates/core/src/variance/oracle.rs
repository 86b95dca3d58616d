//! Truncated autocovariance series for `V(f)`, used to check the closed forms.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::policy::ScanPolicy;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm_symmetric, symmetrize};

/// Truncation is chosen so the remaining tail is provably below this.
pub const ORACLE_TAIL: f64 = 1e-10;
pub const DEFAULT_MAX_TERMS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleValue {
    pub value: f64,
    pub terms: usize,
    pub tail_bound: f64,
    pub provenance: &'static str,
}

/// Sums the autocovariance series of `f` (coordinates) under `policy`.
///
/// The number of terms comes from a geometric tail bound `K λ^T / (1−λ) ‖f‖²`, where
/// `λ = ‖P₁P₂P₁‖` for DG and MDG and the spectral radius of the one-step operator for
/// RG and RSS.
pub fn asymptotic_variance_series_oracle(
    f: &DVector<f64>,
    p1: &DMatrix<f64>,
    p2: &DMatrix<f64>,
    policy: &ScanPolicy,
    max_terms: usize,
) -> Result<OracleValue> {
    policy.validate()?;
    let norm_sq = f.norm_squared();
    let step = match *policy {
        ScanPolicy::Rg { r } => Some(p1 * (1.0 - r) + p2 * r),
        ScanPolicy::Rss => Some(symmetrize(&(p1 * p2))),
        _ => None,
    };
    let (lambda, scale) = match (&step, policy) {
        (Some(k), _) => (spectral_norm_symmetric(k), 2.0 * spectral_norm_symmetric(k)),
        (None, ScanPolicy::Mdg { l }) => (spectral_norm_symmetric(&(p1 * p2 * p1)), 2.0 * (*l as f64 + 1.0)),
        (None, _) => (spectral_norm_symmetric(&(p1 * p2 * p1)), 4.0),
    };
    let tail = |t: usize| scale * lambda.powi(t as i32) / (1.0 - lambda) * norm_sq;
    if norm_sq == 0.0 {
        return Ok(OracleValue { value: 0.0, terms: 0, tail_bound: 0.0, provenance: "series_oracle" });
    }
    if lambda >= 1.0 {
        return Err(Error::TruncationInsufficient { terms: max_terms, tail_bound: f64::INFINITY });
    }
    let terms = if lambda <= 0.0 {
        1
    } else {
        let t = ((ORACLE_TAIL * (1.0 - lambda) / (scale * norm_sq)).ln() / lambda.ln()).ceil();
        (t.max(1.0) as usize).saturating_add(1)
    };
    if terms > max_terms {
        return Err(Error::TruncationInsufficient { terms: max_terms, tail_bound: tail(max_terms) });
    }

    let value = match (step, *policy) {
        (Some(k), _) => {
            let mut v = f.clone();
            let mut sum = 0.0;
            for _ in 0..terms {
                v = &k * v;
                sum += f.dot(&v);
            }
            norm_sq + 2.0 * sum
        }
        (None, ScanPolicy::Mdg { l }) => mdg_series(f, p1, p2, l as f64, terms),
        (None, _) => dg_series(f, p1, p2, terms),
    };
    Ok(OracleValue { value, terms, tail_bound: tail(terms), provenance: "series_oracle" })
}

fn dg_series(f: &DVector<f64>, p1: &DMatrix<f64>, p2: &DMatrix<f64>, cycles: usize) -> f64 {
    // a = (P₁P₂)^{s−1}P₁f, b = (P₂P₁)^{s−1}P₂f, u = (P₁P₂)^s f, w = (P₂P₁)^s f
    let mut a = p1 * f;
    let mut b = p2 * f;
    let mut u = f.clone();
    let mut w = f.clone();
    let mut sum = f.norm_squared();
    for _ in 0..cycles {
        u = p1 * (p2 * u);
        w = p2 * (p1 * w);
        sum += f.dot(&a) + f.dot(&u) + f.dot(&b) + f.dot(&w);
        a = p1 * (p2 * a);
        b = p2 * (p1 * b);
    }
    sum
}

fn mdg_series(f: &DVector<f64>, p1: &DMatrix<f64>, p2: &DMatrix<f64>, l: f64, cycles: usize) -> f64 {
    let p1f = p1 * f;
    let p2f = p2 * f;
    let mut head = f.dot(&p2f) + l * (l + 1.0) / 2.0 * f.dot(&p1f);
    // a = (P₂P₁)^s P₂f, b = (P₂P₁)^s f, c = (P₁P₂)^s f, d = (P₁P₂)^s P₁f
    let (mut a, mut b, mut c, mut d) = (p2f.clone(), f.clone(), f.clone(), p1f.clone());
    for _ in 0..cycles {
        a = p2 * (p1 * a);
        b = p2 * (p1 * b);
        c = p1 * (p2 * c);
        d = p1 * (p2 * d);
        head += f.dot(&a) + l * f.dot(&b) + l * f.dot(&c) + l * l * f.dot(&d);
    }
    f.norm_squared() + 2.0 / (l + 1.0) * head
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{analyze_target, Tolerances};
    use crate::target::FiniteTarget;

    #[test]
    fn binary_dg_oracle() {
        let t = FiniteTarget::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let (space, dec) = analyze_target(&t, Tolerances::default()).unwrap();
        let f = space.indicator(2, 1).unwrap();
        let o = asymptotic_variance_series_oracle(&f.coords, dec.p1(), dec.p2(), &ScanPolicy::Dg, DEFAULT_MAX_TERMS).unwrap();
        assert!((o.value - 1.0625).abs() < 1e-10);
        assert!(o.tail_bound < ORACLE_TAIL);
        let o = asymptotic_variance_series_oracle(&f.coords, dec.p1(), dec.p2(), &ScanPolicy::Rg { r: 0.5 }, DEFAULT_MAX_TERMS).unwrap();
        assert!((o.value - 1.875).abs() < 1e-10);
    }

    #[test]
    fn m11_function_returns_its_norm() {
        let t = FiniteTarget::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let (_, dec) = analyze_target(&t, Tolerances::default()).unwrap();
        let v = dec.basis_m11().column(0).into_owned();
        for p in [ScanPolicy::Dg, ScanPolicy::Rg { r: 0.3 }, ScanPolicy::Mdg { l: 2 }, ScanPolicy::Rss] {
            let o = asymptotic_variance_series_oracle(&v, dec.p1(), dec.p2(), &p, DEFAULT_MAX_TERMS).unwrap();
            assert!((o.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn term_cap_is_enforced() {
        let t = FiniteTarget::from_rows(&[vec![0.499, 0.001], vec![0.001, 0.499]]).unwrap();
        let (space, dec) = analyze_target(&t, Tolerances::default()).unwrap();
        let f = space.indicator(1, 0).unwrap();
        let err = asymptotic_variance_series_oracle(&f.coords, dec.p1(), dec.p2(), &ScanPolicy::Dg, 100).unwrap_err();
        assert!(matches!(err, Error::TruncationInsufficient { terms: 100, .. }));
    }
}
