//! Targets shipped by name.

use nalgebra::{DMatrix, DVector};

use super::config::TargetSpec;
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 3] = ["binary06", "near_reducible", "gauss_example1"];

/// Target spec for a built-in name.
pub fn builtin_target(name: &str) -> Result<TargetSpec> {
    match name {
        // maximal correlation 0.6
        "binary06" => Ok(TargetSpec::Finite { joint: vec![vec![0.4, 0.1], vec![0.1, 0.4]] }),
        // maximal correlation 0.996
        "near_reducible" => Ok(TargetSpec::Finite { joint: vec![vec![0.499, 0.001], vec![0.001, 0.499]] }),
        "gauss_example1" => Ok(TargetSpec::Gaussian { p: 1, m1: vec![0.0], m2: 0.0, a: vec![vec![1.0]], b: vec![0.6] }),
        other => Err(Error::Config(format!("unknown built-in target {other:?}; known: {}", BUILTIN_NAMES.join(", ")))),
    }
}

pub(crate) fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(Error::Config(format!("{what} must be a non-empty rectangular array")));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub(crate) fn vector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
