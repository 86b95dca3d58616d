use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Update schedule of a two-component Gibbs sampler.
///
/// `P₁` draws from `π₁(·|x₁)` (updates `x₂`, cost 1); `P₂` draws from `π₂(·|x₂)`
/// (updates `x₁`, cost τ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ScanPolicy {
    /// Deterministic scan: alternate, starting with a `π₁` draw.
    #[serde(rename = "DG")]
    Dg,
    /// Random scan: each step draws from `π₂` with probability `r`, else from `π₁`.
    #[serde(rename = "RG")]
    Rg { r: f64 },
    /// `l` consecutive `π₁` draws followed by one `π₂` draw.
    #[serde(rename = "MDG")]
    Mdg { l: u32 },
    /// Both updates per step, in a uniformly random order.
    #[serde(rename = "RSS")]
    Rss,
}

impl ScanPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScanPolicy::Rg { r } if !(r > 0.0 && r < 1.0) => {
                Err(Error::InvalidParameter(format!("RG selection probability r = {r} must lie in (0, 1)")))
            }
            ScanPolicy::Mdg { l } if l < 1 => Err(Error::InvalidParameter("MDG repeat count l must be at least 1".into())),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScanPolicy::Dg => "DG",
            ScanPolicy::Rg { .. } => "RG",
            ScanPolicy::Mdg { .. } => "MDG",
            ScanPolicy::Rss => "RSS",
        }
    }

    /// The policy parameter as text (`r` or `l`), empty when there is none.
    pub fn param_label(&self) -> String {
        match self {
            ScanPolicy::Rg { r } => format!("{r}"),
            ScanPolicy::Mdg { l } => format!("{l}"),
            _ => String::new(),
        }
    }

    /// Coefficients multiplying `‖f₀₁‖²`, `‖f₁₀‖²`, `‖f₁₁‖²` in the asymptotic variance.
    pub fn component_coefficients(&self) -> (f64, f64, f64) {
        match *self {
            ScanPolicy::Dg => (2.0, 2.0, 1.0),
            ScanPolicy::Rg { r } => ((2.0 - r) / r, (1.0 + r) / (1.0 - r), 1.0),
            ScanPolicy::Mdg { l } => {
                let l = l as f64;
                (l + 1.0, (l + 3.0) / (l + 1.0), 1.0)
            }
            ScanPolicy::Rss => (1.0, 1.0, 1.0),
        }
    }

    /// Expected number of `π₁` and `π₂` draws per kept state.
    pub fn draws_per_step(&self) -> (f64, f64) {
        match *self {
            ScanPolicy::Dg => (0.5, 0.5),
            ScanPolicy::Rg { r } => (1.0 - r, r),
            ScanPolicy::Mdg { l } => {
                let l = l as f64;
                (l / (l + 1.0), 1.0 / (l + 1.0))
            }
            ScanPolicy::Rss => (1.0, 1.0),
        }
    }
}

impl fmt::Display for ScanPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanPolicy::Rg { r } => write!(f, "RG(r={r})"),
            ScanPolicy::Mdg { l } => write!(f, "MDG(l={l})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Average time per kept state in units of one `π₁` draw.
pub fn step_time(policy: &ScanPolicy, tau: f64) -> f64 {
    let (n1, n2) = policy.draws_per_step();
    n1 + tau * n2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_times() {
        assert_eq!(step_time(&ScanPolicy::Dg, 1.0), 1.0);
        assert!((step_time(&ScanPolicy::Rg { r: 0.25 }, 5.0) - 2.0).abs() < 1e-15);
        assert!((step_time(&ScanPolicy::Mdg { l: 3 }, 9.0) - 3.0).abs() < 1e-15);
        assert_eq!(step_time(&ScanPolicy::Rss, 4.0), 5.0);
    }

    #[test]
    fn json_round_trip() {
        let ps = [ScanPolicy::Dg, ScanPolicy::Rg { r: 0.3 }, ScanPolicy::Mdg { l: 2 }, ScanPolicy::Rss];
        for p in ps {
            let s = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<ScanPolicy>(&s).unwrap(), p);
        }
        assert_eq!(serde_json::to_string(&ScanPolicy::Rg { r: 0.5 }).unwrap(), r#"{"kind":"RG","r":0.5}"#);
        assert!(serde_json::from_str::<ScanPolicy>(r#"{"kind":"RG","r":0.5,"x":1}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(ScanPolicy::Rg { r: 1.2 }.validate().is_err());
        assert!(ScanPolicy::Rg { r: 0.0 }.validate().is_err());
        assert!(ScanPolicy::Mdg { l: 0 }.validate().is_err());
        assert!(ScanPolicy::Mdg { l: 1 }.validate().is_ok());
    }
}
