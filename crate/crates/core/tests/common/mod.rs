//! Test-side reference computations built directly from the joint table.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gibbslab::projection::{analyze_target, ProjectionDecomposition, Tolerances, WeightedFunctionSpace};
use gibbslab::target::FiniteTarget;
use gibbslab::variance::ScanPolicy;

/// Conditional-expectation operators on the full grid, `π` weights, and the grid size.
pub struct GridOperators {
    pub pi: DVector<f64>,
    /// `(E1 f)(i,j) = E[f(i, X2) | X1 = i]`.
    pub e1: DMatrix<f64>,
    /// `(E2 f)(i,j) = E[f(X1, j) | X2 = j]`.
    pub e2: DMatrix<f64>,
}

impl GridOperators {
    pub fn new(joint: &DMatrix<f64>) -> Self {
        let (n1, n2) = joint.shape();
        let total = joint.sum();
        let p = joint / total;
        let row: Vec<f64> = (0..n1).map(|i| p.row(i).sum()).collect();
        let col: Vec<f64> = (0..n2).map(|j| p.column(j).sum()).collect();
        let n = n1 * n2;
        let mut e1 = DMatrix::zeros(n, n);
        let mut e2 = DMatrix::zeros(n, n);
        for i in 0..n1 {
            for j in 0..n2 {
                for k in 0..n2 {
                    e1[(i * n2 + j, i * n2 + k)] = p[(i, k)] / row[i];
                }
                for k in 0..n1 {
                    e2[(i * n2 + j, k * n2 + j)] = p[(k, j)] / col[j];
                }
            }
        }
        let pi = DVector::from_fn(n, |g, _| p[(g / n2, g % n2)]);
        GridOperators { pi, e1, e2 }
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.iter().zip(b.iter()).zip(self.pi.iter()).map(|((x, y), w)| x * y * w).sum()
    }

    pub fn center(&self, f: &[f64]) -> DVector<f64> {
        let f = DVector::from_column_slice(f);
        let mean = self.inner(&f, &DVector::from_element(f.len(), 1.0));
        f.add_scalar(-mean)
    }

    /// `Σ_{k≥1} ⟨f, O_1 ⋯ O_k f⟩` for a cyclic list of self-adjoint step operators started at `phase`.
    fn cyclic_lag_sum(&self, f: &DVector<f64>, ops: &[&DMatrix<f64>], phase: usize, max_lags: usize) -> f64 {
        let mut h = f.clone();
        let mut sum = 0.0;
        for k in 0..max_lags {
            h = ops[(phase + k) % ops.len()] * &h;
            // constants are fixed by every step; keep rounding from accumulating there
            let mean = self.pi.dot(&h);
            h.add_scalar_mut(-mean);
            let term = self.inner(&h, f);
            sum += term;
            if k > 10 && h.norm() < 1e-16 * f.norm().max(1e-300) {
                break;
            }
        }
        sum
    }

    /// Asymptotic variance per recorded state, averaged over the phases of the update schedule.
    pub fn asymptotic_variance(&self, f: &[f64], policy: &ScanPolicy, max_lags: usize) -> f64 {
        let f = self.center(f);
        let f2 = self.inner(&f, &f);
        match *policy {
            ScanPolicy::Dg => {
                let ops = [&self.e1, &self.e2];
                f2 + (0..2).map(|ph| self.cyclic_lag_sum(&f, &ops, ph, max_lags)).sum::<f64>()
            }
            ScanPolicy::Mdg { l } => {
                let mut ops: Vec<&DMatrix<f64>> = vec![&self.e1; l as usize];
                ops.push(&self.e2);
                let p = ops.len();
                f2 + 2.0 / p as f64 * (0..p).map(|ph| self.cyclic_lag_sum(&f, &ops, ph, max_lags)).sum::<f64>()
            }
            ScanPolicy::Rg { r } => {
                let k = &self.e2 * r + &self.e1 * (1.0 - r);
                f2 + 2.0 * self.cyclic_lag_sum(&f, &[&k], 0, max_lags)
            }
            ScanPolicy::Rss => {
                // one observation per sweep; the order is a fair coin flip
                let s = (&self.e1 * &self.e2 + &self.e2 * &self.e1) * 0.5;
                f2 + 2.0 * self.cyclic_lag_sum(&f, &[&s], 0, max_lags)
            }
        }
    }
}

pub struct Case {
    pub target: FiniteTarget,
    pub space: WeightedFunctionSpace,
    pub dec: ProjectionDecomposition,
}

/// Random full-support targets with sizes up to `max_n` and maximal correlation in `[lo, hi]`.
pub fn random_targets(seed: u64, count: usize, max_n: usize, lo: f64, hi: f64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n1 = rng.random_range(2..=max_n);
        let n2 = rng.random_range(2..=max_n);
        let joint = DMatrix::from_fn(n1, n2, |_, _| rng.random_range(0.0..1.0f64).powi(3) + 1e-3);
        let Ok(target) = FiniteTarget::new(joint) else { continue };
        let Ok((space, dec)) = analyze_target(&target, Tolerances::default()) else { continue };
        if (lo..=hi).contains(&dec.norm_c()) {
            out.push(Case { target, space, dec });
        }
    }
    out
}

pub fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn all_policies() -> Vec<ScanPolicy> {
    let mut v = vec![ScanPolicy::Dg, ScanPolicy::Rss];
    v.extend([0.1, 0.3, 0.5, 0.7, 0.9].map(|r| ScanPolicy::Rg { r }));
    v.extend([1, 2, 5].map(|l| ScanPolicy::Mdg { l }));
    v
}

impl GridOperators {
    /// Transition matrices of one cycle of the schedule (rows are from-states).
    pub fn cycle(&self, policy: &ScanPolicy) -> Vec<DMatrix<f64>> {
        match *policy {
            ScanPolicy::Dg => vec![self.e1.clone(), self.e2.clone()],
            ScanPolicy::Mdg { l } => {
                let mut v = vec![self.e1.clone(); l as usize];
                v.push(self.e2.clone());
                v
            }
            ScanPolicy::Rg { r } => vec![&self.e2 * r + &self.e1 * (1.0 - r)],
            ScanPolicy::Rss => vec![(&self.e1 * &self.e2 + &self.e2 * &self.e1) * 0.5],
        }
    }

    /// Chi-square distance to `π` of the law after each step, started from grid cell `g`.
    pub fn distance_curve(&self, policy: &ScanPolicy, g: usize, steps: usize) -> Vec<f64> {
        let ks = self.cycle(policy);
        let n = self.pi.len();
        let mut nu = DVector::zeros(n);
        nu[g] = 1.0;
        let dist = |nu: &DVector<f64>| ((nu - &self.pi).component_div(&self.pi).dot(&(nu - &self.pi))).sqrt();
        let mut out = vec![dist(&nu)];
        for t in 0..steps {
            nu = ks[t % ks.len()].transpose() * nu;
            out.push(dist(&nu));
        }
        out
    }
}

/// Least-squares slope of `log d` against step count, on cycle boundaries after `burn`,
/// ignoring points at rounding level.
pub fn fitted_slope(curve: &[f64], period: usize, burn: usize) -> Option<f64> {
    let floor = 1e-11 * curve[0];
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .enumerate()
        .filter(|(t, d)| *t >= burn && t % period == 0 && **d > floor)
        .map(|(t, d)| (t as f64, d.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some((sxy / sxx).exp())
}
