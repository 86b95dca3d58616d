use rand::Rng;

use super::{drive, ChainRun, GibbsState, RunOptions};
use crate::error::{Error, Result};
use crate::target::FiniteTarget;
use crate::variance::ScanPolicy;

/// Where a finite chain starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiniteStart {
    /// `X̃₀ ~ π`, used for variance runs.
    Stationary,
    Cell(usize, usize),
}

struct FiniteState<'a> {
    i: usize,
    j: usize,
    n2: usize,
    /// Row `i`: cumulative `π₁(·|x₁ = i)`.
    cdf1: &'a [Vec<f64>],
    /// Row `j`: cumulative `π₂(·|x₂ = j)`.
    cdf2: &'a [Vec<f64>],
    tables: &'a [Vec<f64>],
}

fn cumulative(rows: impl Iterator<Item = Vec<f64>>) -> Vec<Vec<f64>> {
    rows.map(|row| {
        let mut acc = 0.0;
        let mut out: Vec<f64> = row
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // the last entry absorbs rounding so every uniform lands somewhere
        if let Some(last) = out.last_mut() {
            *last = f64::INFINITY;
        }
        out
    })
    .collect()
}

fn sample(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c <= u)
}

impl GibbsState for FiniteState<'_> {
    fn update_x2<R: Rng>(&mut self, rng: &mut R) {
        self.j = sample(&self.cdf1[self.i], rng.random());
    }

    fn update_x1<R: Rng>(&mut self, rng: &mut R) {
        self.i = sample(&self.cdf2[self.j], rng.random());
    }

    fn evaluate(&self, out: &mut [f64]) {
        let g = self.i * self.n2 + self.j;
        for (o, table) in out.iter_mut().zip(self.tables) {
            *o = table[g];
        }
    }

    fn cell(&self) -> Option<usize> {
        Some(self.i * self.n2 + self.j)
    }
}

/// Simulates `t` kept states of `policy` on a finite target, evaluating each row-major
/// table in `functions` along the way.
pub fn run_chain(
    target: &FiniteTarget,
    policy: &ScanPolicy,
    functions: &[Vec<f64>],
    t: usize,
    start: FiniteStart,
    opts: &RunOptions,
) -> Result<ChainRun> {
    policy.validate()?;
    opts.validate(t)?;
    let n_cells = target.n1() * target.n2();
    if let Some(bad) = functions.iter().find(|f| f.len() != n_cells) {
        return Err(Error::InvalidParameter(format!("function table has {} values, grid has {n_cells}", bad.len())));
    }
    let rc = target.row_conditionals();
    let cc = target.col_conditionals();
    let cdf1 = cumulative((0..target.n1()).map(|i| rc.row(i).iter().copied().collect()));
    let cdf2 = cumulative((0..target.n2()).map(|j| cc.row(j).iter().copied().collect()));

    let mut rng = opts.rng();
    let (i, j) = match start {
        FiniteStart::Stationary => {
            let flat: Vec<f64> = (0..n_cells).map(|g| target.prob(g / target.n2(), g % target.n2())).collect();
            let cdf = &cumulative(std::iter::once(flat))[0];
            let g = sample(cdf, rng.random());
            (g / target.n2(), g % target.n2())
        }
        FiniteStart::Cell(i, j) => {
            if i >= target.n1() || j >= target.n2() || target.prob(i, j) == 0.0 {
                return Err(Error::UnsupportedInitial(format!("start cell ({i}, {j}) is outside the support")));
            }
            (i, j)
        }
    };
    let mut state = FiniteState { i, j, n2: target.n2(), cdf1: &cdf1, cdf2: &cdf2, tables: functions };
    Ok(drive(&mut state, &mut rng, policy, functions.len(), t, opts, n_cells))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> FiniteTarget {
        FiniteTarget::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
    }

    #[test]
    fn sampling_from_cdf() {
        let cdf = &cumulative(std::iter::once(vec![0.2, 0.0, 0.8]))[0];
        assert_eq!(sample(cdf, 0.1), 0);
        assert_eq!(sample(cdf, 0.2), 2);
        assert_eq!(sample(cdf, 0.9999), 2);
    }

    #[test]
    fn deterministic_and_cost_counted() {
        let t = binary();
        let f = vec![vec![0.0, 1.0, 0.0, 1.0]];
        let opts = RunOptions::new(42).tau(5.0).chunk_len(10);
        let a = run_chain(&t, &ScanPolicy::Rg { r: 0.25 }, &f, 1000, FiniteStart::Stationary, &opts).unwrap();
        let b = run_chain(&t, &ScanPolicy::Rg { r: 0.25 }, &f, 1000, FiniteStart::Stationary, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pi1_draws + a.pi2_draws, 1000);
        assert_eq!(a.simulated_cost, a.pi1_draws as f64 + 5.0 * a.pi2_draws as f64);
        let c = run_chain(&t, &ScanPolicy::Rg { r: 0.25 }, &f, 1000, FiniteStart::Stationary, &opts.chain(1)).unwrap();
        assert_ne!(a.means, c.means);
    }

    #[test]
    fn single_step() {
        let t = binary();
        let f = vec![vec![0.0, 1.0, 0.0, 1.0]];
        for p in [ScanPolicy::Dg, ScanPolicy::Rss, ScanPolicy::Mdg { l: 2 }] {
            let run = run_chain(&t, &p, &f, 1, FiniteStart::Cell(0, 0), &RunOptions::new(1).tau(3.0)).unwrap();
            let want = if p == ScanPolicy::Rss { 4.0 } else { 1.0 };
            assert_eq!(run.simulated_cost, want);
            assert!(run.means[0] == 0.0 || run.means[0] == 1.0);
        }
    }

    #[test]
    fn mdg_schedule_cost_is_exact() {
        let t = binary();
        let run = run_chain(&t, &ScanPolicy::Mdg { l: 3 }, &[], 4000, FiniteStart::Stationary, &RunOptions::new(9).tau(9.0)).unwrap();
        assert_eq!(run.simulated_cost / run.t as f64, 3.0);
    }

    #[test]
    fn rejects_off_support_start() {
        let t = FiniteTarget::from_rows(&[vec![0.5, 0.0], vec![0.1, 0.4]]).unwrap();
        let err = run_chain(&t, &ScanPolicy::Dg, &[], 10, FiniteStart::Cell(0, 1), &RunOptions::new(0)).unwrap_err();
        assert!(matches!(err, Error::UnsupportedInitial(_)));
    }
}
