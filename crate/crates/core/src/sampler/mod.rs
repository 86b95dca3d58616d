//! Seeded simulation of the four scan policies and batch-means variance estimates.
//!
//! Every chain draws from its own ChaCha8 stream: `seed_from_u64(seed)` followed by
//! `set_stream(chain_id)`. Runs are therefore bit-reproducible and independent of how
//! replicates are scheduled across threads.

mod batch;
mod finite;
mod gaussian;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::variance::ScanPolicy;

pub use batch::{batch_means, batch_means_from_chunks, cost_adjusted_estimate, default_batch_len, pool_estimates, BatchMeansEstimate, MIN_BATCHES, MIN_BATCH_LEN};
pub use finite::{run_chain, FiniteStart};
pub use gaussian::gaussian_chain;

/// Result of one chain. Kept states are `X̃₁, …, X̃_T`; the start `X̃₀` is not counted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRun {
    pub policy: ScanPolicy,
    pub seed: u64,
    pub chain_id: u64,
    #[serde(rename = "T")]
    pub t: usize,
    pub tau: f64,
    pub pi1_draws: u64,
    pub pi2_draws: u64,
    pub simulated_cost: f64,
    /// `S_T(f)` per function.
    pub means: Vec<f64>,
    pub chunk_len: usize,
    /// Per function, sums of `f(X̃_t)` over consecutive chunks of `chunk_len` states.
    #[serde(skip)]
    pub chunk_sums: Vec<Vec<f64>>,
    /// Visit counts per grid cell of every `thin`-th kept state (finite targets only).
    #[serde(skip)]
    pub state_counts: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub chain_id: u64,
    pub tau: f64,
    /// Granularity of stored partial sums; batch lengths must be multiples of it.
    pub chunk_len: usize,
    /// Record state visits every `thin` kept states; `None` records nothing.
    pub count_states_every: Option<usize>,
}

impl RunOptions {
    pub fn new(seed: u64) -> Self {
        RunOptions { seed, chain_id: 0, tau: 1.0, chunk_len: 1, count_states_every: None }
    }

    pub fn chain(mut self, chain_id: u64) -> Self {
        self.chain_id = chain_id;
        self
    }

    pub fn tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn chunk_len(mut self, chunk_len: usize) -> Self {
        self.chunk_len = chunk_len;
        self
    }

    pub fn count_states_every(mut self, thin: usize) -> Self {
        self.count_states_every = Some(thin);
        self
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.chain_id);
        rng
    }

    fn validate(&self, t: usize) -> Result<()> {
        crate::target::CostModel::new(self.tau)?;
        if t == 0 {
            return Err(Error::InvalidParameter("T must be at least 1".into()));
        }
        if self.chunk_len == 0 || self.count_states_every == Some(0) {
            return Err(Error::InvalidParameter("chunk length and thinning must be positive".into()));
        }
        Ok(())
    }
}

/// A chain state that can be refreshed by either conditional draw.
pub(crate) trait GibbsState {
    /// Draw `x₂ ~ π₁(·|x₁)`.
    fn update_x2<R: Rng>(&mut self, rng: &mut R);
    /// Draw `x₁ ~ π₂(·|x₂)`.
    fn update_x1<R: Rng>(&mut self, rng: &mut R);
    fn evaluate(&self, out: &mut [f64]);
    fn cell(&self) -> Option<usize> {
        None
    }
}

/// Runs the policy's schedule for `t` kept states and accumulates the summaries.
pub(crate) fn drive<S: GibbsState>(
    state: &mut S,
    rng: &mut ChaCha8Rng,
    policy: &ScanPolicy,
    n_functions: usize,
    t: usize,
    opts: &RunOptions,
    n_cells: usize,
) -> ChainRun {
    let mut d1 = 0u64;
    let mut d2 = 0u64;
    let mut values = vec![0.0; n_functions];
    let mut totals = vec![0.0; n_functions];
    let mut current = vec![0.0; n_functions];
    let mut chunk_sums = vec![Vec::with_capacity(t / opts.chunk_len + 1); n_functions];
    let mut counts = opts.count_states_every.map(|_| vec![0u64; n_cells]);
    let mut filled = 0usize;

    for step in 0..t {
        match *policy {
            ScanPolicy::Dg => {
                if step % 2 == 0 {
                    state.update_x2(rng);
                    d1 += 1;
                } else {
                    state.update_x1(rng);
                    d2 += 1;
                }
            }
            ScanPolicy::Mdg { l } => {
                if step % (l as usize + 1) < l as usize {
                    state.update_x2(rng);
                    d1 += 1;
                } else {
                    state.update_x1(rng);
                    d2 += 1;
                }
            }
            ScanPolicy::Rg { r } => {
                if rng.random::<f64>() < r {
                    state.update_x1(rng);
                    d2 += 1;
                } else {
                    state.update_x2(rng);
                    d1 += 1;
                }
            }
            ScanPolicy::Rss => {
                if rng.random::<bool>() {
                    state.update_x2(rng);
                    state.update_x1(rng);
                } else {
                    state.update_x1(rng);
                    state.update_x2(rng);
                }
                d1 += 1;
                d2 += 1;
            }
        }
        state.evaluate(&mut values);
        for k in 0..n_functions {
            current[k] += values[k];
        }
        filled += 1;
        if filled == opts.chunk_len {
            for k in 0..n_functions {
                totals[k] += current[k];
                chunk_sums[k].push(current[k]);
                current[k] = 0.0;
            }
            filled = 0;
        }
        if let (Some(c), Some(thin)) = (counts.as_mut(), opts.count_states_every) {
            if (step + 1) % thin == 0 {
                if let Some(cell) = state.cell() {
                    c[cell] += 1;
                }
            }
        }
    }
    for k in 0..n_functions {
        totals[k] += current[k];
    }
    ChainRun {
        policy: *policy,
        seed: opts.seed,
        chain_id: opts.chain_id,
        t,
        tau: opts.tau,
        pi1_draws: d1,
        pi2_draws: d2,
        simulated_cost: d1 as f64 + opts.tau * d2 as f64,
        means: totals.iter().map(|s| s / t as f64).collect(),
        chunk_len: opts.chunk_len,
        chunk_sums,
        state_counts: counts,
    }
}
