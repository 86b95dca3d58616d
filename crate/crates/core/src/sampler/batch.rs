use serde::Serialize;

use super::ChainRun;
use crate::error::{Error, Result};

pub const MIN_BATCH_LEN: usize = 100;
pub const MIN_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchMeansEstimate {
    #[serde(rename = "V_hat")]
    pub v_hat: f64,
    pub se: f64,
    pub n_batches: usize,
    pub batch_len: usize,
    pub provenance: &'static str,
}

/// `√T` rounded to the nearest power of two.
pub fn default_batch_len(t: usize) -> usize {
    let e = (t as f64).sqrt().log2().round().max(0.0) as u32;
    1usize << e
}

/// Batch-means estimate from partial sums over consecutive chunks of `chunk_len` values.
/// Trailing values that do not fill a batch are dropped.
pub fn batch_means_from_chunks(chunk_sums: &[f64], chunk_len: usize, batch_len: usize) -> Result<BatchMeansEstimate> {
    if batch_len < MIN_BATCH_LEN || chunk_len == 0 || !batch_len.is_multiple_of(chunk_len) {
        return Err(Error::InvalidParameter(format!(
            "batch length {batch_len} must be at least {MIN_BATCH_LEN} and a multiple of the chunk length {chunk_len}"
        )));
    }
    let per = batch_len / chunk_len;
    let n_batches = chunk_sums.len() / per;
    if n_batches < MIN_BATCHES {
        return Err(Error::TooFewBatches { n_batches, batch_len });
    }
    let means: Vec<f64> = chunk_sums.chunks_exact(per).map(|c| c.iter().sum::<f64>() / batch_len as f64).collect();
    let n = means.len() as f64;
    let grand = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (n - 1.0);
    let v_hat = batch_len as f64 * var;
    Ok(BatchMeansEstimate { v_hat, se: v_hat * (2.0 / (n - 1.0)).sqrt(), n_batches, batch_len, provenance: "batch_means" })
}

pub fn batch_means(run: &ChainRun, f_index: usize, batch_len: usize) -> Result<BatchMeansEstimate> {
    let sums = run
        .chunk_sums
        .get(f_index)
        .ok_or_else(|| Error::InvalidParameter(format!("run tracks no function with index {f_index}")))?;
    batch_means_from_chunks(sums, run.chunk_len, batch_len)
}

/// Average of independent replicate estimates with the standard error of the average.
pub fn pool_estimates(estimates: &[BatchMeansEstimate]) -> Option<BatchMeansEstimate> {
    let first = estimates.first()?;
    let n = estimates.len() as f64;
    Some(BatchMeansEstimate {
        v_hat: estimates.iter().map(|e| e.v_hat).sum::<f64>() / n,
        se: estimates.iter().map(|e| e.se * e.se).sum::<f64>().sqrt() / n,
        n_batches: estimates.iter().map(|e| e.n_batches).sum(),
        batch_len: first.batch_len,
        provenance: "batch_means",
    })
}

/// `V† = (cost / T) · V̂`.
pub fn cost_adjusted_estimate(est: &BatchMeansEstimate, run: &ChainRun) -> f64 {
    run.simulated_cost / run.t as f64 * est.v_hat
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn default_lengths() {
        assert_eq!(default_batch_len(1_000_000), 1024);
        assert_eq!(default_batch_len(10_000), 128);
    }

    #[test]
    fn iid_input_recovers_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let normal = Normal::new(0.0, 1.5).unwrap();
        let xs: Vec<f64> = (0..200_000).map(|_| normal.sample(&mut rng)).collect();
        let est = batch_means_from_chunks(&xs, 1, 500).unwrap();
        assert!((est.v_hat - 2.25).abs() < 3.0 * est.se, "{est:?}");
        assert_eq!(est.n_batches, 400);
    }

    #[test]
    fn too_few_batches() {
        let xs = vec![0.0; 1900];
        assert_eq!(batch_means_from_chunks(&xs, 1, 100).unwrap_err(), Error::TooFewBatches { n_batches: 19, batch_len: 100 });
        assert!(batch_means_from_chunks(&xs, 1, 50).is_err());
    }

    #[test]
    fn pooling() {
        let e = BatchMeansEstimate { v_hat: 2.0, se: 0.2, n_batches: 30, batch_len: 100, provenance: "batch_means" };
        let p = pool_estimates(&[e, BatchMeansEstimate { v_hat: 4.0, ..e }]).unwrap();
        assert_eq!(p.v_hat, 3.0);
        assert!((p.se - 0.2 / 2f64.sqrt()).abs() < 1e-15);
    }
}
