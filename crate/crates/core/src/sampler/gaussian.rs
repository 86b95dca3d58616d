use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{drive, ChainRun, GibbsState, RunOptions};
use crate::error::Result;
use crate::target::GaussianTarget;
use crate::variance::ScanPolicy;

struct GaussianState<'a> {
    target: &'a GaussianTarget,
    /// `A⁻¹b`, the slope of `E[X₁ | X₂]`.
    slope: DVector<f64>,
    x1: DVector<f64>,
    x2: f64,
    z: DVector<f64>,
}

impl GaussianState<'_> {
    fn draw_x1_given_x2<R: Rng>(&mut self, rng: &mut R) {
        for zi in self.z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let shift = self.x2 - self.target.m2();
        self.x1 = self.target.m1() - &self.slope * shift + self.target.a_inv_chol() * &self.z;
    }
}

impl GibbsState for GaussianState<'_> {
    fn update_x2<R: Rng>(&mut self, rng: &mut R) {
        let mean = self.target.m2() - self.target.b().dot(&(&self.x1 - self.target.m1()));
        let z: f64 = rng.sample(StandardNormal);
        self.x2 = mean + z;
    }

    fn update_x1<R: Rng>(&mut self, rng: &mut R) {
        self.draw_x1_given_x2(rng);
    }

    fn evaluate(&self, out: &mut [f64]) {
        out[0] = self.target.example_function(self.x1.as_slice(), self.x2);
    }
}

/// Simulates a Gaussian target from stationarity, tracking `x₂ − m₂ + bᵀ(x₁ − m₁)`.
pub fn gaussian_chain(target: &GaussianTarget, policy: &ScanPolicy, t: usize, opts: &RunOptions) -> Result<ChainRun> {
    policy.validate()?;
    opts.validate(t)?;
    let mut rng = opts.rng();
    let p = target.p();
    let mut state = GaussianState {
        target,
        slope: target.a_inv() * target.b(),
        x1: DVector::zeros(p),
        x2: 0.0,
        z: DVector::zeros(p),
    };
    // X₂ ~ N(m₂, 1/(1 − bᵀA⁻¹b)), then X₁ | X₂
    let z: f64 = rng.sample(StandardNormal);
    state.x2 = target.m2() + z * target.x2_variance().sqrt();
    state.draw_x1_given_x2(&mut rng);
    Ok(drive(&mut state, &mut rng, policy, 1, t, opts, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn example() -> GaussianTarget {
        GaussianTarget::new(DVector::zeros(1), 0.0, DMatrix::identity(1, 1), DVector::from_element(1, 0.6)).unwrap()
    }

    #[test]
    fn reproducible() {
        let g = example();
        let o = RunOptions::new(3).chunk_len(100);
        let a = gaussian_chain(&g, &ScanPolicy::Dg, 5000, &o).unwrap();
        let b = gaussian_chain(&g, &ScanPolicy::Dg, 5000, &o).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mean_near_zero() {
        let g = example();
        let run = gaussian_chain(&g, &ScanPolicy::Rss, 200_000, &RunOptions::new(5)).unwrap();
        // V_S for this f is well below 4
        assert!(run.means[0].abs() < 4.0 * (4.0 / 200_000f64).sqrt());
    }

    #[test]
    fn multivariate_x1_has_inverse_precision_covariance() {
        let g = GaussianTarget::new(
            DVector::from_vec(vec![1.0, -1.0]),
            0.5,
            DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
            DVector::from_vec(vec![0.5, 0.2]),
        )
        .unwrap();
        let mut rng = RunOptions::new(8).rng();
        let mut s = GaussianState { target: &g, slope: g.a_inv() * g.b(), x1: DVector::zeros(2), x2: 0.5, z: DVector::zeros(2) };
        let n = 100_000;
        let mut sum = DVector::<f64>::zeros(2);
        let mut outer = DMatrix::<f64>::zeros(2, 2);
        for _ in 0..n {
            s.update_x1(&mut rng);
            sum += &s.x1;
            outer += &s.x1 * s.x1.transpose();
        }
        let mean = sum / n as f64;
        let cov = outer / n as f64 - &mean * mean.transpose();
        assert!((mean - g.m1()).abs().max() < 0.02);
        assert!((cov - g.a_inv()).abs().max() < 0.02);
    }
}
