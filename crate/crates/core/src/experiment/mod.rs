//! Config-driven analyses and simulations behind the command-line tool.

pub mod analyze;
pub mod builtin;
pub mod config;
pub mod curves;
pub mod report;
pub mod sharpness;
pub mod simulate;
pub mod validate;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::projection::{analyze_target, ProjectionDecomposition, Tolerances, WeightedFunctionSpace};
use crate::target::{FiniteTarget, GaussianTarget};
use crate::variance::CanonicalParts;
use config::{FunctionSpec, Target};

pub use config::{ExperimentConfig, RunManifest};

/// A target together with what the closed forms need from it.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Finite { target: FiniteTarget, space: WeightedFunctionSpace, dec: ProjectionDecomposition },
    Gaussian { target: GaussianTarget },
}

impl Model {
    pub fn build(target: &Target, tolerances: Tolerances) -> Result<Model> {
        match target {
            Target::Finite(t) => {
                let (space, dec) = analyze_target(t, tolerances)?;
                Ok(Model::Finite { target: t.clone(), space, dec })
            }
            Target::Gaussian(g) => Ok(Model::Gaussian { target: g.clone() }),
        }
    }

    pub fn norm_c(&self) -> f64 {
        match self {
            Model::Finite { dec, .. } => dec.norm_c(),
            Model::Gaussian { target } => crate::target::gaussian_max_correlation(target),
        }
    }

    pub fn correlations(&self) -> DVector<f64> {
        match self {
            Model::Finite { dec, .. } => dec.c().clone(),
            Model::Gaussian { .. } => DVector::from_element(1, self.norm_c()),
        }
    }

    pub fn parts(&self, spec: &FunctionSpec) -> Result<CanonicalParts> {
        match (self, spec) {
            (Model::Finite { target, space, dec }, s) => {
                let f = space.function(&s.table(target)?)?;
                Ok(CanonicalParts::from_function(&f, dec))
            }
            (Model::Gaussian { target }, FunctionSpec::Example1) => Ok(CanonicalParts::gaussian_example(target)),
            (Model::Gaussian { .. }, _) => Err(Error::Config("Gaussian targets support example1 only".into())),
        }
    }
}

/// A random finite target whose decomposition exists and has `‖C‖` in `[min_c, max_c]`.
#[derive(Debug, Clone)]
pub struct RandomCase {
    pub target: FiniteTarget,
    pub space: WeightedFunctionSpace,
    pub dec: ProjectionDecomposition,
}

/// Deterministic stream of random geometric targets with `2 ≤ n1, n2 ≤ max_n`.
pub fn random_cases(seed: u64, count: usize, max_n: usize, min_c: f64, max_c: f64) -> Vec<RandomCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 1000 * count.max(1), "could not draw targets with max correlation in [{min_c}, {max_c}]");
        let n1 = 2 + (rand::Rng::random::<u32>(&mut rng) as usize) % (max_n - 1);
        let n2 = 2 + (rand::Rng::random::<u32>(&mut rng) as usize) % (max_n - 1);
        let coupling = 0.2 + 2.8 * rand::Rng::random::<f64>(&mut rng);
        let Ok(target) = FiniteTarget::random(&mut rng, n1, n2, coupling) else { continue };
        let Ok((space, dec)) = analyze_target(&target, Tolerances::default()) else { continue };
        if (min_c..=max_c).contains(&dec.norm_c()) {
            out.push(RandomCase { target, space, dec });
        }
    }
    out
}

/// Standard normal function table on the grid, drawn from `rng`.
pub fn random_function(rng: &mut ChaCha8Rng, n_cells: usize) -> Vec<f64> {
    (0..n_cells).map(|_| StandardNormal.sample(rng)).collect()
}
