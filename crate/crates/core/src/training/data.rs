use rand::Rng;
use rand_distr::Normal;
use sha2::{Digest, Sha256};

use super::{Problem, TrainConfig, TrainError};
use crate::harness::rng_for;

/// Points with target values (one vector of observed components per point).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact values of `problem` at `points`.
    pub fn exact(problem: &Problem, points: Vec<Vec<f64>>) -> Self {
        let values = points.iter().map(|p| problem.exact(p)).collect();
        Self { points, values }
    }

    /// SHA-256 over the little-endian bytes of every coordinate and value.
    pub fn hash(&self) -> String {
        hash_points(self.points.iter().chain(&self.values))
    }
}

pub(crate) fn hash_points<'a>(rows: impl Iterator<Item = &'a Vec<f64>>) -> String {
    let mut h = Sha256::new();
    for row in rows {
        h.update((row.len() as u64).to_le_bytes());
        for v in row {
            h.update(v.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything a training run samples: data, collocation points and the
/// held-out evaluation grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    pub data: Dataset,
    pub colloc: Vec<Vec<f64>>,
    pub eval: Dataset,
}

impl Samples {
    /// Draw samples from sub-seeds of `cfg.seed`. Noise (`cfg.noise_std`)
    /// perturbs the training data only; the evaluation grid stays exact.
    pub fn generate(problem: &Problem, cfg: &TrainConfig) -> Result<Self, TrainError> {
        cfg.validate()?;
        problem.validate()?;
        let mut rng = rng_for(cfg.seed, "data", 0);
        let points: Vec<Vec<f64>> = (0..cfg.n_data)
            .map(|_| {
                if cfg.boundary_data {
                    problem.sample_boundary(&mut rng)
                } else {
                    problem.sample_interior(&mut rng)
                }
            })
            .collect();
        let mut data = Dataset::exact(problem, points);
        if cfg.noise_std > 0.0 {
            let mut nrng = rng_for(cfg.seed, "noise", 0);
            let noise = Normal::new(0.0, cfg.noise_std).expect("validated noise");
            for v in data.values.iter_mut().flatten() {
                *v += nrng.sample(noise);
            }
        }
        let mut crng = rng_for(cfg.seed, "colloc", 0);
        let colloc = (0..cfg.n_collocation).map(|_| problem.sample_interior(&mut crng)).collect();
        let eval = Dataset::exact(problem, problem.eval_grid(cfg.eval_grid));
        Ok(Self { data, colloc, eval })
    }

    pub fn colloc_hash(&self) -> String {
        hash_points(self.colloc.iter())
    }
}
