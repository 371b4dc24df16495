use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Box-shaped, uniformly distributed random-parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSpace {
    pub bounds: Vec<[f64; 2]>,
    pub seed: u64,
}

impl RandomSpace {
    pub fn new(bounds: Vec<[f64; 2]>, seed: u64) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidParameter(
                "random space needs at least one dimension".into(),
            ));
        }
        if let Some(b) = bounds.iter().find(|b| !(b[0] < b[1])) {
            return Err(Error::InvalidParameter(format!(
                "random-space bounds must satisfy lo < hi, got {b:?}"
            )));
        }
        Ok(Self { bounds, seed })
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            bounds: self.bounds.clone(),
            seed,
        }
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.len() == self.dims() && z.iter().zip(&self.bounds).all(|(v, b)| *v >= b[0] && *v <= b[1])
    }

    /// `n` i.i.d. uniform draws; a pure function of `(bounds, seed, n)`.
    ///
    /// ChaCha8 is used because its output stream is stable across platforms
    /// and crate versions.
    pub fn draw(&self, n: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..n)
            .map(|_| {
                self.bounds
                    .iter()
                    .map(|b| b[0] + (b[1] - b[0]) * rng.random::<f64>())
                    .collect()
            })
            .collect()
    }
}
