//! Monte Carlo estimators for the Gaussian mean width and Gaussian mean norm.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ConvexBody;
use crate::error::{Error, Result};
use crate::rng::{stream, PARTITION_SIZE};

/// A seeded Monte Carlo point estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

fn gaussian_vector<R: Rng>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Mean and standard error of `f(g)` over `samples` i.i.d. standard Gaussian
/// vectors, partitioned into fixed-size per-stream chunks so the estimate
/// does not depend on how the loop is scheduled.
fn monte_carlo<F>(dim: usize, samples: u64, seed: u64, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(&DVector<f64>) -> Result<f64>,
{
    let mut values = Vec::with_capacity(samples as usize);
    let partitions = samples.div_ceil(PARTITION_SIZE as u64);
    for p in 0..partitions {
        let mut rng = stream(seed, p);
        let in_partition = (samples - p * PARTITION_SIZE as u64).min(PARTITION_SIZE as u64);
        for _ in 0..in_partition {
            let g = gaussian_vector(dim, &mut rng);
            values.push(f(&g)?);
        }
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

impl ConvexBody {
    /// Monte Carlo estimate of the Gaussian mean width `E[h_K(g)]`.
    ///
    /// Deterministic for a fixed seed; exactly homogeneous in the body scale
    /// under common random numbers.
    pub fn gaussian_width(&self, samples: u64, seed: u64) -> Result<WidthEstimate> {
        if samples < 2 {
            return Err(Error::InvalidParameter(
                "width estimation needs at least 2 samples".into(),
            ));
        }
        let (mean, se) = monte_carlo(self.dim(), samples, seed, |g| Ok(self.raw_support(g)))?;
        Ok(WidthEstimate {
            value: self.scale() * mean,
            stderr: self.scale() * se,
            samples,
            seed,
        })
    }

    /// Monte Carlo estimate of the Gaussian mean norm `E ||g||_K`.
    ///
    /// Refuses degenerate bodies (the mean norm is infinite when the body is
    /// not full-dimensional).
    pub fn gaussian_norm_mean(&self, samples: u64, seed: u64) -> Result<WidthEstimate> {
        if samples < 2 {
            return Err(Error::InvalidParameter(
                "norm estimation needs at least 2 samples".into(),
            ));
        }
        if !self.is_full_dimensional() {
            return Err(Error::DegenerateBody(
                "gaussian mean norm is infinite for degenerate bodies".into(),
            ));
        }
        let (mean, se) = monte_carlo(self.dim(), samples, seed, |g| {
            match self.raw_gauge(g)? {
                Some(v) => Ok(v),
                None => Err(Error::DegenerateBody(
                    "sampled direction outside body span".into(),
                )),
            }
        })?;
        Ok(WidthEstimate {
            value: mean / self.scale(),
            stderr: se / self.scale(),
            samples,
            seed,
        })
    }
}
