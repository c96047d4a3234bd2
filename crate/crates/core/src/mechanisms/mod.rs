//! Private mechanisms for the mean point problem and the reductions between
//! mean-point and query-release algorithms.
//!
//! The Gaussian mechanism releases the database mean plus per-coordinate
//! Gaussian noise of standard deviation `sigma(eps, delta) * bound / n`; the
//! projection mechanism post-processes the same noisy vector (same seed, same
//! draw) by Euclidean projection onto the body. Privacy accounting is
//! declared, not audited: a reduction call costs `(2 eps, 2 delta)` by
//! composition, and the library records that claim without verifying it
//! empirically.

mod harness;

pub use harness::{
    measure_error, sample_complexity_search, search_with, Adversary, ErrorEstimate, ErrorTarget,
    MechanismChoice, SampleComplexity,
};

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::rng::stream;
use crate::workload::{sample_signed_databases, Database, Workload};

/// The noise multiplier `(0.5 sqrt(eps) + sqrt(2 ln(1/delta))) / eps` of the
/// Gaussian mechanism.
pub fn noise_multiplier(eps: f64, delta: f64) -> Result<f64> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if !(delta.is_finite() && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok((0.5 * eps.sqrt() + (2.0 * (1.0 / delta).ln()).sqrt()) / eps)
}

/// Privacy parameters with the derived noise multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub eps: f64,
    pub delta: f64,
    pub sigma: f64,
}

impl PrivacyParams {
    pub fn new(eps: f64, delta: f64) -> Result<Self> {
        Ok(PrivacyParams {
            eps,
            delta,
            sigma: noise_multiplier(eps, delta)?,
        })
    }

    /// Recompute the multiplier and check it against the stored value.
    pub fn validate(&self) -> Result<()> {
        let fresh = noise_multiplier(self.eps, self.delta)?;
        if (fresh - self.sigma).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "stored sigma {} disagrees with recomputed {fresh}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Output of a single mechanism invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismResult {
    pub output: Vec<f64>,
    /// Per-coordinate noise standard deviation `sigma * bound / n`.
    pub noise_scale: f64,
    pub seed: u64,
}

impl MechanismResult {
    pub fn output_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.output)
    }
}

fn point_mean(points: &[DVector<f64>]) -> Result<DVector<f64>> {
    if points.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let dim = points[0].len();
    let mut mean = DVector::zeros(dim);
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        mean += p;
    }
    Ok(mean / points.len() as f64)
}

/// The Gaussian mechanism: database mean plus `w/n`, with `w` drawn
/// per-coordinate i.i.d. `N(0, (sigma * bound)^2)`.
///
/// Every point must have Euclidean norm at most `bound + 1e-9`.
pub fn gaussian_mechanism(
    points: &[DVector<f64>],
    params: &PrivacyParams,
    bound: f64,
    seed: u64,
) -> Result<MechanismResult> {
    params.validate()?;
    if !(bound.is_finite() && bound > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "norm bound must be positive, got {bound}"
        )));
    }
    let mean = point_mean(points)?;
    for p in points {
        let norm = p.norm();
        if norm > bound + 1e-9 {
            return Err(Error::PointOutsideBody {
                gauge: norm / bound,
            });
        }
    }
    let n = points.len() as f64;
    let noise_scale = params.sigma * bound / n;
    let mut rng = stream(seed, 0);
    let output = DVector::from_fn(mean.len(), |i, _| {
        mean[i] + noise_scale * rng.sample::<f64, _>(StandardNormal)
    });
    Ok(MechanismResult {
        output: output.iter().cloned().collect(),
        noise_scale,
        seed,
    })
}

/// The projection mechanism: the Gaussian mechanism with unit norm bound,
/// post-processed by Euclidean projection onto `body`.
///
/// Under the same seed the pre-projection vector is exactly the Gaussian
/// mechanism output, which makes the two mechanisms couple draw by draw.
pub fn projection_mechanism(
    body: &ConvexBody,
    points: &[DVector<f64>],
    params: &PrivacyParams,
    seed: u64,
    tol: f64,
) -> Result<MechanismResult> {
    let diameter = body.diameter();
    if diameter > 1.0 + 1e-9 {
        return Err(Error::BodyNotInUnitBall { norm: diameter });
    }
    let db = Database::Points(points.to_vec());
    db.validate_points(body)?;
    let noisy = gaussian_mechanism(points, params, 1.0, seed)?;
    let projected = body.euclid_project(&noisy.output_vector(), tol)?;
    Ok(MechanismResult {
        output: projected.iter().cloned().collect(),
        noise_scale: noisy.noise_scale,
        seed,
    })
}

/// Answer a query workload through a mean-point algorithm.
///
/// Each database element `e` becomes the point `Q({e})/sqrt(m)`; the
/// algorithm runs once on the point database and its output is scaled back
/// by `sqrt(m)`. The per-query RMS error of the result equals the mean-point
/// error of the inner algorithm exactly.
pub fn query_release_from_meanpoint<F>(
    workload: &Workload,
    elements: &[usize],
    meanpoint_alg: F,
) -> Result<DVector<f64>>
where
    F: FnOnce(&[DVector<f64>]) -> Result<DVector<f64>>,
{
    if elements.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let points: Vec<DVector<f64>> = elements
        .iter()
        .map(|&e| workload.scaled_point(e))
        .collect::<Result<_>>()?;
    let estimate = meanpoint_alg(&points)?;
    Ok(estimate * (workload.query_count() as f64).sqrt())
}

/// Solve the mean point problem over `K'` through a query-release algorithm.
///
/// Each point is decomposed into a signed combination, one element per point
/// is sampled into a plus or minus database, and the two answer vectors are
/// combined as `(n_+ A(D_+) - n_- A(D_-)) / (n sqrt(m))`. An empty side
/// contributes the zero answer vector without invoking the algorithm.
pub fn meanpoint_from_query_release<F>(
    workload: &Workload,
    points: &[DVector<f64>],
    mut qr_alg: F,
    seed: u64,
) -> Result<DVector<f64>>
where
    F: FnMut(&[usize]) -> Result<DVector<f64>>,
{
    if points.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let combos: Vec<_> = points
        .iter()
        .map(|p| workload.caratheodory_decompose(p))
        .collect::<Result<_>>()?;
    let (plus, minus) = sample_signed_databases(&combos, seed);
    let n = points.len() as f64;
    let sqrt_m = (workload.query_count() as f64).sqrt();
    let m = workload.query_count();

    let mut answer = DVector::zeros(m);
    for (db, sign) in [(&plus, 1.0), (&minus, -1.0)] {
        if let Database::Elements(els) = db {
            if !els.is_empty() {
                let a = qr_alg(els)?;
                if a.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        got: a.len(),
                    });
                }
                answer += a * (sign * els.len() as f64 / (n * sqrt_m));
            }
        }
    }
    Ok(answer)
}
