//! Bound-formula calculators and regime classification.
//!
//! Every asymptotic constant is fixed to 1 and all logarithms are natural
//! logs of `2m`; reports carry both choices as metadata so downstream
//! consumers know the values are up-to-constants, not asserted tight.

mod gelfand;

pub use gelfand::{gelfand_probe, gelfand_probe_subspace, section_diameter, GelfandProbe};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, WidthEstimate};
use crate::mechanisms::noise_multiplier;
use crate::workload::Workload;

/// Which problem a [`BoundReport`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundProblem {
    MeanPoint,
    QueryRelease,
}

/// Evaluated bound formulas for one body or workload.
///
/// Upper bounds come from the Gaussian and projection mechanisms; lower
/// bounds from the width-based formulas, valid only below the alpha
/// threshold. All values are up-to-constants (constants fixed to 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub problem: BoundProblem,
    pub m: usize,
    pub alpha: f64,
    pub eps: f64,
    pub delta: f64,
    pub sigma: f64,
    /// Monte Carlo estimate of the mean width of the analyzed set (the body
    /// itself for mean point, the unscaled sensitivity polytope for query
    /// release).
    pub ell_star: WidthEstimate,
    /// Gaussian-mechanism sample complexity `sigma sqrt(m) / alpha`.
    pub gauss_upper: f64,
    /// Projection-mechanism sample complexity: `sigma ell* / alpha^2` for
    /// mean point, `sigma ell* / (sqrt(m) alpha^2)` for query release.
    pub proj_upper: f64,
    /// Mean-point lower bound `sigma ell*(K') / ((ln 2m)^2 alpha)`.
    pub meanpt_lower: f64,
    /// Query-release lower bound
    /// `sigma ell*(K)^2 / (m^(3/2) (ln 2m)^4 alpha)`.
    pub qr_lower: f64,
    /// Largest alpha for which the lower bounds are asserted.
    pub alpha_validity_threshold: f64,
    /// Whether `alpha <= alpha_validity_threshold`.
    pub lower_bounds_asserted: bool,
    /// `ell*/sqrt(m)` for mean point, `ell*/m` for query release.
    pub regime_ratio: f64,
    /// Whether the ratio is at least 1/2, the regime where the Gaussian
    /// mechanism is optimal up to constants.
    pub gaussian_optimal_regime: bool,
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// Bound report for the mean point problem over a body inside the unit ball.
pub fn bound_report(
    body: &ConvexBody,
    eps: f64,
    delta: f64,
    alpha: f64,
    width_samples: u64,
    seed: u64,
) -> Result<BoundReport> {
    validate_alpha(alpha)?;
    let diameter = body.diameter();
    if diameter > 1.0 + 1e-9 {
        return Err(Error::BodyNotInUnitBall { norm: diameter });
    }
    let sigma = noise_multiplier(eps, delta)?;
    let m = body.dim();
    let ell_star = body.gaussian_width(width_samples, seed)?;
    let ell = ell_star.value;
    let sqrt_m = (m as f64).sqrt();
    let log2m = (2.0 * m as f64).ln();
    let threshold = ell / (sqrt_m * log2m.powi(2));
    Ok(BoundReport {
        problem: BoundProblem::MeanPoint,
        m,
        alpha,
        eps,
        delta,
        sigma,
        gauss_upper: sigma * sqrt_m / alpha,
        proj_upper: sigma * ell / alpha.powi(2),
        meanpt_lower: sigma * ell / (log2m.powi(2) * alpha),
        // The corresponding query-release instance has K = sqrt(m) K'.
        qr_lower: sigma * ell * ell / (sqrt_m * log2m.powi(4) * alpha),
        alpha_validity_threshold: threshold,
        lower_bounds_asserted: alpha <= threshold,
        regime_ratio: ell / sqrt_m,
        gaussian_optimal_regime: ell / sqrt_m >= 0.5,
        ell_star,
    })
}

/// Bound report for query release over a workload, using the unscaled
/// sensitivity polytope.
pub fn query_release_bounds(
    workload: &Workload,
    eps: f64,
    delta: f64,
    alpha: f64,
    width_samples: u64,
    seed: u64,
) -> Result<BoundReport> {
    validate_alpha(alpha)?;
    let sigma = noise_multiplier(eps, delta)?;
    let m = workload.query_count();
    let body = workload.sensitivity_polytope(false);
    let ell_star = body.gaussian_width(width_samples, seed)?;
    let ell = ell_star.value;
    let mf = m as f64;
    let sqrt_m = mf.sqrt();
    let log2m = (2.0 * mf).ln();
    let threshold = ell / (mf * log2m.powi(2));
    Ok(BoundReport {
        problem: BoundProblem::QueryRelease,
        m,
        alpha,
        eps,
        delta,
        sigma,
        gauss_upper: sigma * sqrt_m / alpha,
        proj_upper: sigma * ell / (sqrt_m * alpha.powi(2)),
        // The scaled polytope K' = K/sqrt(m) has width ell/sqrt(m).
        meanpt_lower: sigma * (ell / sqrt_m) / (log2m.powi(2) * alpha),
        qr_lower: sigma * ell * ell / (mf.powf(1.5) * log2m.powi(4) * alpha),
        alpha_validity_threshold: threshold,
        lower_bounds_asserted: alpha <= threshold,
        regime_ratio: ell / mf,
        gaussian_optimal_regime: ell / mf >= 0.5,
        ell_star,
    })
}

/// Sample-complexity transfer to a smaller error level:
/// `scz(alpha') >= (alpha / alpha') * scz(alpha)`, constant fixed to 1.
pub fn padding_scaler(scz_at_alpha: f64, alpha: f64, alpha_prime: f64) -> Result<f64> {
    if !(scz_at_alpha >= 0.0 && scz_at_alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sample complexity must be a nonnegative real, got {scz_at_alpha}"
        )));
    }
    if !(0.0 < alpha_prime && alpha_prime < alpha && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < alpha' < alpha < 1, got alpha' = {alpha_prime}, alpha = {alpha}"
        )));
    }
    Ok(alpha / alpha_prime * scz_at_alpha)
}
