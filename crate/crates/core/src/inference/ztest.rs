use serde::Serialize;

use super::contrast::ContrastSpec;
use crate::error::{Error, Result};
use crate::geometry::{IntervalSet, SelectionEvent};
use crate::special::norm_ppf;
use crate::truncated::{tn_mean_solve, Family, TruncatedDistribution};

/// Grid size for the split of `α` in prediction intervals.
pub const PREDICTION_GRID: usize = 50;

/// Known-σ inference on `νᵀμ` given the selection event.
#[derive(Debug, Clone, Serialize)]
pub struct ZInference {
    pub estimate: f64,
    pub statistic: f64,
    /// Truncation set on the `Z` scale.
    pub truncation: IntervalSet,
    /// `1 − F^E_0(Z)`
    pub p_upper: f64,
    /// `2 min(p, 1 − p)`
    pub p_value: f64,
    pub ci: (f64, f64),
}

/// Truncation set `{Z : z + σZ ν/‖ν‖ ∈ E}`.
pub fn z_truncation_set(contrast: &ContrastSpec, event: &SelectionEvent) -> Result<IntervalSet> {
    let t_set = event.slice_on_line(&contrast.z_residual, &contrast.direction)?;
    let set = t_set.scale(1.0 / contrast.sigma);
    check_contains(&set, contrast.statistic)?;
    Ok(set)
}

pub(crate) fn check_contains(set: &IntervalSet, x: f64) -> Result<()> {
    if set.is_empty() {
        return Err(Error::DegenerateEvent("truncation set is empty".into()));
    }
    if set.distance(x) > 1e-7 * (1.0 + x.abs()) {
        return Err(Error::DegenerateEvent(format!(
            "observed statistic {x} lies outside its truncation set {set}"
        )));
    }
    Ok(())
}

/// Confidence bounds for `νᵀμ` from a `Z`-scale truncation set.
pub fn selective_ci(set: &IntervalSet, statistic: f64, scale: f64, alpha: f64) -> Result<(f64, f64)> {
    let lo = tn_mean_solve(set, statistic, 1.0 - alpha / 2.0)?;
    let hi = tn_mean_solve(set, statistic, alpha / 2.0)?;
    Ok((lo * scale, hi * scale))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("α must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

pub fn selective_z_inference(contrast: &ContrastSpec, event: &SelectionEvent, alpha: f64) -> Result<ZInference> {
    check_alpha(alpha)?;
    let set = z_truncation_set(contrast, event)?;
    let dist = TruncatedDistribution::new(Family::Normal { mean: 0.0 }, &set)?;
    let z = contrast.statistic;
    let p_upper = dist.sf(z);
    let p_lower = dist.cdf(z);
    let p_value = (2.0 * p_upper.min(p_lower)).min(1.0);
    let ci = selective_ci(&set, z, contrast.sigma * contrast.nu_norm, alpha)?;
    Ok(ZInference {
        estimate: contrast.estimate,
        statistic: z,
        truncation: set,
        p_upper,
        p_value,
        ci,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PredictionInterval {
    pub lo: f64,
    pub hi: f64,
    /// Share of `α` spent on the mean; the rest covers the new noise.
    pub alpha_mean: f64,
}

/// Prediction interval for `x₀ᵀβ^M + ε₀` by splitting `α` between a
/// selective interval for the mean and a normal interval for the noise,
/// choosing the split that gives the shortest result.
pub fn prediction_interval(contrast: &ContrastSpec, event: &SelectionEvent, alpha: f64) -> Result<PredictionInterval> {
    check_alpha(alpha)?;
    let set = z_truncation_set(contrast, event)?;
    let scale = contrast.sigma * contrast.nu_norm;
    let mut best: Option<PredictionInterval> = None;
    for k in 1..=PREDICTION_GRID {
        let a = alpha * k as f64 / (PREDICTION_GRID + 1) as f64;
        let (l, u) = selective_ci(&set, contrast.statistic, scale, a)?;
        let q = norm_ppf(1.0 - (alpha - a) / 2.0) * contrast.sigma;
        let cand = PredictionInterval { lo: l - q, hi: u + q, alpha_mean: a };
        if best.is_none_or(|b| cand.hi - cand.lo < b.hi - b.lo) {
            best = Some(cand);
        }
    }
    Ok(best.expect("grid is non-empty"))
}
