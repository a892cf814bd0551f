use nalgebra::DVector;
use serde::Serialize;

use super::ftest::f_test_spec;
use crate::error::{Error, Result};
use crate::model::{Dataset, OlsFit};
use crate::special::{ContinuousDist, FDist, StudentT};

/// Classical t inference on the retained rows, ignoring selection.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NaiveInference {
    pub estimate: f64,
    pub std_error: f64,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub ci: (f64, f64),
}

/// t inference for `νᵀβ`, with `nu` of length `n` supported on the
/// retained rows.
pub fn naive_contrast(fit: &OlsFit, nu: &DVector<f64>, y: &DVector<f64>, alpha: f64) -> Result<NaiveInference> {
    let df = fit.df_resid();
    if df == 0 {
        return Err(Error::InvalidInput("no residual degrees of freedom".into()));
    }
    let estimate = nu.dot(y);
    let std_error = fit.sigma_refit() * nu.norm();
    let statistic = estimate / std_error;
    let t = StudentT { df: df as f64 };
    let q = t.quantile(1.0 - alpha / 2.0);
    Ok(NaiveInference {
        estimate,
        std_error,
        statistic,
        df,
        p_value: t.two_sided_p(statistic),
        ci: (estimate - q * std_error, estimate + q * std_error),
    })
}

pub fn naive_coefficient(fit: &OlsFit, data: &Dataset, j: usize, alpha: f64) -> Result<NaiveInference> {
    let spec = super::contrast::make_contrast(fit, super::ContrastKind::Coefficient(j), data, 1.0)?;
    naive_contrast(fit, &spec.nu, data.y(), alpha)
}

/// Classical nested-model F test of `β^M_g = 0`: `(F, p)`.
pub fn naive_group_f(fit: &OlsFit, data: &Dataset, g: &[usize]) -> Result<(f64, f64)> {
    let spec = f_test_spec(fit, data, g)?;
    let d = FDist { d1: spec.curve.d1, d2: spec.curve.d2 };
    Ok((spec.statistic, d.sf(spec.statistic)))
}
