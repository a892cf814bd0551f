use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::contrast::{make_contrast, ContrastKind};
use super::ftest::selective_f_test;
use super::naive::naive_coefficient;
use super::sigma::estimate_sigma_aug_lasso;
use super::ztest::selective_z_inference;
use crate::detection::{detect, DetectionConfig, DetectionMethod};
use crate::error::{Error, Result};
use crate::geometry::IntervalSet;
use crate::model::{fit_ols, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MethodTag {
    #[serde(rename = "SELECT-KNOWN")]
    SelectKnown,
    #[serde(rename = "SELECT-EST")]
    SelectEst,
    #[serde(rename = "SELECT-EXACT")]
    SelectExact,
    #[serde(rename = "NAIVE")]
    Naive,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::SelectKnown => "SELECT-KNOWN",
            MethodTag::SelectEst => "SELECT-EST",
            MethodTag::SelectExact => "SELECT-EXACT",
            MethodTag::Naive => "NAIVE",
        }
    }
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where σ comes from. `Exact` avoids σ altogether through the F test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaMode {
    Known(f64),
    Est,
    Exact,
}

impl SigmaMode {
    pub fn tag(&self) -> MethodTag {
        match self {
            SigmaMode::Known(_) => MethodTag::SelectKnown,
            SigmaMode::Est => MethodTag::SelectEst,
            SigmaMode::Exact => MethodTag::SelectExact,
        }
    }
}

impl FromStr for SigmaMode {
    type Err = Error;

    /// `exact`, `est`, or a positive number for known σ.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(SigmaMode::Exact),
            "est" | "estimate" => Ok(SigmaMode::Est),
            other => {
                let v = other
                    .strip_prefix("known:")
                    .unwrap_or(other)
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("unknown σ mode '{s}'")))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidInput(format!("known σ must be positive, got {v}")));
                }
                Ok(SigmaMode::Known(v))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub detection: DetectionConfig,
    pub sigma: SigmaMode,
    pub alpha: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoefficientReport {
    pub name: String,
    pub estimate: f64,
    pub naive_p: f64,
    pub naive_ci_lo: f64,
    pub naive_ci_hi: f64,
    pub selective_p: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    /// On the `Z` scale for the z-test, the `F` scale for the F test.
    pub truncation_set: IntervalSet,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DetectionSummary {
    pub method: DetectionMethod,
    pub cutoff: f64,
    /// 1-based.
    pub outliers: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SigmaSummary {
    pub method: MethodTag,
    /// `None` in exact mode.
    pub value: Option<f64>,
    pub refit: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FitSummary {
    pub n: usize,
    pub kept: usize,
    #[serde(rename = "adjR2")]
    pub adj_r2: f64,
    pub sigma: SigmaSummary,
    pub alpha: f64,
    pub coefficients: Vec<CoefficientReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub detection: DetectionSummary,
    pub fit: FitSummary,
}

/// Detect, refit on the retained rows, and report naive and selective
/// inference for every coefficient.
pub fn analyze(data: &Dataset, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::InvalidInput(format!("α must lie in (0, 1), got {}", opts.alpha)));
    }
    let det = detect(data, &opts.detection)?;
    let fit = fit_ols(data, &det.kept)?;
    let sigma = match opts.sigma {
        SigmaMode::Known(s) => Some(s),
        SigmaMode::Est => Some(estimate_sigma_aug_lasso(data)?.sigma),
        SigmaMode::Exact => None,
    };
    let coefficients = (0..data.p())
        .into_par_iter()
        .map(|j| {
            let naive = naive_coefficient(&fit, data, j, opts.alpha)?;
            let (selective_p, ci, truncation_set) = match sigma {
                Some(s) => {
                    let c = make_contrast(&fit, ContrastKind::Coefficient(j), data, s)?;
                    let z = selective_z_inference(&c, &det.event, opts.alpha)?;
                    (z.p_value, Some(z.ci), z.truncation)
                }
                None => {
                    let f = selective_f_test(&fit, data, &[j], &det.event)?;
                    (f.p_value, None, f.truncation)
                }
            };
            Ok(CoefficientReport {
                name: data.column_names()[j].clone(),
                estimate: naive.estimate,
                naive_p: naive.p_value,
                naive_ci_lo: naive.ci.0,
                naive_ci_hi: naive.ci.1,
                selective_p,
                ci_lo: ci.map(|c| c.0),
                ci_hi: ci.map(|c| c.1),
                truncation_set,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnalysisReport {
        detection: DetectionSummary {
            method: det.method,
            cutoff: det.cutoff,
            outliers: det.outliers_one_based(),
        },
        fit: FitSummary {
            n: data.n(),
            kept: fit.kept(),
            adj_r2: fit.adjusted_r2(),
            sigma: SigmaSummary { method: opts.sigma.tag(), value: sigma, refit: fit.sigma_refit() },
            alpha: opts.alpha,
            coefficients,
        },
    })
}
