use std::collections::BTreeMap;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::{child_rng, design_names, gaussian_design, MeanShiftSpec};
use super::ks::ks_uniform;
use super::report::{Metric, NamedKs, Record, RepStatus, SimReport};
use crate::detection::{detect, DetectionConfig, DetectionMethod};
use crate::error::{Error, Result};
use crate::inference::{
    estimate_sigma_aug_lasso, group_chi2_test, make_contrast, naive_coefficient, naive_group_f, selective_f_test,
    selective_z_inference, ContrastKind,
};
use crate::model::{fit_ols, Dataset};

/// Mean-shift experiment: Gaussian design with intercept, outliers at
/// rows 0..5 shifted by `(s, s, s, −s, −s)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub s: f64,
    pub method: DetectionMethod,
    pub cutoff: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 100,
            p: 11,
            s: 4.0,
            method: DetectionMethod::Cooks,
            cutoff: 4.0,
            sigma: 1.0,
            alpha: 0.05,
            reps: 500,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, min_reps: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.reps < min_reps.max(1) {
            return bad(format!("need at least {} replications, got {}", min_reps.max(1), self.reps));
        }
        if self.p < 2 || self.n <= self.p + 5 {
            return bad(format!("need p ≥ 2 and n > p + 5 (n = {}, p = {})", self.n, self.p));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("σ must be positive, got {}", self.sigma));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("α must lie in (0, 1), got {}", self.alpha));
        }
        if !self.s.is_finite() {
            return bad("outlier magnitude must be finite".into());
        }
        DetectionConfig::new(self.method, self.cutoff)?;
        Ok(())
    }

    fn detection(&self) -> DetectionConfig {
        DetectionConfig { method: self.method, cutoff: self.cutoff }
    }

    fn spec(&self, beta: DVector<f64>) -> Result<MeanShiftSpec> {
        MeanShiftSpec::five_outliers(gaussian_design(self.n, self.p, self.seed), beta, self.s, self.sigma)
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Runs `body` and maps its error to the replication status.
fn guarded(rep: usize, beta1: Option<f64>, body: impl FnOnce() -> Result<Vec<(&'static str, f64)>>) -> Result<Record> {
    match body() {
        Ok(values) => Ok(Record { rep, beta1, status: RepStatus::Ok, values }),
        Err(Error::TooManyOutliers { kept, .. }) => {
            Ok(Record { rep, beta1, status: RepStatus::Excluded, values: vec![("kept", kept as f64)] })
        }
        Err(e) if e.is_numerical() => {
            log::debug!("replication {rep} failed: {e}");
            Ok(Record { rep, beta1, status: RepStatus::Failed, values: vec![] })
        }
        Err(e) => Err(e),
    }
}

fn count(records: &[Record], status: RepStatus) -> usize {
    records.iter().filter(|r| r.status == status).count()
}

fn rate(records: &[Record], beta1: Option<f64>, key: &str, name: &str) -> Metric {
    let ok: Vec<&Record> = records.iter().filter(|r| r.status == RepStatus::Ok && r.beta1 == beta1).collect();
    Metric::from_counts(name, beta1, ok.iter().filter(|r| r.flag(key)).count(), ok.len())
}

/// Coverage of naive and SELECT-EST intervals for `β^M_1` and `β*_1`,
/// with `β* = (1, 2, 1, …, 1)`.
pub fn run_coverage(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate(100)?;
    let mut beta = DVector::from_element(cfg.p, 1.0);
    beta[1] = 2.0;
    let spec = cfg.spec(beta)?;
    let template = Dataset::new(DVector::zeros(cfg.n), spec.x.clone(), design_names(cfg.p), true)?;
    let mu = spec.mean();
    let truth = spec.true_outliers();
    let records = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            guarded(rep, None, || {
                let data = template.with_response(spec.draw_response(&mut child_rng(cfg.seed, rep as u64)))?;
                let det = detect(&data, &cfg.detection())?;
                let fit = fit_ols(&data, &det.kept)?;
                let naive = naive_coefficient(&fit, &data, 1, cfg.alpha)?;
                let sigma = estimate_sigma_aug_lasso(&data)?.sigma;
                let c = make_contrast(&fit, ContrastKind::Coefficient(1), &data, sigma)?;
                let sel = selective_z_inference(&c, &det.event, cfg.alpha)?;
                let beta_m = c.nu.dot(&mu);
                let inside = |ci: (f64, f64), v: f64| flag(ci.0 <= v && v <= ci.1);
                Ok(vec![
                    ("kept", fit.kept() as f64),
                    ("clean", flag(truth.iter().all(|i| det.outliers.contains(i)))),
                    ("betaM", beta_m),
                    ("sigmaEst", sigma),
                    ("naiveCoverBetaM", inside(naive.ci, beta_m)),
                    ("estCoverBetaM", inside(sel.ci, beta_m)),
                    ("naiveCoverBetaStar", inside(naive.ci, spec.beta[1])),
                    ("estCoverBetaStar", inside(sel.ci, spec.beta[1])),
                    ("naiveLength", naive.ci.1 - naive.ci.0),
                    ("estLength", sel.ci.1 - sel.ci.0),
                ])
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let metrics = vec![
        rate(&records, None, "naiveCoverBetaM", "naive_cover_betaM"),
        rate(&records, None, "estCoverBetaM", "est_cover_betaM"),
        rate(&records, None, "naiveCoverBetaStar", "naive_cover_betaStar"),
        rate(&records, None, "estCoverBetaStar", "est_cover_betaStar"),
        rate(&records, None, "clean", "true_outliers_removed"),
    ];
    Ok(finish("coverage", cfg, records, metrics))
}

fn finish(kind: &str, cfg: &SimConfig, records: Vec<Record>, metrics: Vec<Metric>) -> SimReport {
    SimReport {
        kind: kind.to_string(),
        seed: cfg.seed,
        config: serde_json::to_value(cfg).expect("config serializes"),
        replications: records.len(),
        excluded: count(&records, RepStatus::Excluded),
        failed: count(&records, RepStatus::Failed),
        acceptance_rate: None,
        target_outliers: None,
        metrics,
        ks: vec![],
        records,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerTarget {
    /// `β_1 = 0`, with `β* = (1, β_1, 1, …, 1)`.
    Coefficient,
    /// `β_{1..p−1} = 0`, with `β* = (1, β_1, 0, …, 0)`.
    Group,
}

/// Rejection rates of NAIVE, SELECT-EST and SELECT-EXACT at level `α`
/// over a sweep of `β*_1`. Replication `r` reuses the same noise for every
/// `β*_1`.
pub fn run_power(cfg: &SimConfig, target: PowerTarget, beta1_values: &[f64]) -> Result<SimReport> {
    cfg.validate(1)?;
    if beta1_values.is_empty() || beta1_values.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidInput("need at least one finite β₁ value".into()));
    }
    let group: Vec<usize> = (1..cfg.p).collect();
    let mut records = Vec::with_capacity(cfg.reps * beta1_values.len());
    let mut metrics = Vec::new();
    for &b1 in beta1_values {
        let mut beta = DVector::from_element(cfg.p, if target == PowerTarget::Group { 0.0 } else { 1.0 });
        beta[0] = 1.0;
        beta[1] = b1;
        let spec = cfg.spec(beta)?;
        let template = Dataset::new(DVector::zeros(cfg.n), spec.x.clone(), design_names(cfg.p), true)?;
        let batch = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                guarded(rep, Some(b1), || {
                    let data = template.with_response(spec.draw_response(&mut child_rng(cfg.seed, rep as u64)))?;
                    let det = detect(&data, &cfg.detection())?;
                    let fit = fit_ols(&data, &det.kept)?;
                    let sigma = estimate_sigma_aug_lasso(&data)?.sigma;
                    let (naive, est, exact) = match target {
                        PowerTarget::Coefficient => {
                            let naive = naive_coefficient(&fit, &data, 1, cfg.alpha)?.p_value;
                            let c = make_contrast(&fit, ContrastKind::Coefficient(1), &data, sigma)?;
                            let est = selective_z_inference(&c, &det.event, cfg.alpha)?.p_value;
                            let exact = selective_f_test(&fit, &data, &[1], &det.event)?.p_two_sided;
                            (naive, est, exact)
                        }
                        PowerTarget::Group => {
                            let naive = naive_group_f(&fit, &data, &group)?.1;
                            let est = group_chi2_test(&fit, &data, &group, &det.event, sigma)?.p_value;
                            let exact = selective_f_test(&fit, &data, &group, &det.event)?.p_value;
                            (naive, est, exact)
                        }
                    };
                    Ok(vec![
                        ("kept", fit.kept() as f64),
                        ("sigmaEst", sigma),
                        ("naiveP", naive),
                        ("estP", est),
                        ("exactP", exact),
                        ("naiveReject", flag(naive < cfg.alpha)),
                        ("estReject", flag(est < cfg.alpha)),
                        ("exactReject", flag(exact < cfg.alpha)),
                    ])
                })
            })
            .collect::<Result<Vec<_>>>()?;
        records.extend(batch);
        for (key, name) in [("naiveReject", "naive_reject"), ("estReject", "est_reject"), ("exactReject", "exact_reject")] {
            metrics.push(rate(&records, Some(b1), key, name));
        }
    }
    let mut report = finish("power", cfg, records, metrics);
    report.config["target"] = serde_json::to_value(target).expect("target serializes");
    report.config["beta1"] = serde_json::to_value(beta1_values).expect("values serialize");
    Ok(report)
}

/// Null experiment for conditional uniformity: `β* = 0`, an optional
/// shift on row 0, known `σ = 1`, and data accepted only when the
/// detected outlier set equals the modal one from a pilot run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformityConfig {
    pub n: usize,
    pub p: usize,
    pub method: DetectionMethod,
    pub cutoff: f64,
    pub shift: f64,
    /// Coefficient under test.
    pub coefficient: usize,
    pub accepted: usize,
    pub pilot: usize,
    pub max_draws: usize,
    pub seed: u64,
}

impl Default for UniformityConfig {
    fn default() -> Self {
        UniformityConfig {
            n: 50,
            p: 3,
            method: DetectionMethod::Cooks,
            cutoff: 3.0,
            shift: 6.0,
            coefficient: 1,
            accepted: 2000,
            pilot: 1000,
            max_draws: 2_000_000,
            seed: 1,
        }
    }
}

/// Smallest acceptance rate treated as practical.
pub const MIN_ACCEPTANCE: f64 = 1e-3;
const BATCH: usize = 1024;

pub fn run_uniformity(cfg: &UniformityConfig) -> Result<SimReport> {
    if cfg.accepted == 0 || cfg.pilot == 0 {
        return Err(Error::InvalidInput("need positive pilot and acceptance counts".into()));
    }
    if cfg.coefficient >= cfg.p {
        return Err(Error::InvalidInput("coefficient index out of range".into()));
    }
    let detection = DetectionConfig::new(cfg.method, cfg.cutoff)?;
    let mut shift = DVector::zeros(cfg.n);
    shift[0] = cfg.shift;
    let spec = MeanShiftSpec::new(gaussian_design(cfg.n, cfg.p, cfg.seed), DVector::zeros(cfg.p), shift, 1.0)?;
    let template = Dataset::new(DVector::zeros(cfg.n), spec.x.clone(), design_names(cfg.p), true)?;
    let draw = |stream: usize| template.with_response(spec.draw_response(&mut child_rng(cfg.seed, stream as u64)));

    let pilot: Vec<Option<Vec<usize>>> = (0..cfg.pilot)
        .into_par_iter()
        .map(|s| Ok(detect(&draw(s)?, &detection).ok().map(|d| d.outliers)))
        .collect::<Result<_>>()?;
    let mut tally: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for o in pilot.into_iter().flatten() {
        *tally.entry(o).or_default() += 1;
    }
    let target = tally
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(k, _)| k.clone())
        .ok_or_else(|| Error::Numerical("no usable pilot draws".into()))?;

    let mut records: Vec<Record> = Vec::with_capacity(cfg.accepted);
    let mut draws = 0usize;
    let mut accepted = 0usize;
    while accepted < cfg.accepted {
        if draws >= cfg.max_draws || (draws >= 10 * BATCH && (accepted as f64) < MIN_ACCEPTANCE * draws as f64) {
            return Err(Error::Numerical(format!(
                "acceptance rate {accepted}/{draws} is below {MIN_ACCEPTANCE}; configuration impractical"
            )));
        }
        let start = cfg.pilot + draws;
        let batch: Vec<Option<Record>> = (start..start + BATCH)
            .into_par_iter()
            .map(|stream| -> Result<Option<Record>> {
                let data = draw(stream)?;
                let det = match detect(&data, &detection) {
                    Ok(d) if d.outliers == target => d,
                    _ => return Ok(None),
                };
                let rep = stream - cfg.pilot;
                let j = cfg.coefficient;
                guarded(rep, None, || {
                    let fit = fit_ols(&data, &det.kept)?;
                    let c = make_contrast(&fit, ContrastKind::Coefficient(j), &data, 1.0)?;
                    let z = selective_z_inference(&c, &det.event, 0.05)?;
                    let f = selective_f_test(&fit, &data, &[j], &det.event)?;
                    let naive = naive_coefficient(&fit, &data, j, 0.05)?;
                    Ok(vec![("zP", z.p_upper), ("fP", f.p_value), ("naiveP", naive.p_value)])
                })
                .map(Some)
            })
            .collect::<Result<_>>()?;
        draws += BATCH;
        for r in batch.into_iter().flatten() {
            if accepted < cfg.accepted {
                accepted += 1;
                records.push(r);
            }
        }
    }
    let consumed = records.last().map(|r| r.rep + 1).unwrap_or(draws);
    let ok: Vec<&Record> = records.iter().filter(|r| r.status == RepStatus::Ok).collect();
    let column = |k: &str| ok.iter().filter_map(|r| r.get(k)).collect::<Vec<f64>>();
    let ks = [("z", "zP"), ("f", "fP"), ("naive", "naiveP")]
        .into_iter()
        .map(|(name, key)| NamedKs { name: name.into(), result: ks_uniform(&column(key)) })
        .collect();
    Ok(SimReport {
        kind: "uniformity".into(),
        seed: cfg.seed,
        config: serde_json::to_value(cfg).expect("config serializes"),
        replications: records.len(),
        excluded: 0,
        failed: count(&records, RepStatus::Failed),
        acceptance_rate: Some(accepted as f64 / consumed as f64),
        target_outliers: Some(target.iter().map(|i| i + 1).collect()),
        metrics: vec![Metric::from_counts("accepted", None, accepted, consumed)],
        ks,
        records,
    })
}
