//! Outlier detection rules and the selection events they induce.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{QuadTerm, QuadraticConstraint, SelectionEvent};
use crate::linalg::{PivotedQr, Projector};
use crate::model::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMethod {
    Cooks,
    Dffits,
    Softipod,
}

impl DetectionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectionMethod::Cooks => "cooks",
            DetectionMethod::Dffits => "dffits",
            DetectionMethod::Softipod => "softipod",
        }
    }
}

impl fmt::Display for DetectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cooks" | "cook" => Ok(DetectionMethod::Cooks),
            "dffits" => Ok(DetectionMethod::Dffits),
            "softipod" | "soft-ipod" | "ipod" => Ok(DetectionMethod::Softipod),
            other => Err(Error::InvalidInput(format!("unknown detection method '{other}'"))),
        }
    }
}

/// Detection rule and its cutoff.
///
/// The cutoff is `λ` in `D_i ≥ λ/n` for Cook's distance, the absolute
/// threshold on `|DFFITS_i|`, or the lasso penalty for soft-IPOD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub method: DetectionMethod,
    pub cutoff: f64,
}

impl DetectionConfig {
    pub fn new(method: DetectionMethod, cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff must be positive and finite, got {cutoff}")));
        }
        Ok(DetectionConfig { method, cutoff })
    }

    pub fn cooks(lambda: f64) -> Result<Self> {
        Self::new(DetectionMethod::Cooks, lambda)
    }
}

#[derive(Debug, Clone)]
pub struct DetectionResult {
    pub method: DetectionMethod,
    pub cutoff: f64,
    /// Retained rows, ascending, 0-based.
    pub kept: Vec<usize>,
    /// Detected outliers, ascending, 0-based.
    pub outliers: Vec<usize>,
    pub event: SelectionEvent,
    /// `D_i`, `|DFFITS_i|` or `|û_i|`.
    pub scores: DVector<f64>,
    /// Signs of `û` (soft-IPOD only; 0 for retained rows).
    pub signs: Option<Vec<i8>>,
}

impl DetectionResult {
    /// Outlier indices as shown to users.
    pub fn outliers_one_based(&self) -> Vec<usize> {
        self.outliers.iter().map(|i| i + 1).collect()
    }
}

pub fn detect(data: &Dataset, config: &DetectionConfig) -> Result<DetectionResult> {
    match config.method {
        DetectionMethod::Cooks => detect_cooks(data, config.cutoff),
        DetectionMethod::Dffits => detect_dffits(data, config.cutoff),
        DetectionMethod::Softipod => {
            let fit = solve_soft_ipod(data, config.cutoff)?;
            soft_ipod_event(data, config.cutoff, &fit)
        }
    }
}

/// Full-data quantities shared by the leverage-based rules.
struct FullFit {
    projector: Arc<Projector>,
    resid: DVector<f64>,
    leverage: Vec<f64>,
    rss: f64,
}

fn full_fit(data: &Dataset) -> Result<FullFit> {
    let projector = Arc::new(Projector::residual_maker(data.x())?);
    let resid = projector.apply(data.y());
    let leverage: Vec<f64> = (0..data.n()).map(|i| 1.0 - projector.diagonal(i)).collect();
    if let Some(i) = leverage.iter().position(|&h| 1.0 - h < 1e-12) {
        return Err(Error::InvalidInput(format!("observation {} has leverage 1", i + 1)));
    }
    let rss = resid.norm_squared();
    Ok(FullFit { projector, resid, leverage, rss })
}

fn split(n: usize, is_outlier: impl Fn(usize) -> bool) -> (Vec<usize>, Vec<usize>) {
    (0..n).partition(|&i| !is_outlier(i))
}

fn check_kept(kept: &[usize], p: usize) -> Result<()> {
    if kept.len() <= p {
        return Err(Error::TooManyOutliers { kept: kept.len(), p });
    }
    Ok(())
}

/// Cook's distances `D_i = ε̂_i² h_i / (p σ̂² (1 − h_i)²)`.
pub fn cooks_distances(data: &Dataset) -> Result<DVector<f64>> {
    let ff = full_fit(data)?;
    Ok(cooks_from(&ff, data.n(), data.p()))
}

fn cooks_from(ff: &FullFit, n: usize, p: usize) -> DVector<f64> {
    let sigma_sq = ff.rss / (n - p) as f64;
    DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let h = ff.leverage[i];
            ff.resid[i].powi(2) * h / (p as f64 * sigma_sq * (1.0 - h).powi(2))
        }),
    )
}

/// Cook's-distance detection: observation `i` is an outlier when
/// `D_i ≥ λ/n`.
pub fn detect_cooks(data: &Dataset, lambda: f64) -> Result<DetectionResult> {
    DetectionConfig::cooks(lambda)?;
    let (n, p) = (data.n(), data.p());
    let ff = full_fit(data)?;
    let scores = cooks_from(&ff, n, p);
    let (kept, outliers) = split(n, |i| scores[i] >= lambda / n as f64);
    check_kept(&kept, p)?;

    let is_out = outlier_mask(n, &outliers);
    let constraints = (0..n)
        .map(|i| {
            let s = if is_out[i] { -1.0 } else { 1.0 };
            let h = ff.leverage[i];
            QuadraticConstraint::new(
                vec![
                    QuadTerm::ProjectedNorm {
                        coef: s * lambda * p as f64 / n as f64 * (1.0 - h).powi(2),
                        projector: ff.projector.clone(),
                    },
                    QuadTerm::ProjectedCoordinate {
                        coef: -s * (n - p) as f64 * h,
                        projector: ff.projector.clone(),
                        index: i,
                    },
                ],
                None,
                0.0,
            )
        })
        .collect();

    Ok(DetectionResult {
        method: DetectionMethod::Cooks,
        cutoff: lambda,
        kept,
        outliers,
        event: SelectionEvent::intersection(n, constraints),
        scores,
        signs: None,
    })
}

fn outlier_mask(n: usize, outliers: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in outliers {
        m[i] = true;
    }
    m
}

/// Conventional DFFITS threshold `2 √(p/n)`.
pub fn default_dffits_threshold(n: usize, p: usize) -> f64 {
    2.0 * (p as f64 / n as f64).sqrt()
}

/// Signed DFFITS values `ε̂_i √h_i / (s_(i) (1 − h_i))`.
pub fn dffits_values(data: &Dataset) -> Result<DVector<f64>> {
    let ff = full_fit(data)?;
    dffits_from(&ff, data.n(), data.p())
}

fn dffits_from(ff: &FullFit, n: usize, p: usize) -> Result<DVector<f64>> {
    if n < p + 2 {
        return Err(Error::InvalidInput("DFFITS needs n − p − 1 ≥ 1".into()));
    }
    let mut out = DVector::zeros(n);
    for i in 0..n {
        let h = ff.leverage[i];
        let e = ff.resid[i];
        let s2 = (ff.rss - e * e / (1.0 - h)) / (n - p - 1) as f64;
        if !(s2 > 0.0) {
            return Err(Error::Numerical(format!(
                "leave-one-out variance for observation {} is not positive",
                i + 1
            )));
        }
        out[i] = e * h.sqrt() / (s2.sqrt() * (1.0 - h));
    }
    Ok(out)
}

/// DFFITS detection: observation `i` is an outlier when
/// `|DFFITS_i| ≥ threshold`.
pub fn detect_dffits(data: &Dataset, threshold: f64) -> Result<DetectionResult> {
    DetectionConfig::new(DetectionMethod::Dffits, threshold)?;
    let (n, p) = (data.n(), data.p());
    let ff = full_fit(data)?;
    let values = dffits_from(&ff, n, p)?;
    let c2 = threshold * threshold;
    let (kept, outliers) = split(n, |i| values[i] * values[i] >= c2);
    check_kept(&kept, p)?;

    // DFFITS_i² < c² ⇔ c²(1−h)²‖P⊥y‖² − [c²(1−h) + h(n−p−1)] (P⊥y)_i² > 0
    let is_out = outlier_mask(n, &outliers);
    let constraints = (0..n)
        .map(|i| {
            let s = if is_out[i] { -1.0 } else { 1.0 };
            let h = ff.leverage[i];
            QuadraticConstraint::new(
                vec![
                    QuadTerm::ProjectedNorm {
                        coef: s * c2 * (1.0 - h).powi(2),
                        projector: ff.projector.clone(),
                    },
                    QuadTerm::ProjectedCoordinate {
                        coef: -s * (c2 * (1.0 - h) + h * (n - p - 1) as f64),
                        projector: ff.projector.clone(),
                        index: i,
                    },
                ],
                None,
                0.0,
            )
        })
        .collect();

    Ok(DetectionResult {
        method: DetectionMethod::Dffits,
        cutoff: threshold,
        kept,
        outliers,
        event: SelectionEvent::intersection(n, constraints),
        scores: values.map(f64::abs),
        signs: None,
    })
}

/// Minimizer of `(1/2n)‖y − Xβ − u‖² + λ‖u‖₁`.
#[derive(Debug, Clone)]
pub struct SoftIpodFit {
    pub beta: DVector<f64>,
    pub u: DVector<f64>,
    pub iterations: usize,
    /// Largest violation of the optimality conditions, on the `1/n` scale.
    pub kkt_residual: f64,
}

pub const SOFT_IPOD_TOL: f64 = 1e-10;
pub const SOFT_IPOD_MAX_ITER: usize = 100_000;
const POLISH_EVERY: usize = 25;

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// `Π w = w − Q Qᵀ w` for the residual maker `Π`.
fn residual_apply(q: &DMatrix<f64>, w: &DVector<f64>) -> DVector<f64> {
    w - q * q.tr_mul(w)
}

fn kkt_residual(q: &DMatrix<f64>, y: &DVector<f64>, u: &DVector<f64>, lambda: f64) -> f64 {
    let n = y.len() as f64;
    let g = residual_apply(q, &(y - u)) / n;
    g.iter()
        .zip(u.iter())
        .map(|(&gi, &ui)| {
            if ui != 0.0 {
                (gi - lambda * ui.signum()).abs()
            } else {
                (gi.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// `Π_AA` for the residual maker, from the orthonormal basis `Q`.
fn pi_block(q: &DMatrix<f64>, a: &[usize]) -> DMatrix<f64> {
    let k = a.len();
    DMatrix::from_fn(k, k, |r, c| {
        let dot = q.row(a[r]).dot(&q.row(a[c]));
        if r == c {
            1.0 - dot
        } else {
            -dot
        }
    })
}

/// Solve the optimality conditions exactly on the current support and signs.
fn polish(q: &DMatrix<f64>, y: &DVector<f64>, u: &DVector<f64>, lambda: f64) -> Option<DVector<f64>> {
    let n = y.len();
    let nl = n as f64 * lambda;
    let active: Vec<usize> = (0..n).filter(|&i| u[i] != 0.0).collect();
    let mut out = DVector::zeros(n);
    if !active.is_empty() {
        let chol = pi_block(q, &active).cholesky()?;
        let piy = residual_apply(q, y);
        let rhs = DVector::from_iterator(active.len(), active.iter().map(|&i| piy[i] - nl * u[i].signum()));
        let ua = chol.solve(&rhs);
        for (k, &i) in active.iter().enumerate() {
            if ua[k] * u[i].signum() <= 0.0 {
                return None;
            }
            out[i] = ua[k];
        }
    }
    Some(out)
}

/// Solve soft-IPOD by alternating an OLS step for `β` with a
/// soft-thresholding step for `u`, polishing on the active set.
pub fn solve_soft_ipod(data: &Dataset, lambda: f64) -> Result<SoftIpodFit> {
    DetectionConfig::new(DetectionMethod::Softipod, lambda)?;
    let n = data.n();
    let y = data.y();
    let qr = PivotedQr::new(data.x());
    let q = qr.q().clone();
    let nl = n as f64 * lambda;

    let mut u = DVector::<f64>::zeros(n);
    let mut iterations = 0;
    let finish = |u: DVector<f64>, iterations: usize| {
        let beta = qr.solve(&(y - &u));
        let kkt = kkt_residual(&q, y, &u, lambda);
        SoftIpodFit { beta, u, iterations, kkt_residual: kkt }
    };

    while iterations < SOFT_IPOD_MAX_ITER {
        iterations += 1;
        // y − Xβ with β the OLS fit to y − u
        let r = residual_apply(&q, &(y - &u)) + &u;
        let next = r.map(|ri| soft_threshold(ri, nl));
        let change = (&next - &u).amax();
        u = next;
        if change <= SOFT_IPOD_TOL {
            let fit = finish(u.clone(), iterations);
            if fit.kkt_residual <= 1e-8 {
                return Ok(fit);
            }
        }
        if iterations % POLISH_EVERY == 0 {
            if let Some(exact) = polish(&q, y, &u, lambda) {
                if kkt_residual(&q, y, &exact, lambda) <= 1e-12 * (1.0 + lambda) {
                    return Ok(finish(exact, iterations));
                }
            }
        }
    }
    Err(Error::NoConvergence {
        what: "soft-IPOD",
        iterations,
    })
}

/// Objective `(1/2n)‖y − Xβ − u‖² + λ‖u‖₁`.
pub fn soft_ipod_objective(data: &Dataset, lambda: f64, beta: &DVector<f64>, u: &DVector<f64>) -> f64 {
    let r = data.y() - data.x() * beta - u;
    r.norm_squared() / (2.0 * data.n() as f64) + lambda * u.iter().map(|v| v.abs()).sum::<f64>()
}

/// Affine event `{y : soft-IPOD at y has the observed support and signs}`.
///
/// With `Π = P_X^⊥`, `A` the support and `s` the signs, the active
/// coordinates solve `Π_AA u_A = Π_A· y − nλ s_A`. The event requires
/// `s_i u_i(y) ≥ 0` on `A` and `|Π_j· y − Π_jA u_A(y)| ≤ nλ` off it.
pub fn soft_ipod_event(data: &Dataset, lambda: f64, fit: &SoftIpodFit) -> Result<DetectionResult> {
    DetectionConfig::new(DetectionMethod::Softipod, lambda)?;
    let (n, p) = (data.n(), data.p());
    let nl = n as f64 * lambda;
    if fit.u.len() != n {
        return Err(Error::InvalidInput("soft-IPOD solution has the wrong length".into()));
    }
    let q = PivotedQr::new(data.x()).q().clone();
    let active: Vec<usize> = (0..n).filter(|&i| fit.u[i] != 0.0).collect();
    let (kept, outliers) = split(n, |i| fit.u[i] != 0.0);
    check_kept(&kept, p)?;

    let signs_a: Vec<f64> = active.iter().map(|&i| fit.u[i].signum()).collect();
    let pi = DMatrix::<f64>::identity(n, n) - &q * q.transpose();

    // u_A(y) = G y + o
    let (g, o) = if active.is_empty() {
        (DMatrix::zeros(0, n), DVector::zeros(0))
    } else {
        let chol = pi_block(&q, &active).cholesky().ok_or_else(|| {
            Error::DegenerateEvent("columns of the residual maker on the support are linearly dependent".into())
        })?;
        let pi_a = DMatrix::from_fn(active.len(), n, |r, c| pi[(active[r], c)]);
        let g = chol.solve(&pi_a);
        let s = DVector::from_vec(signs_a.clone());
        let o = chol.solve(&s) * (-nl);
        (g, o)
    };

    let y = data.y();
    let mut constraints = Vec::with_capacity(2 * n);
    for (k, &i) in active.iter().enumerate() {
        let s = signs_a[k];
        let row = g.row(k).transpose() * s;
        if s * (row.dot(y) * s + o[k]) <= 0.0 {
            return Err(Error::DegenerateEvent(format!(
                "active coordinate {} has the wrong sign at the observed response",
                i + 1
            )));
        }
        constraints.push(QuadraticConstraint::affine(row, s * o[k]));
    }

    let pi_ja = DMatrix::from_fn(n, active.len(), |r, c| pi[(r, active[c])]);
    let coef = &pi - &pi_ja * &g;
    let offset = -(&pi_ja * &o);
    for j in 0..n {
        if fit.u[j] != 0.0 {
            continue;
        }
        let c = coef.row(j).transpose();
        let w = c.dot(y) + offset[j];
        if w.abs() >= nl * (1.0 - 1e-12) {
            return Err(Error::DegenerateEvent(format!(
                "subgradient of coordinate {} is at ±1",
                j + 1
            )));
        }
        constraints.push(QuadraticConstraint::affine(-&c, nl - offset[j]));
        constraints.push(QuadraticConstraint::affine(c, nl + offset[j]));
    }

    let signs = (0..n).map(|i| fit.u[i].signum() as i8 * (fit.u[i] != 0.0) as i8).collect();
    Ok(DetectionResult {
        method: DetectionMethod::Softipod,
        cutoff: lambda,
        kept,
        outliers,
        event: SelectionEvent::intersection(n, constraints),
        scores: fit.u.map(f64::abs),
        signs: Some(signs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::model::fit_ols;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_data(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { rng.sample(StandardNormal) });
        let mut y = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        y[0] += 6.0;
        y[1] -= 5.0;
        let names = (0..p).map(|j| format!("x{j}")).collect();
        Dataset::new(y, x, names, true).unwrap()
    }

    #[test]
    fn stackloss_cooks_outliers() {
        let data = datasets::stackloss();
        let expect: [(f64, &[usize]); 4] = [
            (4.0, &[21]),
            (3.0, &[1, 21]),
            (2.0, &[1, 3, 4, 21]),
            (1.0, &[1, 2, 3, 4, 7, 12, 17, 21]),
        ];
        for (lambda, out) in expect {
            let det = detect_cooks(&data, lambda).unwrap();
            assert_eq!(det.outliers_one_based(), out, "lambda {lambda}");
            assert!(det.event.contains(data.y()));
        }
    }

    #[test]
    fn huge_cutoff_flags_nothing() {
        let data = datasets::hills();
        let det = detect_cooks(&data, 1e9).unwrap();
        assert!(det.outliers.is_empty());
        assert!(det.event.contains(data.y()));
        let det = detect_dffits(&data, 1e9).unwrap();
        assert!(det.outliers.is_empty());
    }

    #[test]
    fn cooks_monotone_in_cutoff() {
        let data = datasets::hills();
        let mut prev: Option<Vec<usize>> = None;
        for &lambda in &[0.5, 1.0, 2.0, 3.0, 4.0, 8.0] {
            let out = detect_cooks(&data, lambda).unwrap().outliers;
            if let Some(p) = prev {
                assert!(out.iter().all(|i| p.contains(i)));
            }
            prev = Some(out);
        }
    }

    /// Cook's distance recomputed from an independent OLS fit.
    fn brute_cooks_outliers(data: &Dataset, lambda: f64) -> Vec<usize> {
        let (n, p) = (data.n(), data.p());
        let xt = data.x().transpose();
        let xtx_inv = (&xt * data.x()).try_inverse().unwrap();
        let beta = &xtx_inv * (&xt * data.y());
        let e = data.y() - data.x() * &beta;
        let s2 = e.norm_squared() / (n - p) as f64;
        (0..n)
            .filter(|&i| {
                let xi = data.x().row(i).transpose();
                let h = (xi.transpose() * &xtx_inv * &xi)[(0, 0)];
                let d = e[i] * e[i] / (p as f64 * s2) * h / (1.0 - h).powi(2);
                d >= lambda / n as f64
            })
            .collect()
    }

    #[test]
    fn cooks_event_matches_recomputation() {
        let data = random_data(30, 3, 11);
        let lambda = 2.0;
        let det = detect_cooks(&data, lambda).unwrap();
        assert_eq!(det.outliers, brute_cooks_outliers(&data, lambda));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut inside = 0;
        for _ in 0..1000 {
            let scale = rng.random_range(0.05..1.0);
            let noise = DVector::from_fn(30, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
            let y2 = data.y() + noise;
            let d2 = data.with_response(y2.clone()).unwrap();
            let same = brute_cooks_outliers(&d2, lambda) == det.outliers;
            assert_eq!(det.event.contains(&y2), same);
            inside += same as usize;
        }
        assert!(inside > 50 && inside < 1000, "oracle should see both outcomes, got {inside}");
    }

    #[test]
    fn dffits_matches_leave_one_out() {
        let data = random_data(50, 3, 3);
        let threshold = default_dffits_threshold(50, 3);
        let det = detect_dffits(&data, threshold).unwrap();
        assert!(det.event.contains(data.y()));
        // refit without row i and compare fitted values at x_i
        let full = fit_ols(&data, &data.all_rows()).unwrap();
        for i in 0..50 {
            let rows: Vec<usize> = (0..50).filter(|&r| r != i).collect();
            let loo = fit_ols(&data, &rows).unwrap();
            let xi = data.x().row(i);
            let diff = (xi * full.coefficients())[(0, 0)] - (xi * loo.coefficients())[(0, 0)];
            let xtx_inv = (data.x().transpose() * data.x()).try_inverse().unwrap();
            let h = (xi * &xtx_inv * xi.transpose())[(0, 0)];
            let value = diff / (loo.sigma_refit() * h.sqrt());
            assert!((value.abs() - det.scores[i]).abs() < 1e-9 * (1.0 + value.abs()));
            assert_eq!(value.abs() >= threshold, det.outliers.contains(&i));
        }
    }

    #[test]
    fn soft_ipod_large_penalty_is_ols() {
        let data = random_data(40, 3, 8);
        let fit = solve_soft_ipod(&data, 100.0).unwrap();
        assert!(fit.u.iter().all(|&v| v == 0.0));
        let ols = fit_ols(&data, &data.all_rows()).unwrap();
        assert!((&fit.beta - ols.coefficients()).amax() < 1e-12);
    }

    #[test]
    fn soft_ipod_intercept_only_matches_huber_location() {
        let y = DVector::from_vec(vec![0.3, -1.2, 5.0, 0.8, -0.1]);
        let data = Dataset::new(y.clone(), DMatrix::from_element(5, 1, 1.0), vec!["(Intercept)".into()], true).unwrap();
        let lambda = 0.2;
        let k = 5.0 * lambda;
        // location solves Σ clip(y_i − b, −k, k) = 0
        let psi = |b: f64| y.iter().map(|v| (v - b).clamp(-k, k)).sum::<f64>();
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if psi(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let b = 0.5 * (lo + hi);
        let fit = solve_soft_ipod(&data, lambda).unwrap();
        assert!((fit.beta[0] - b).abs() < 1e-9);
        for i in 0..5 {
            assert!((fit.u[i] - soft_threshold(y[i] - b, k)).abs() < 1e-9);
        }
        let det = soft_ipod_event(&data, lambda, &fit).unwrap();
        assert!(det.event.contains(&y));
        let expect: Vec<usize> = (0..5).filter(|&i| (y[i] - b).abs() > k).collect();
        assert_eq!(det.outliers, expect);
    }

    #[test]
    fn soft_ipod_intercept_only_event_is_a_box_without_outliers() {
        let y = DVector::from_vec(vec![0.3, -1.2, 0.9, 0.8, -0.1]);
        let data = Dataset::new(y.clone(), DMatrix::from_element(5, 1, 1.0), vec!["(Intercept)".into()], true).unwrap();
        let lambda = 0.5;
        let fit = solve_soft_ipod(&data, lambda).unwrap();
        let det = soft_ipod_event(&data, lambda, &fit).unwrap();
        assert!(det.outliers.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let y2 = DVector::from_fn(5, |_, _| 2.0 * rng.sample::<f64, _>(StandardNormal));
            let mean = y2.mean();
            let boxed = y2.iter().all(|v| (v - mean).abs() <= 5.0 * lambda);
            assert_eq!(det.event.contains(&y2), boxed);
        }
    }

    #[test]
    fn soft_ipod_objective_beats_simple_points() {
        let data = random_data(40, 3, 21);
        let lambda = 0.05;
        let fit = solve_soft_ipod(&data, lambda).unwrap();
        assert!(fit.kkt_residual <= 1e-8);
        let obj = soft_ipod_objective(&data, lambda, &fit.beta, &fit.u);
        let ols = fit_ols(&data, &data.all_rows()).unwrap();
        let zero = DVector::zeros(40);
        assert!(obj <= soft_ipod_objective(&data, lambda, ols.coefficients(), &zero) + 1e-12);
        assert!(obj <= soft_ipod_objective(&data, lambda, &DVector::zeros(3), &zero) + 1e-12);
    }
}
