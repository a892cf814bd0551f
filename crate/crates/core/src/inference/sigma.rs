use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Dataset;

pub const CD_TOL: f64 = 1e-9;
pub const CD_MAX_SWEEPS: usize = 100_000;
pub const CV_FOLDS: usize = 10;
pub const GRID_LEN: usize = 100;
/// `λ_min / λ_max` for the penalty grid.
pub const GRID_RATIO: f64 = 1e-2;

fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Lasso problem `(1/2n)‖y − Xβ − u‖² + λ(Σ_j w_j|β_j| + w_u Σ|u_i|)`,
/// with the `u` block present only when `augment` is set. A zero weight
/// leaves a coefficient unpenalized.
#[derive(Debug, Clone)]
pub struct LassoProblem<'a> {
    pub x: &'a DMatrix<f64>,
    pub y: &'a DVector<f64>,
    pub weights: Vec<f64>,
    pub shift_weight: f64,
    pub augment: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub lambda: f64,
    pub beta: DVector<f64>,
    /// Empty unless the problem is augmented.
    pub u: DVector<f64>,
    pub sweeps: usize,
}

impl LassoFit {
    /// Free coefficients: unpenalized columns plus nonzero entries.
    pub fn support_size(&self, weights: &[f64]) -> usize {
        let b = self.beta.iter().zip(weights).filter(|(v, &w)| w == 0.0 || **v != 0.0).count();
        b + self.u.iter().filter(|v| **v != 0.0).count()
    }
}

impl<'a> LassoProblem<'a> {
    pub fn new(x: &'a DMatrix<f64>, y: &'a DVector<f64>, weights: Vec<f64>, augment: bool) -> Result<Self> {
        if x.nrows() != y.len() || weights.len() != x.ncols() {
            return Err(Error::InvalidInput("lasso dimensions disagree".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput("penalty weights must be finite and non-negative".into()));
        }
        Ok(LassoProblem { x, y, weights, shift_weight: 1.0, augment })
    }

    /// Augmented problem on a dataset with the intercept left unpenalized.
    pub fn augmented(data: &'a Dataset) -> Self {
        let weights = (0..data.p()).map(|j| if j == 0 && data.has_intercept() { 0.0 } else { 1.0 }).collect();
        LassoProblem { x: data.x(), y: data.y(), weights, shift_weight: 1.0, augment: true }
    }

    /// Weights equal to the column standard deviations, as if each column
    /// of `(X : I)` were scaled to unit variance before fitting.
    pub fn standardized(mut self) -> Self {
        let n = self.n() as f64;
        for (j, w) in self.weights.iter_mut().enumerate() {
            if *w > 0.0 {
                let col = self.x.column(j);
                let m = col.mean();
                *w = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
            }
        }
        self.shift_weight = ((1.0 / n) * (1.0 - 1.0 / n)).sqrt();
        self
    }

    fn n(&self) -> usize {
        self.y.len()
    }

    /// Response with unpenalized columns projected out by a few rounds of
    /// coordinate fits (exact when there is a single unpenalized column).
    fn null_residual(&self) -> DVector<f64> {
        let mut r = self.y.clone();
        for _ in 0..50 {
            let mut moved = 0.0f64;
            for (j, &w) in self.weights.iter().enumerate() {
                if w > 0.0 {
                    continue;
                }
                let col = self.x.column(j);
                let ss = col.norm_squared();
                if ss == 0.0 {
                    continue;
                }
                let c = col.dot(&r) / ss;
                r.axpy(-c, &col, 1.0);
                moved = moved.max(c.abs() * ss.sqrt());
            }
            if moved <= 1e-14 * (1.0 + self.y.norm()) {
                break;
            }
        }
        r
    }

    /// Smallest `λ` at which every penalized coefficient is zero.
    pub fn lambda_max(&self) -> f64 {
        let n = self.n() as f64;
        let r = self.null_residual();
        let mut m = 0.0f64;
        for (j, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                m = m.max(self.x.column(j).dot(&r).abs() / (n * w));
            }
        }
        if self.augment && self.shift_weight > 0.0 {
            m = m.max(r.amax() / (n * self.shift_weight));
        }
        m
    }

    pub fn zero_start(&self) -> LassoFit {
        LassoFit {
            lambda: f64::INFINITY,
            beta: DVector::zeros(self.x.ncols()),
            u: DVector::zeros(if self.augment { self.n() } else { 0 }),
            sweeps: 0,
        }
    }

    /// Coordinate descent from `start`.
    pub fn solve(&self, lambda: f64, start: &LassoFit) -> Result<LassoFit> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("penalty must be finite and non-negative, got {lambda}")));
        }
        let n = self.n() as f64;
        let x = self.x;
        let col_ss: Vec<f64> = (0..x.ncols()).map(|j| x.column(j).norm_squared()).collect();
        let mut beta = start.beta.clone();
        let mut u = start.u.clone();
        let mut r = self.y - x * &beta;
        if self.augment {
            r -= &u;
        }
        let scale = 1.0 + self.y.amax();
        let mut full = true;
        for sweep in 1..=CD_MAX_SWEEPS {
            let mut delta = 0.0f64;
            for j in 0..x.ncols() {
                if col_ss[j] == 0.0 || (!full && beta[j] == 0.0 && self.weights[j] > 0.0) {
                    continue;
                }
                let col = x.column(j);
                let rho = col.dot(&r) / n + col_ss[j] / n * beta[j];
                let t = lambda * self.weights[j];
                let new = soft(rho, t) / (col_ss[j] / n);
                let d = new - beta[j];
                if d != 0.0 {
                    r.axpy(-d, &col, 1.0);
                    beta[j] = new;
                    delta = delta.max(d.abs() * (col_ss[j] / n).sqrt());
                }
            }
            if self.augment {
                for i in 0..u.len() {
                    if !full && u[i] == 0.0 {
                        continue;
                    }
                    let new = soft(r[i] + u[i], n * lambda * self.shift_weight);
                    let d = new - u[i];
                    if d != 0.0 {
                        r[i] -= d;
                        u[i] = new;
                        delta = delta.max(d.abs() / n.sqrt());
                    }
                }
            }
            if delta <= CD_TOL * scale {
                if full {
                    return Ok(LassoFit { lambda, beta, u, sweeps: sweep });
                }
                full = true;
            } else {
                full = false;
            }
        }
        Err(Error::NoConvergence { what: "lasso coordinate descent", iterations: CD_MAX_SWEEPS })
    }

    /// Warm-started solutions along a decreasing penalty sequence.
    pub fn path(&self, lambdas: &[f64]) -> Result<Vec<LassoFit>> {
        let mut cur = self.zero_start();
        let mut out = Vec::with_capacity(lambdas.len());
        for &l in lambdas {
            cur = self.solve(l, &cur)?;
            out.push(cur.clone());
        }
        Ok(out)
    }
}

/// Geometric grid of `len` values from `lambda_max` down to `lambda_max·ratio`.
pub fn penalty_grid(lambda_max: f64, len: usize, ratio: f64) -> Vec<f64> {
    if len == 1 {
        return vec![lambda_max];
    }
    (0..len)
        .map(|k| lambda_max * ratio.powf(k as f64 / (len - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SigmaEstimate {
    pub sigma: f64,
    pub lambda: f64,
    /// `|S_AUG|`, including unpenalized columns.
    pub support: usize,
    pub cv_error: Option<f64>,
}

/// `σ̂` from the augmented lasso fit at a fixed penalty.
pub fn sigma_at_penalty(data: &Dataset, lambda: f64) -> Result<SigmaEstimate> {
    let prob = LassoProblem::augmented(data);
    let lmax = prob.lambda_max();
    let lambdas: Vec<f64> = if lambda >= lmax {
        vec![lambda]
    } else {
        let mut g: Vec<f64> = penalty_grid(lmax, GRID_LEN, GRID_RATIO).into_iter().filter(|&l| l > lambda).collect();
        g.push(lambda);
        g
    };
    let fit = prob.path(&lambdas)?.pop().expect("non-empty path");
    finish(data, &prob, &fit, None)
}

fn finish(data: &Dataset, prob: &LassoProblem, fit: &LassoFit, cv: Option<f64>) -> Result<SigmaEstimate> {
    let support = fit.support_size(&prob.weights);
    let n = data.n();
    if support >= n {
        return Err(Error::Numerical(format!("augmented lasso support is saturated ({support} of {n})")));
    }
    let resid = data.y() - data.x() * &fit.beta - &fit.u;
    Ok(SigmaEstimate {
        sigma: (resid.norm_squared() / (n - support) as f64).sqrt(),
        lambda: fit.lambda,
        support,
        cv_error: cv,
    })
}

/// Which cross-validated penalty to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CvRule {
    /// Minimum mean held-out error.
    Min,
    /// Largest penalty within one standard error of the minimum.
    OneSe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaOptions {
    pub rule: CvRule,
    /// Penalize as if every column of `(X : I)` had unit variance.
    pub standardize: bool,
    /// `λ_min / λ_max`.
    pub grid_ratio: f64,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        SigmaOptions { rule: CvRule::Min, standardize: false, grid_ratio: GRID_RATIO }
    }
}

fn problem<'a>(x: &'a DMatrix<f64>, y: &'a DVector<f64>, intercept: bool, opts: &SigmaOptions) -> LassoProblem<'a> {
    let weights = (0..x.ncols()).map(|j| if j == 0 && intercept { 0.0 } else { 1.0 }).collect();
    let prob = LassoProblem { x, y, weights, shift_weight: 1.0, augment: true };
    if opts.standardize {
        prob.standardized()
    } else {
        prob
    }
}

/// `σ̂_EST` with default options.
pub fn estimate_sigma_aug_lasso(data: &Dataset) -> Result<SigmaEstimate> {
    estimate_sigma_with(data, &SigmaOptions::default())
}

/// `σ̂_EST`: augmented lasso with the penalty picked by `CV_FOLDS`-fold
/// cross-validation (fold of row `i` is `i mod CV_FOLDS`) on held-out
/// prediction `x_iᵀβ̂`.
pub fn estimate_sigma_with(data: &Dataset, opts: &SigmaOptions) -> Result<SigmaEstimate> {
    let n = data.n();
    if n < 2 * CV_FOLDS {
        return Err(Error::InvalidInput(format!("need at least {} rows for cross-validation", 2 * CV_FOLDS)));
    }
    let intercept = data.has_intercept();
    let prob = problem(data.x(), data.y(), intercept, opts);
    let grid = penalty_grid(prob.lambda_max(), GRID_LEN, opts.grid_ratio);
    let mut fold_err = vec![vec![0.0; grid.len()]; CV_FOLDS];
    for (fold, errs) in fold_err.iter_mut().enumerate() {
        let train: Vec<usize> = (0..n).filter(|i| i % CV_FOLDS != fold).collect();
        let test: Vec<usize> = (0..n).filter(|i| i % CV_FOLDS == fold).collect();
        let xt = data.x().select_rows(&train);
        let yt = data.y().select_rows(&train);
        let sub = problem(&xt, &yt, intercept, opts);
        for (k, fit) in sub.path(&grid)?.iter().enumerate() {
            let sse: f64 = test
                .iter()
                .map(|&i| (data.y()[i] - data.x().row(i).dot(&fit.beta.transpose())).powi(2))
                .sum();
            errs[k] = sse / test.len() as f64;
        }
    }
    let k = CV_FOLDS as f64;
    let stats: Vec<(f64, f64)> = (0..grid.len())
        .map(|g| {
            let m = fold_err.iter().map(|e| e[g]).sum::<f64>() / k;
            let v = fold_err.iter().map(|e| (e[g] - m).powi(2)).sum::<f64>() / (k - 1.0);
            (m, (v / k).sqrt())
        })
        .collect();
    let min = (0..grid.len()).fold(0, |b, g| if stats[g].0 < stats[b].0 { g } else { b });
    let best = match opts.rule {
        CvRule::Min => min,
        CvRule::OneSe => {
            let bound = stats[min].0 + stats[min].1;
            (0..=min).find(|&g| stats[g].0 <= bound).unwrap_or(min)
        }
    };
    let fit = prob.path(&grid[..=best])?.pop().expect("non-empty path");
    finish(data, &prob, &fit, Some(stats[best].0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::stackloss;

    #[test]
    fn penalty_at_max_leaves_intercept_only() {
        let data = stackloss();
        let prob = LassoProblem::augmented(&data);
        let est = sigma_at_penalty(&data, prob.lambda_max()).unwrap();
        assert_eq!(est.support, 1);
        let y = data.y();
        let mean = y.mean();
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (y.len() - 1) as f64;
        assert!((est.sigma * est.sigma - var).abs() < 1e-9 * var);
    }

    #[test]
    fn orthogonal_design_matches_soft_threshold() {
        // Columns with ‖x_j‖² = n, so each coefficient is S(x_jᵀy/n, λ).
        let n = 8;
        let mut x = DMatrix::zeros(n, 3);
        for i in 0..n {
            x[(i, 0)] = 1.0;
            x[(i, 1)] = if i % 2 == 0 { 1.0 } else { -1.0 };
            x[(i, 2)] = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 };
        }
        let y = DVector::from_vec(vec![3.0, -1.0, 2.5, 0.5, 1.0, -2.0, 4.0, 0.0]);
        let prob = LassoProblem::new(&x, &y, vec![0.0, 1.0, 1.0], false).unwrap();
        let lambda = 0.4;
        let fit = prob.solve(lambda, &prob.zero_start()).unwrap();
        for j in 0..3 {
            let c = x.column(j).dot(&y) / n as f64;
            let expect = if j == 0 { c } else { soft(c, lambda) };
            assert!((fit.beta[j] - expect).abs() < 1e-9, "{j}: {} vs {expect}", fit.beta[j]);
        }
    }

    #[test]
    fn kkt_holds_on_augmented_fit() {
        let data = stackloss();
        let prob = LassoProblem::augmented(&data);
        let lambda = 0.2 * prob.lambda_max();
        let fit = prob.solve(lambda, &prob.zero_start()).unwrap();
        let n = data.n() as f64;
        let r = data.y() - data.x() * &fit.beta - &fit.u;
        for j in 0..data.p() {
            let g = data.x().column(j).dot(&r) / n;
            if prob.weights[j] == 0.0 {
                assert!(g.abs() < 1e-6);
            } else if fit.beta[j] != 0.0 {
                assert!((g - lambda * fit.beta[j].signum()).abs() < 1e-6);
            } else {
                assert!(g.abs() <= lambda + 1e-6);
            }
        }
        for i in 0..data.n() {
            let g = r[i] / n;
            if fit.u[i] != 0.0 {
                assert!((g - lambda * fit.u[i].signum()).abs() < 1e-6);
            } else {
                assert!(g.abs() <= lambda + 1e-6);
            }
        }
    }

    #[test]
    fn cv_estimate_is_positive() {
        let est = estimate_sigma_aug_lasso(&stackloss()).unwrap();
        assert!(est.sigma > 0.0 && est.sigma.is_finite());
        assert!(est.support < 21);
    }
}
