//! Datasets and ordinary least squares on row subsets.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, PivotedQr, Projector, RANK_TOL};

pub const INTERCEPT_NAME: &str = "(Intercept)";

/// Response vector plus a full-column-rank design matrix.
#[derive(Debug, Clone)]
pub struct Dataset {
    y: DVector<f64>,
    x: DMatrix<f64>,
    column_names: Vec<String>,
    intercept: bool,
}

/// A rectangular table of string cells with a header row, as read from CSV.
#[derive(Debug, Clone, Default)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Dataset {
    /// Build from numeric parts. When `intercept` is set the first column of
    /// `x` is expected to be the all-ones column.
    pub fn new(
        y: DVector<f64>,
        x: DMatrix<f64>,
        column_names: Vec<String>,
        intercept: bool,
    ) -> Result<Self> {
        let (n, p) = x.shape();
        if y.len() != n {
            return Err(Error::InvalidInput(format!(
                "response has {} entries but design has {n} rows",
                y.len()
            )));
        }
        if column_names.len() != p {
            return Err(Error::InvalidInput(format!(
                "{} column names for {p} columns",
                column_names.len()
            )));
        }
        if p == 0 {
            return Err(Error::InvalidInput("design has no columns".into()));
        }
        if n <= p {
            return Err(Error::InvalidInput(format!(
                "need more observations than columns (n = {n}, p = {p})"
            )));
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in data".into()));
        }
        let rank = numerical_rank(&x);
        if rank < p {
            return Err(Error::RankDeficient { rank, expected: p });
        }
        Ok(Dataset {
            y,
            x,
            column_names,
            intercept,
        })
    }

    /// Same design, different response.
    pub fn with_response(&self, y: DVector<f64>) -> Result<Self> {
        if y.len() != self.n() {
            return Err(Error::InvalidInput("response length mismatch".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in response".into()));
        }
        Ok(Dataset {
            y,
            ..self.clone()
        })
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn all_rows(&self) -> Vec<usize> {
        (0..self.n()).collect()
    }
}

/// Rank at tolerance `RANK_TOL` relative to the largest singular value.
pub fn numerical_rank(x: &DMatrix<f64>) -> usize {
    let sv = x.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

/// Turn a string table into a dataset: every column other than the response
/// becomes a covariate, with an all-ones column prepended when `intercept`.
pub fn validate_dataset(raw: &RawTable, response: &str, intercept: bool) -> Result<Dataset> {
    let width = raw.headers.len();
    let resp_col = raw
        .headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| Error::InvalidInput(format!("response column `{response}` not found")))?;
    let n = raw.rows.len();
    let mut values = vec![vec![0.0; n]; width];
    for (i, row) in raw.rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::InvalidInput(format!(
                "row {} has {} cells, expected {width}",
                i + 1,
                row.len()
            )));
        }
        for (j, cell) in row.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::InvalidInput(format!(
                    "non-numeric cell `{cell}` in column `{}` row {}",
                    raw.headers[j],
                    i + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite cell in column `{}` row {}",
                    raw.headers[j],
                    i + 1
                )));
            }
            values[j][i] = v;
        }
    }

    let covariates: Vec<usize> = (0..width).filter(|&j| j != resp_col).collect();
    let p = covariates.len() + usize::from(intercept);
    let mut names = Vec::with_capacity(p);
    let mut x = DMatrix::zeros(n, p);
    let mut col = 0;
    if intercept {
        x.column_mut(0).fill(1.0);
        names.push(INTERCEPT_NAME.to_string());
        col = 1;
    }
    for &j in &covariates {
        for i in 0..n {
            x[(i, col)] = values[j][i];
        }
        names.push(raw.headers[j].clone());
        col += 1;
    }
    let y = DVector::from_vec(values[resp_col].clone());
    Dataset::new(y, x, names, intercept)
}

/// OLS fit on the rows in `subset`.
#[derive(Debug, Clone)]
pub struct OlsFit {
    subset: Vec<usize>,
    coefficients: DVector<f64>,
    residuals: DVector<f64>,
    hat_diag: DVector<f64>,
    rss: f64,
    adjusted_r2: f64,
    basis: DMatrix<f64>,
    pseudo_inverse: DMatrix<f64>,
    n: usize,
    p: usize,
}

impl OlsFit {
    /// Retained row indices (0-based, ascending).
    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn kept(&self) -> usize {
        self.subset.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    /// Residuals on the fitted rows, in subset order.
    pub fn residuals(&self) -> &DVector<f64> {
        &self.residuals
    }

    /// Leverages on the fitted rows, in subset order.
    pub fn hat_diag(&self) -> &DVector<f64> {
        &self.hat_diag
    }

    pub fn rss(&self) -> f64 {
        self.rss
    }

    /// Residual degrees of freedom `|M| − p`.
    pub fn df_resid(&self) -> usize {
        self.subset.len() - self.p
    }

    /// `‖y_M − X_M β̂‖² / (|M| − p)`.
    pub fn sigma_sq(&self) -> f64 {
        self.rss / self.df_resid() as f64
    }

    pub fn sigma_refit(&self) -> f64 {
        self.sigma_sq().sqrt()
    }

    pub fn adjusted_r2(&self) -> f64 {
        self.adjusted_r2
    }

    /// Orthonormal basis of the column space of `X_M` (`|M| × p`).
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// `X_M⁺`, shape `p × |M|`.
    pub fn pseudo_inverse(&self) -> &DMatrix<f64> {
        &self.pseudo_inverse
    }

    /// Boolean membership mask of length `n`.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &i in &self.subset {
            m[i] = true;
        }
        m
    }
}

/// Fit OLS on the rows `subset` of `data`.
pub fn fit_ols(data: &Dataset, subset: &[usize]) -> Result<OlsFit> {
    let n = data.n();
    let p = data.p();
    let mut rows: Vec<usize> = subset.to_vec();
    rows.sort_unstable();
    rows.dedup();
    if rows.iter().any(|&i| i >= n) {
        return Err(Error::InvalidInput("subset index out of range".into()));
    }
    if rows.len() <= p {
        return Err(Error::TooManyOutliers {
            kept: rows.len(),
            p,
        });
    }
    let xm = linalg::select_rows(data.x(), &rows);
    let ym = linalg::select_entries(data.y(), &rows);
    let qr = PivotedQr::new(&xm);
    if !qr.is_full_rank() {
        return Err(Error::RankDeficient {
            rank: qr.rank(),
            expected: p,
        });
    }
    let coefficients = qr.solve(&ym);
    let basis = qr.q().clone();
    let fitted = &basis * basis.tr_mul(&ym);
    let residuals = &ym - fitted;
    let hat_diag = DVector::from_iterator(rows.len(), (0..rows.len()).map(|i| basis.row(i).norm_squared()));
    let rss = residuals.norm_squared();
    let m = rows.len() as f64;
    let tss = if data.has_intercept() {
        let mean = ym.mean();
        ym.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    } else {
        ym.norm_squared()
    };
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let denom_df = if data.has_intercept() { m - 1.0 } else { m };
    let adjusted_r2 = 1.0 - (1.0 - r2) * denom_df / (m - p as f64);
    let pseudo_inverse = qr.pseudo_inverse();
    Ok(OlsFit {
        subset: rows,
        coefficients,
        residuals,
        hat_diag,
        rss,
        adjusted_r2,
        basis,
        pseudo_inverse,
        n,
        p,
    })
}

/// Residual-maker `P_X^⊥` of the full design.
pub fn full_residual_projector(data: &Dataset) -> Result<Projector> {
    Projector::residual_maker(data.x())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;

    #[test]
    fn stackloss_full_fit() {
        let data = datasets::stackloss();
        assert_eq!((data.n(), data.p()), (21, 4));
        let fit = fit_ols(&data, &data.all_rows()).unwrap();
        let b = fit.coefficients();
        assert!((b[1] - 0.7156).abs() < 5e-5);
        assert!((b[2] - 1.2953).abs() < 5e-5);
        assert!((b[3] + 0.1521).abs() < 5e-5);
        assert!((fit.adjusted_r2() - 0.8983).abs() < 5e-5);
        let hsum: f64 = fit.hat_diag().sum();
        assert!((hsum - 4.0).abs() < 1e-10);
    }

    #[test]
    fn stackloss_drop_21() {
        let data = datasets::stackloss();
        let rows: Vec<usize> = (0..20).collect();
        let fit = fit_ols(&data, &rows).unwrap();
        assert!((fit.coefficients()[1] - 0.8891).abs() < 5e-5);
        assert!((fit.adjusted_r2() - 0.9392).abs() < 5e-5);
    }

    #[test]
    fn exact_linear_data() {
        let x = DMatrix::from_fn(6, 2, |i, j| if j == 0 { 1.0 } else { i as f64 * 0.7 - 1.0 });
        let y = &x * DVector::from_vec(vec![1.0, 1.0]);
        let data = Dataset::new(y, x, vec![INTERCEPT_NAME.into(), "a".into()], true).unwrap();
        let fit = fit_ols(&data, &data.all_rows()).unwrap();
        assert!((fit.coefficients()[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients()[1] - 1.0).abs() < 1e-12);
        assert!(fit.residuals().amax() < 1e-12);
        assert!((fit.adjusted_r2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_duplicated_columns() {
        let raw = RawTable {
            headers: vec!["a".into(), "b".into(), "y".into()],
            rows: (0..5)
                .map(|i| vec![format!("{i}"), format!("{i}"), format!("{}", i * i)])
                .collect(),
        };
        let err = validate_dataset(&raw, "y", false).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }));
    }

    #[test]
    fn rejects_non_numeric_and_small_n() {
        let raw = RawTable {
            headers: vec!["a".into(), "y".into()],
            rows: vec![vec!["1".into(), "x".into()], vec!["2".into(), "3".into()]],
        };
        assert!(matches!(
            validate_dataset(&raw, "y", true),
            Err(Error::InvalidInput(_))
        ));
        let raw = RawTable {
            headers: vec!["a".into(), "y".into()],
            rows: vec![vec!["1".into(), "1".into()], vec!["2".into(), "3".into()]],
        };
        assert!(validate_dataset(&raw, "y", true).is_err());
        assert!(validate_dataset(&raw, "nope", true).is_err());
    }

    #[test]
    fn too_small_subset() {
        let data = datasets::stackloss();
        assert!(matches!(
            fit_ols(&data, &[0, 1, 2, 3]),
            Err(Error::TooManyOutliers { kept: 4, p: 4 })
        ));
    }
}
