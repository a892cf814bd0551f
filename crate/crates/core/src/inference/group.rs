use nalgebra::DVector;
use serde::Serialize;

use super::ztest::check_contains;
use crate::error::{Error, Result};
use crate::geometry::{IntervalSet, SelectionEvent};
use crate::linalg::{orthonormal_basis, pad_rows, select_columns, select_rows, PivotedQr, Projector};
use crate::model::{Dataset, OlsFit};
use crate::special::{ChiSquared, ContinuousDist};
use crate::truncated::{Family, TruncatedDistribution};

/// Validated, sorted column group.
pub(crate) fn check_group(g: &[usize], p: usize) -> Result<Vec<usize>> {
    let mut g = g.to_vec();
    g.sort_unstable();
    g.dedup();
    if g.is_empty() {
        return Err(Error::InvalidInput("column group is empty".into()));
    }
    if g.iter().any(|&j| j >= p) {
        return Err(Error::InvalidInput("column group index out of range".into()));
    }
    Ok(g)
}

pub(crate) fn complement(g: &[usize], p: usize) -> Vec<usize> {
    (0..p).filter(|j| !g.contains(j)).collect()
}

/// Decomposition `y = z + σ𝒳 w` with `σ𝒳 = ‖P̌y‖`, where `P̌` projects
/// onto the part of `X_{M,g}` orthogonal to `X_{M,gᶜ}`, padded to `R^n`.
#[derive(Debug, Clone)]
pub struct GroupTestSpec {
    pub group: Vec<usize>,
    pub projection: Projector,
    pub statistic: f64,
    pub direction: DVector<f64>,
    pub residual: DVector<f64>,
    pub sigma: f64,
}

pub fn group_test_spec(fit: &OlsFit, data: &Dataset, g: &[usize], sigma: f64) -> Result<GroupTestSpec> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("σ must be positive and finite, got {sigma}")));
    }
    let p = data.p();
    let group = check_group(g, p)?;
    let rows = fit.subset();
    let xm = select_rows(data.x(), rows);
    let others = orthonormal_basis(&select_columns(&xm, &complement(&group, p)))?;
    let xg = select_columns(&xm, &group);
    let x_tilde = &xg - &others * others.tr_mul(&xg);
    let qr = PivotedQr::new(&x_tilde);
    if !qr.is_full_rank() {
        return Err(Error::RankDeficient { rank: qr.rank(), expected: group.len() });
    }
    let projection = Projector::from_orthonormal(pad_rows(qr.q(), rows, data.n()), false);
    let y = data.y();
    let py = projection.apply(y);
    let norm = py.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateEvent("projected response is zero".into()));
    }
    Ok(GroupTestSpec {
        group,
        statistic: norm / sigma,
        direction: &py / norm,
        residual: y - &py,
        projection,
        sigma,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Chi2Test {
    /// `𝒳²`
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub naive_p: f64,
    /// Truncation set on the `𝒳²` scale.
    pub truncation: IntervalSet,
}

/// Known-σ test of `β^M_g = 0` from the truncated χ² law of `𝒳²`.
pub fn group_chi2_test(fit: &OlsFit, data: &Dataset, g: &[usize], event: &SelectionEvent, sigma: f64) -> Result<Chi2Test> {
    let spec = group_test_spec(fit, data, g, sigma)?;
    let t_set = event.slice_on_line(&spec.residual, &spec.direction)?;
    let chi = t_set.intersect(&IntervalSet::nonnegative()).scale(1.0 / sigma);
    check_contains(&chi, spec.statistic)?;
    let truncation = chi.map_increasing(|x| x * x);
    let df = spec.group.len();
    let stat = spec.statistic * spec.statistic;
    let dist = TruncatedDistribution::new(Family::Chi2 { df: df as f64 }, &truncation)?;
    Ok(Chi2Test {
        statistic: stat,
        df,
        p_value: dist.sf(stat),
        naive_p: ChiSquared { df: df as f64 }.sf(stat),
        truncation,
    })
}
