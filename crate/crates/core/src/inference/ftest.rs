use nalgebra::DVector;
use serde::Serialize;

use super::group::{check_group, complement};
use crate::error::{Error, Result};
use crate::geometry::{slice_event_on_f_curve, FCurve, IntervalSet, SelectionEvent};
use crate::linalg::{orthonormal_basis, pad, select_columns, select_entries, select_rows};
use crate::model::{Dataset, OlsFit};
use crate::special::{ContinuousDist, FDist};
use crate::truncated::{Family, TruncatedDistribution};

/// Nested-model F statistic for `β^M_g = 0` and the curve in `R^n` along
/// which only the statistic varies.
#[derive(Debug, Clone)]
pub struct FTestSpec {
    pub group: Vec<usize>,
    pub statistic: f64,
    /// Padded residual of `y_M` on `X_{M,gᶜ}`.
    pub r1: DVector<f64>,
    /// Padded residual of `y_M` on `X_M`.
    pub r2: DVector<f64>,
    pub curve: FCurve,
}

fn padded_residual(data: &Dataset, rows: &[usize], cols: &[usize]) -> Result<DVector<f64>> {
    let xm = select_columns(&select_rows(data.x(), rows), cols);
    let ym = select_entries(data.y(), rows);
    let q = orthonormal_basis(&xm)?;
    let r = &ym - &q * q.tr_mul(&ym);
    Ok(pad(&r, rows, data.n()))
}

pub fn f_test_spec(fit: &OlsFit, data: &Dataset, g: &[usize]) -> Result<FTestSpec> {
    let p = data.p();
    let group = check_group(g, p)?;
    let rows = fit.subset();
    let d1 = group.len() as f64;
    let d2 = (rows.len() - p) as f64;
    let r1 = padded_residual(data, rows, &complement(&group, p))?;
    let r2 = padded_residual(data, rows, &(0..p).collect::<Vec<_>>())?;
    let delta = &r1 - &r2;
    let (nd, n2) = (delta.norm(), r2.norm());
    if nd == 0.0 || n2 == 0.0 {
        return Err(Error::DegenerateEvent("F statistic is 0 or infinite".into()));
    }
    let statistic = (nd * nd / d1) / (n2 * n2 / d2);
    let curve = FCurve {
        z: data.y() - &r1,
        w_delta: &delta / nd,
        w2: &r2 / n2,
        radius: r1.norm(),
        d1,
        d2,
    };
    Ok(FTestSpec { group, statistic, r1, r2, curve })
}

#[derive(Debug, Clone, Serialize)]
pub struct FTest {
    pub statistic: f64,
    pub d1: usize,
    pub d2: usize,
    /// Truncated-F survival at the observed statistic.
    pub p_value: f64,
    /// `2 min(p, 1 − p)`
    pub p_two_sided: f64,
    pub naive_p: f64,
    /// Truncation set on the `F` scale.
    pub truncation: IntervalSet,
    /// Root pairs recovered by local refinement of the curve scan.
    pub refined_pairs: usize,
}

/// Unknown-σ test of `β^M_g = 0` from the truncated F law.
pub fn selective_f_test(fit: &OlsFit, data: &Dataset, g: &[usize], event: &SelectionEvent) -> Result<FTest> {
    let spec = f_test_spec(fit, data, g)?;
    let slice = slice_event_on_f_curve(event, &spec.curve, spec.statistic)?;
    let f = spec.statistic;
    if slice.set.distance(f) > 1e-6 * (1.0 + f) {
        return Err(Error::DegenerateEvent(format!(
            "observed F = {f} lies outside its truncation set {}",
            slice.set
        )));
    }
    let (d1, d2) = (spec.curve.d1, spec.curve.d2);
    let dist = TruncatedDistribution::new(Family::F { d1, d2 }, &slice.set)?;
    Ok(FTest {
        statistic: f,
        d1: d1 as usize,
        d2: d2 as usize,
        p_value: dist.sf(f),
        p_two_sided: (2.0 * dist.sf(f).min(dist.cdf(f))).min(1.0),
        naive_p: FDist { d1, d2 }.sf(f),
        truncation: slice.set,
        refined_pairs: slice.refined_pairs,
    })
}
