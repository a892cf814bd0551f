//! Normal, χ² and F distributions truncated to a finite union of intervals.
//!
//! Interval masses are accumulated in log space. A one-sided interval is
//! measured as a difference of tails taken on the far side of the center,
//! and an interval too narrow for that difference to keep its precision is
//! integrated directly with Gauss–Legendre quadrature.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::IntervalSet;
use crate::special::{ln_add_exp, ln_sub_exp, ln_sum_exp, ChiSquared, ContinuousDist, FDist, UnitNormal};

/// Mass ratio below which a tail difference is replaced by quadrature.
const NARROW_RATIO: f64 = 1e-4;
const GL_POINTS: usize = 20;

/// Largest `|μ − z|` explored when inverting the truncated normal CDF.
pub const MEAN_SEARCH_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Normal { mean: f64 },
    Chi2 { df: f64 },
    F { d1: f64, d2: f64 },
}

impl Family {
    fn with<R>(&self, f: impl FnOnce(&dyn ContinuousDist) -> R) -> R {
        match *self {
            Family::Normal { mean } => f(&UnitNormal { mean }),
            Family::Chi2 { df } => f(&ChiSquared { df }),
            Family::F { d1, d2 } => f(&FDist { d1, d2 }),
        }
    }
}

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        (nodes, weights)
    })
}

/// `ln ∫_lo^hi pdf` by Gauss–Legendre, anchored at the largest log-density.
fn quadrature_ln_mass(d: &dyn ContinuousDist, lo: f64, hi: f64) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let pts: Vec<f64> = nodes.iter().map(|t| d.ln_pdf(mid + half * t)).collect();
    let anchor = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if anchor == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = pts.iter().zip(weights).map(|(lp, w)| w * (lp - anchor).exp()).sum();
    anchor + (half * s).ln()
}

/// Mass between `near` and `far`, both on the same side of the center;
/// `upper` selects the survival side.
fn one_sided_ln_mass(d: &dyn ContinuousDist, near: f64, far: f64, upper: bool) -> f64 {
    let (a, b) = if upper {
        (d.ln_sf(near), d.ln_sf(far))
    } else {
        (d.ln_cdf(near), d.ln_cdf(far))
    };
    if a == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    // mass / tail(near) = 1 − exp(b − a)
    if b > a + (-NARROW_RATIO).ln_1p() && far.is_finite() {
        let (lo, hi) = if upper { (near, far) } else { (far, near) };
        return quadrature_ln_mass(d, lo, hi);
    }
    ln_sub_exp(a, b)
}

/// `ln P(lo ≤ X ≤ hi)` under `d`.
pub fn interval_ln_mass(d: &dyn ContinuousDist, lo: f64, hi: f64) -> f64 {
    let lo = lo.max(d.support_min());
    if !(hi > lo) {
        return f64::NEG_INFINITY;
    }
    let c = d.center();
    if lo >= c {
        one_sided_ln_mass(d, lo, hi, true)
    } else if hi <= c {
        one_sided_ln_mass(d, hi, lo, false)
    } else {
        ln_add_exp(one_sided_ln_mass(d, c, lo, false), one_sided_ln_mass(d, c, hi, true))
    }
}

/// `P(N(mean, 1) ∈ [lo, hi])` as `(mass, ln mass)`.
pub fn gaussian_interval_mass_stable(mean: f64, lo: f64, hi: f64) -> (f64, f64) {
    let ln_m = interval_ln_mass(&UnitNormal { mean }, lo, hi);
    (ln_m.exp(), ln_m)
}

/// A base distribution restricted to an interval set and renormalized.
#[derive(Debug, Clone)]
pub struct TruncatedDistribution {
    family: Family,
    support: IntervalSet,
    ln_total: f64,
    full: bool,
}

impl TruncatedDistribution {
    pub fn new(family: Family, support: &IntervalSet) -> Result<Self> {
        let support = match family {
            Family::Normal { .. } => support.clone(),
            _ => support.intersect(&IntervalSet::nonnegative()),
        };
        let full = support.is_real_line()
            || (support == IntervalSet::nonnegative() && !matches!(family, Family::Normal { .. }));
        if full {
            return Ok(TruncatedDistribution { family, support, ln_total: 0.0, full });
        }
        let ln_total = family.with(|d| {
            ln_sum_exp(support.intervals().iter().map(|iv| interval_ln_mass(d, iv.lo, iv.hi)))
        });
        if !(ln_total > f64::NEG_INFINITY) || ln_total.is_nan() {
            return Err(Error::ZeroMass);
        }
        Ok(TruncatedDistribution { family, support, ln_total, full })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn support(&self) -> &IntervalSet {
        &self.support
    }

    /// Log of the untruncated probability of the support.
    pub fn ln_total_mass(&self) -> f64 {
        self.ln_total
    }

    pub fn ln_cdf(&self, x: f64) -> f64 {
        if self.full {
            return self.family.with(|d| d.ln_cdf(x));
        }
        let num = self.family.with(|d| {
            ln_sum_exp(
                self.support
                    .intervals()
                    .iter()
                    .take_while(|iv| iv.lo <= x)
                    .map(|iv| interval_ln_mass(d, iv.lo, iv.hi.min(x))),
            )
        });
        (num - self.ln_total).min(0.0)
    }

    pub fn ln_sf(&self, x: f64) -> f64 {
        if self.full {
            return self.family.with(|d| d.ln_sf(x));
        }
        let num = self.family.with(|d| {
            ln_sum_exp(
                self.support
                    .intervals()
                    .iter()
                    .filter(|iv| iv.hi >= x)
                    .map(|iv| interval_ln_mass(d, iv.lo.max(x), iv.hi)),
            )
        });
        (num - self.ln_total).min(0.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if self.full {
            return self.family.with(|d| d.cdf(x));
        }
        self.ln_cdf(x).exp()
    }

    pub fn sf(&self, x: f64) -> f64 {
        if self.full {
            return self.family.with(|d| d.sf(x));
        }
        self.ln_sf(x).exp()
    }
}

pub fn tn_cdf(support: &IntervalSet, mean: f64, x: f64) -> Result<f64> {
    Ok(TruncatedDistribution::new(Family::Normal { mean }, support)?.cdf(x))
}

pub fn tchi2_cdf(support: &IntervalSet, df: f64, x: f64) -> Result<f64> {
    Ok(TruncatedDistribution::new(Family::Chi2 { df }, support)?.cdf(x))
}

pub fn tf_cdf(support: &IntervalSet, d1: f64, d2: f64, x: f64) -> Result<f64> {
    Ok(TruncatedDistribution::new(Family::F { d1, d2 }, support)?.cdf(x))
}

/// The mean `μ` with `F^E_μ(z_obs) = target` for the unit-variance normal
/// truncated to `support`.
pub fn tn_mean_solve(support: &IntervalSet, z_obs: f64, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidInput(format!("target probability {target} outside (0, 1)")));
    }
    if !z_obs.is_finite() {
        return Err(Error::InvalidInput("non-finite statistic".into()));
    }
    // decreasing in μ
    let g = |mu: f64| -> Result<f64> { Ok(tn_cdf(support, mu, z_obs)? - target) };

    let mut step = 10.0;
    let mut lo = z_obs - step;
    let mut hi = z_obs + step;
    let mut g_lo = g(lo)?;
    let mut g_hi = g(hi)?;
    let mut expansions = 0;
    while g_lo < 0.0 || g_hi > 0.0 {
        expansions += 1;
        if expansions > 60 || step >= MEAN_SEARCH_LIMIT {
            return Err(Error::BracketFailure(format!(
                "no sign change for target {target} within ±{step:.3e} of {z_obs:.6e} (support {support})"
            )));
        }
        step = (2.0 * step).min(MEAN_SEARCH_LIMIT);
        if g_lo < 0.0 {
            lo = z_obs - step;
            g_lo = g(lo)?;
        }
        if g_hi > 0.0 {
            hi = z_obs + step;
            g_hi = g(hi)?;
        }
    }

    let mut mid = 0.5 * (lo + hi);
    let mut g_mid = g(mid)?;
    for _ in 0..300 {
        if g_mid.abs() <= 1e-13 || hi - lo <= 1e-13 * mid.abs().max(1.0) {
            break;
        }
        if g_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        g_mid = g(mid)?;
    }
    if g_mid.abs() > 1e-8 {
        return Err(Error::BracketFailure(format!(
            "CDF residual {g_mid:.3e} at μ = {mid:.6e} exceeds tolerance"
        )));
    }
    Ok(mid)
}
