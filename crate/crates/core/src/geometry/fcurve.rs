//! Restriction of a selection event to the one-parameter curve traced by
//! the F statistic.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;

use super::constraint::{PlaneQuadratic, ProjectionCache};
use super::event::SelectionEvent;
use super::interval::{Interval, IntervalSet};
use crate::error::{Error, Result};
use crate::special::{ContinuousDist, FDist};

/// Number of geometrically spaced grid nodes in `F`.
pub const GRID_NODES: usize = 4096;
/// Extra nodes spaced uniformly in the angle, covering the far tail.
const ANGLE_NODES: usize = 256;
/// Relative tolerance on refined endpoints in `F`.
pub const ROOT_REL_TOL: f64 = 1e-10;

/// `y(F) = z + r sinθ w_Δ + r cosθ w₂` with `tan²θ = d1 F / d2`.
#[derive(Debug, Clone)]
pub struct FCurve {
    pub z: DVector<f64>,
    pub w_delta: DVector<f64>,
    pub w2: DVector<f64>,
    pub radius: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone)]
pub struct FCurveSlice {
    pub set: IntervalSet,
    /// Root pairs found only by local refinement between grid nodes.
    pub refined_pairs: usize,
}

impl FCurve {
    pub fn theta_of_f(&self, f: f64) -> f64 {
        if f.is_infinite() {
            FRAC_PI_2
        } else {
            (self.d1 * f / self.d2).sqrt().atan()
        }
    }

    pub fn f_of_theta(&self, theta: f64) -> f64 {
        if theta >= FRAC_PI_2 {
            f64::INFINITY
        } else {
            let t = theta.tan();
            self.d2 / self.d1 * t * t
        }
    }

    pub fn point_at_theta(&self, theta: f64) -> DVector<f64> {
        let (s, c) = angle(theta);
        &self.z + &self.w_delta * (self.radius * s) + &self.w2 * (self.radius * c)
    }

    pub fn point(&self, f: f64) -> DVector<f64> {
        self.point_at_theta(self.theta_of_f(f))
    }
}

fn angle(theta: f64) -> (f64, f64) {
    if theta >= FRAC_PI_2 {
        (1.0, 0.0)
    } else {
        theta.sin_cos()
    }
}

struct Form<'a> {
    q: &'a PlaneQuadratic,
    r: f64,
}

impl Form<'_> {
    fn at(&self, theta: f64) -> f64 {
        let (s, c) = angle(theta);
        self.q.eval(self.r * s, self.r * c)
    }
}

fn grid(curve: &FCurve, f_max: f64) -> Vec<f64> {
    let f_lo = f_max * 1e-12;
    let ratio = (f_max / f_lo).ln() / (GRID_NODES - 2) as f64;
    let mut nodes: Vec<f64> = Vec::with_capacity(GRID_NODES + ANGLE_NODES + 2);
    nodes.push(0.0);
    for k in 0..(GRID_NODES - 1) {
        nodes.push(curve.theta_of_f(f_lo * (ratio * k as f64).exp()));
    }
    for k in 1..ANGLE_NODES {
        nodes.push(FRAC_PI_2 * k as f64 / ANGLE_NODES as f64);
    }
    nodes.push(FRAC_PI_2);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

/// Bisect a sign change of `form` on `[lo, hi]` (signs differ at the ends).
fn bisect(form: &Form, mut lo: f64, mut hi: f64) -> f64 {
    let lo_sign = form.at(lo) >= 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (form.at(mid) >= 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        let (s, c) = angle(0.5 * (lo + hi));
        // dF/F = 2 dθ / (sinθ cosθ)
        let rel = 2.0 * (hi - lo) / (s * c).max(f64::MIN_POSITIVE);
        if rel <= ROOT_REL_TOL {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimum of `sign · form` on `[a, b]`.
fn golden_min(form: &Form, sign: f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let h = |t: f64| sign * form.at(t);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (h(c), h(d));
    for _ in 0..120 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = h(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, h(t))
}

/// Feasible angle set `{θ ∈ [0, π/2] : q(r sinθ, r cosθ) ≥ 0}` for one form.
fn feasible_angles(form: &Form, nodes: &[f64], refined: &mut usize) -> IntervalSet {
    let vals: Vec<f64> = nodes.iter().map(|&t| form.at(t)).collect();
    let m = nodes.len();
    let mut roots: Vec<f64> = Vec::new();

    for i in 0..m - 1 {
        if (vals[i] >= 0.0) != (vals[i + 1] >= 0.0) {
            roots.push(bisect(form, nodes[i], nodes[i + 1]));
        }
    }

    // a pair of roots inside one cell leaves no sign change at the nodes;
    // look for it around local minima of |f|
    for i in 0..m {
        let (l, r) = (i.saturating_sub(1), (i + 1).min(m - 1));
        if l == r {
            continue;
        }
        let same = (vals[l] >= 0.0) == (vals[i] >= 0.0) && (vals[r] >= 0.0) == (vals[i] >= 0.0);
        let is_min = vals[i].abs() <= vals[l].abs() && vals[i].abs() <= vals[r].abs();
        if !same || !is_min {
            continue;
        }
        let sign = if vals[i] >= 0.0 { 1.0 } else { -1.0 };
        let (t_star, h_star) = golden_min(form, sign, nodes[l], nodes[r]);
        if h_star < 0.0 {
            let a = bisect(form, nodes[l], t_star);
            let b = bisect(form, t_star, nodes[r]);
            log::warn!("F-curve grid missed a root pair near θ = {t_star:.6e}; refined locally");
            *refined += 1;
            roots.push(a);
            roots.push(b);
        }
    }

    roots.sort_by(f64::total_cmp);
    roots.dedup();

    let mut breaks = Vec::with_capacity(roots.len() + 2);
    breaks.push(0.0);
    breaks.extend(roots.into_iter().filter(|&t| t > 0.0 && t < FRAC_PI_2));
    breaks.push(FRAC_PI_2);

    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if form.at(mid) >= 0.0 {
            out.push(Interval::new(w[0], w[1]));
        }
    }
    IntervalSet::from_intervals(out)
}

/// `{F ≥ 0 : y(F) ∈ E}`, found by a sign scan over a dense grid followed by
/// bisection of every bracketed root.
pub fn slice_event_on_f_curve(event: &SelectionEvent, curve: &FCurve, f_obs: f64) -> Result<FCurveSlice> {
    if !(curve.d1 > 0.0 && curve.d2 > 0.0 && curve.radius.is_finite()) {
        return Err(Error::InvalidInput("degenerate F curve".into()));
    }
    let q999 = FDist { d1: curve.d1, d2: curve.d2 }.quantile(0.9999);
    let mut f_max = (10.0 * f_obs).max(q999);
    if !f_max.is_finite() || f_max <= 0.0 {
        f_max = q999.max(1.0);
    }
    let nodes = grid(curve, f_max);

    let mut cache = ProjectionCache::new();
    let mut refined = 0usize;
    let mut pieces = Vec::with_capacity(event.groups().len());
    for group in event.groups() {
        let mut acc = IntervalSet::single(0.0, FRAC_PI_2);
        for c in group {
            let q = c.plane_coefficients(&curve.z, &curve.w_delta, &curve.w2, &mut cache);
            let form = Form { q: &q, r: curve.radius };
            acc = acc.intersect(&feasible_angles(&form, &nodes, &mut refined));
            if acc.is_empty() {
                break;
            }
        }
        pieces.push(acc);
    }
    let angles = IntervalSet::union_all(&pieces);
    let set = angles
        .map_increasing(|t| curve.f_of_theta(t))
        .intersect(&IntervalSet::nonnegative());
    Ok(FCurveSlice { set, refined_pairs: refined })
}
