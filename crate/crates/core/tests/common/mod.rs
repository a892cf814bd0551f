//! Oracles shared by the integration suites. Everything here is written
//! from the defining formulas, without calling into the crate's solvers.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use selout::detection::{detect_cooks, DetectionResult};
use selout::geometry::FCurve;
use selout::inference::{f_test_spec, make_contrast, selective_f_test, ContrastKind};
use selout::{fit_ols, Dataset, Error, IntervalSet};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Intercept plus `p − 1` Gaussian columns, unit noise and a few shifted rows.
pub fn contaminated_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize, shifted: usize, shift: f64) -> Dataset {
    let x = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { normal(rng) });
    let beta = DVector::from_fn(p, |j, _| if j == 1 { 1.5 } else { 0.5 });
    let mut y = &x * beta + DVector::from_fn(n, |_, _| normal(rng));
    for i in 0..shifted.min(n) {
        y[i] += if i % 2 == 0 { shift } else { -shift };
    }
    let names = (0..p).map(|j| format!("c{j}")).collect();
    Dataset::new(y, x, names, true).unwrap()
}

pub enum Rule {
    Cooks(f64),
    Dffits(f64),
}

/// Cook's distance and DFFITS recomputed from an explicit hat matrix.
pub struct RuleOracle {
    hat: DMatrix<f64>,
    leverage: Vec<f64>,
    n: usize,
    p: usize,
    rule: Rule,
}

impl RuleOracle {
    pub fn new(x: &DMatrix<f64>, rule: Rule) -> Self {
        let (n, p) = x.shape();
        let gram_inv = (x.transpose() * x).try_inverse().expect("full rank design");
        let hat = x * gram_inv * x.transpose();
        let leverage = (0..n).map(|i| hat[(i, i)]).collect();
        RuleOracle { hat, leverage, n, p, rule }
    }

    pub fn residual(&self, y: &DVector<f64>) -> DVector<f64> {
        y - &self.hat * y
    }

    pub fn cooks_distances(&self, e: &DVector<f64>) -> Vec<f64> {
        let s2 = e.norm_squared() / (self.n - self.p) as f64;
        (0..self.n)
            .map(|i| {
                let h = self.leverage[i];
                e[i] * e[i] * h / (self.p as f64 * s2 * (1.0 - h).powi(2))
            })
            .collect()
    }

    pub fn dffits(&self, e: &DVector<f64>) -> Vec<f64> {
        let rss = e.norm_squared();
        (0..self.n)
            .map(|i| {
                let h = self.leverage[i];
                let s2 = (rss - e[i] * e[i] / (1.0 - h)) / (self.n - self.p - 1) as f64;
                e[i] / (s2.sqrt() * (1.0 - h).sqrt()) * (h / (1.0 - h)).sqrt()
            })
            .collect()
    }

    /// Flagged rows for a full-fit residual vector.
    pub fn outliers_from_residual(&self, e: &DVector<f64>) -> Vec<usize> {
        let flagged: Vec<bool> = match self.rule {
            Rule::Cooks(lambda) => {
                let cut = lambda / self.n as f64;
                self.cooks_distances(e).iter().map(|&d| d >= cut).collect()
            }
            Rule::Dffits(c) => self.dffits(e).iter().map(|d| d.abs() >= c).collect(),
        };
        (0..self.n).filter(|&i| flagged[i]).collect()
    }

    pub fn outliers(&self, y: &DVector<f64>) -> Vec<usize> {
        self.outliers_from_residual(&self.residual(y))
    }
}

/// Transition points of `member` on `[lo, hi]`: a uniform scan followed
/// by bisection of every sign change.
pub fn scan_transitions(member: impl Fn(f64) -> bool, lo: f64, hi: f64, nodes: usize) -> Vec<f64> {
    let step = (hi - lo) / nodes as f64;
    let mut out = Vec::new();
    let mut prev = member(lo);
    for k in 1..=nodes {
        let b = lo + step * k as f64;
        let cur = member(b);
        if cur != prev {
            let (mut l, mut h) = (b - step, b);
            for _ in 0..200 {
                let m = 0.5 * (l + h);
                if m <= l || m >= h {
                    break;
                }
                if member(m) == prev {
                    l = m;
                } else {
                    h = m;
                }
            }
            out.push(0.5 * (l + h));
        }
        prev = cur;
    }
    out
}

/// Finite endpoints of an interval set lying strictly inside `(lo, hi)`.
pub fn endpoints_within(pairs: &[(f64, f64)], lo: f64, hi: f64) -> Vec<f64> {
    pairs
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|e| e.is_finite() && *e > lo && *e < hi)
        .collect()
}

/// Worst mismatch between computed and oracle endpoints, relative to
/// `1 + |e|`. A computed endpoint unmatched by the scan still counts as
/// matched when membership flips across it, which catches pieces narrower
/// than the scan spacing.
pub fn endpoint_discrepancy(computed: &[f64], oracle: &[f64], member: impl Fn(f64) -> bool) -> f64 {
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs().max(b.abs()));
    let nearest = |x: f64, set: &[f64]| set.iter().map(|&e| rel(x, e)).fold(f64::INFINITY, f64::min);
    let mut worst = 0.0f64;
    for &e in oracle {
        worst = worst.max(nearest(e, computed));
    }
    for &e in computed {
        let d = nearest(e, oracle);
        if d > 1e-4 {
            let delta = 1e-7 * (1.0 + e.abs());
            if member(e - delta) != member(e + delta) {
                continue;
            }
        }
        worst = worst.max(d);
    }
    worst
}

pub struct SliceCheck {
    pub endpoints: usize,
    pub endpoint_error: f64,
    pub probes: usize,
    pub probe_mismatches: usize,
}

impl SliceCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.endpoint_error < tol && self.probe_mismatches == 0
    }
}

fn near_any(x: f64, points: &[f64], tol: f64) -> bool {
    points.iter().any(|&e| (x - e).abs() <= tol * (1.0 + e.abs()))
}

/// Compares `{t : z + t v ∈ E}` against direct recomputation of the
/// detection rule on `[center − radius, center + radius]`.
pub fn check_line_slice(
    oracle: &RuleOracle,
    observed: &[usize],
    z: &DVector<f64>,
    v: &DVector<f64>,
    computed: &IntervalSet,
    center: f64,
    radius: f64,
    rng: &mut ChaCha8Rng,
) -> SliceCheck {
    let (ez, ev) = (oracle.residual(z), oracle.residual(v));
    let member = |t: f64| oracle.outliers_from_residual(&(&ez + &ev * t)) == observed;
    let (lo, hi) = (center - radius, center + radius);
    let truth = scan_transitions(member, lo, hi, 200_000);
    let mine = endpoints_within(&computed.to_pairs(), lo, hi);
    let endpoint_error = endpoint_discrepancy(&mine, &truth, member);
    let probes = 2000;
    let mut probe_mismatches = 0;
    for _ in 0..probes {
        let t = rng.random_range(lo..hi);
        if near_any(t, &mine, 1e-6) || near_any(t, &truth, 1e-6) {
            continue;
        }
        if computed.contains(t) != member(t) {
            probe_mismatches += 1;
        }
    }
    SliceCheck { endpoints: truth.len().max(mine.len()), endpoint_error, probes, probe_mismatches }
}

/// Same comparison along an F curve, scanning the angle over `[0, π/2]`
/// and reporting endpoints on the F scale.
pub fn check_f_slice(oracle: &RuleOracle, observed: &[usize], curve: &FCurve, computed: &IntervalSet, rng: &mut ChaCha8Rng) -> SliceCheck {
    let ez = oracle.residual(&curve.z);
    let ea = oracle.residual(&curve.w_delta) * curve.radius;
    let eb = oracle.residual(&curve.w2) * curve.radius;
    let member_theta = |th: f64| {
        let (s, c) = if th >= std::f64::consts::FRAC_PI_2 { (1.0, 0.0) } else { th.sin_cos() };
        oracle.outliers_from_residual(&(&ez + &ea * s + &eb * c)) == observed
    };
    let member_f = |f: f64| member_theta(curve.theta_of_f(f));
    // past this angle the curve point no longer moves in double precision
    let f_cap = curve.f_of_theta(std::f64::consts::FRAC_PI_2 - 1e-8);
    let truth: Vec<f64> = scan_transitions(member_theta, 0.0, std::f64::consts::FRAC_PI_2, 200_000)
        .into_iter()
        .map(|th| curve.f_of_theta(th))
        .filter(|&f| f < f_cap)
        .collect();
    let mine = endpoints_within(&computed.to_pairs(), 0.0, f_cap);
    let endpoint_error = endpoint_discrepancy(&mine, &truth, member_f);
    let probes = 2000;
    let mut probe_mismatches = 0;
    for _ in 0..probes {
        let f = curve.f_of_theta(rng.random_range(0.0..std::f64::consts::FRAC_PI_2));
        if near_any(f, &mine, 1e-6) || near_any(f, &truth, 1e-6) {
            continue;
        }
        if computed.contains(f) != member_f(f) {
            probe_mismatches += 1;
        }
    }
    SliceCheck { endpoints: truth.len().max(mine.len()), endpoint_error, probes, probe_mismatches }
}

/// Line slice for coefficient `j` of the refit, checked against recomputation.
pub fn line_check(data: &Dataset, det: &DetectionResult, rule: Rule, j: usize, rng: &mut ChaCha8Rng) -> SliceCheck {
    let fit = fit_ols(data, &det.kept).unwrap();
    let c = make_contrast(&fit, ContrastKind::Coefficient(j), data, 1.0).unwrap();
    let set = det.event.slice_on_line(&c.z_residual, &c.direction).unwrap();
    let oracle = RuleOracle::new(data.x(), rule);
    let t_obs = c.estimate / c.nu_norm;
    let scale = oracle.residual(&c.z_residual).norm() / oracle.residual(&c.direction).norm().max(1e-12);
    let radius = 20.0 * (t_obs.abs() + scale) + 1.0;
    check_line_slice(&oracle, &det.outliers, &c.z_residual, &c.direction, &set, t_obs, radius, rng)
}

/// F-curve slice for coefficient `j`, checked against recomputation.
pub fn f_check(data: &Dataset, det: &DetectionResult, rule: Rule, j: usize, rng: &mut ChaCha8Rng) -> SliceCheck {
    let fit = fit_ols(data, &det.kept).unwrap();
    let spec = f_test_spec(&fit, data, &[j]).unwrap();
    let test = selective_f_test(&fit, data, &[j], &det.event).unwrap();
    let oracle = RuleOracle::new(data.x(), rule);
    check_f_slice(&oracle, &det.outliers, &spec.curve, &test.truncation, rng)
}

/// Random Cook's instance: data, detection, cutoff and a coefficient index.
pub fn random_cooks_instance(r: &mut ChaCha8Rng) -> Option<(Dataset, DetectionResult, f64, usize)> {
    let n = r.random_range(20..=40);
    let shifted = r.random_range(0..=4);
    let shift = r.random_range(3.0..8.0);
    let data = contaminated_dataset(r, n, 3, shifted, shift);
    let lambda = [1.0, 2.0, 3.0, 4.0][r.random_range(0..4)];
    let j = r.random_range(0..3);
    match detect_cooks(&data, lambda) {
        Ok(det) => Some((data, det, lambda, j)),
        Err(Error::TooManyOutliers { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (1..=m)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn composite(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let c = a + h * (k as f64 + 0.5);
            rule.iter().map(|&(x, w)| w * f(c + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

/// Composite 20-point Gauss–Legendre, doubling the panel count until two
/// successive values agree to `rel` relative.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let rule = gauss_legendre(20);
    let mut panels = 16;
    let mut prev = composite(f, a, b, panels, &rule);
    while panels < 1 << 16 {
        panels *= 2;
        let cur = composite(f, a, b, panels, &rule);
        if (cur - prev).abs() <= rel * cur.abs() {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `∫_a^∞ f` through `x = a + t/(1 − t)`.
pub fn integrate_to_infinity(f: &dyn Fn(f64) -> f64, a: f64, rel: f64) -> f64 {
    let g = |t: f64| {
        if t >= 1.0 {
            0.0
        } else {
            let x = a + t / (1.0 - t);
            let v = f(x) / ((1.0 - t) * (1.0 - t));
            if v.is_finite() { v } else { 0.0 }
        }
    };
    integrate(&g, 0.0, 1.0, rel)
}

pub fn ln_normal_pdf(mean: f64, x: f64) -> f64 {
    -0.5 * (x - mean).powi(2) - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

pub fn ln_chi2_pdf(k: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (k / 2.0 - 1.0) * x.ln() - x / 2.0 - k / 2.0 * 2f64.ln() - ln_gamma(k / 2.0)
}

pub fn ln_f_pdf(d1: f64, d2: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    0.5 * (d1 * (d1 * x).ln() + d2 * d2.ln() - (d1 + d2) * (d1 * x + d2).ln()) - x.ln() - ln_beta(d1 / 2.0, d2 / 2.0)
}

/// Mass of `exp(ln_pdf − shift)` over `[lo, hi]`, `hi` possibly infinite.
pub fn shifted_mass(ln_pdf: &dyn Fn(f64) -> f64, shift: f64, lo: f64, hi: f64) -> f64 {
    let f = |x: f64| (ln_pdf(x) - shift).exp();
    if hi.is_infinite() {
        integrate_to_infinity(&f, lo, 1e-13)
    } else {
        integrate(&f, lo, hi, 1e-13)
    }
}

/// Truncated CDF at `x` over a union of disjoint intervals, by quadrature.
pub fn truncated_cdf_quadrature(ln_pdf: &dyn Fn(f64) -> f64, pieces: &[(f64, f64)], x: f64) -> f64 {
    let shift = pieces
        .iter()
        .flat_map(|&(a, b)| [a, b, if b.is_finite() { 0.5 * (a + b) } else { a + 1.0 }])
        .filter(|x| x.is_finite())
        .map(ln_pdf)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };
    let total: f64 = pieces.iter().map(|&(a, b)| shifted_mass(ln_pdf, shift, a, b)).sum();
    let below: f64 = pieces
        .iter()
        .filter(|&&(a, _)| a < x)
        .map(|&(a, b)| shifted_mass(ln_pdf, shift, a, b.min(x)))
        .sum();
    below / total
}
