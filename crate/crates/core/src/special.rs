//! Special functions and base distributions with log-scale tails.
//!
//! Every distribution exposes `ln_cdf` and `ln_sf` computed on the side
//! where the probability is small, so tail masses keep full relative
//! precision far past the point where `1 − cdf` would round to zero.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{LN_2, PI, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

/// Beyond this point `erfc` underflows and the Mills-ratio expansion is used.
const NORMAL_TAIL_SWITCH: f64 = 37.0;

/// `ln(1 − e^a)` for `a ≤ 0`.
pub fn ln_1m_exp(a: f64) -> f64 {
    if a > -LN_2 {
        (-a.exp_m1()).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

/// `ln(e^a + e^b)`.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn ln_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln(e^a − e^b)` for `a ≥ b`.
pub fn ln_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + ln_1m_exp(b - a)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

// ---------------------------------------------------------------------------
// standard normal

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// `ln P(Z > x)`.
pub fn ln_norm_sf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if x < NORMAL_TAIL_SWITCH {
        if x < -5.0 {
            return (-norm_sf(-x)).ln_1p();
        }
        return norm_sf(x).ln();
    }
    // Q(x) ≈ φ(x)/x · (1 − 1/x² + 3/x⁴ − 15/x⁶ + 105/x⁸)
    let u = 1.0 / (x * x);
    let series = 1.0 - u * (1.0 - u * (3.0 - u * (15.0 - 105.0 * u)));
    -0.5 * x * x - LN_SQRT_2PI - x.ln() + series.ln()
}

pub fn ln_norm_cdf(x: f64) -> f64 {
    ln_norm_sf(-x)
}

/// Standard normal quantile.
pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -SQRT_2 * erfc_inv(2.0 * p);
    // polish with Newton steps against the more accurate erfc
    for _ in 0..2 {
        let resid = if p < 0.5 { norm_cdf(x) - p } else { (1.0 - p) - norm_sf(x) };
        let dens = norm_pdf(x);
        if dens <= 0.0 || !x.is_finite() {
            break;
        }
        x -= resid / dens;
    }
    x
}

// ---------------------------------------------------------------------------
// incomplete gamma and beta

/// `(ln P(a, x), ln Q(a, x))` for the regularized incomplete gamma function.
pub fn ln_inc_gamma(a: f64, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if x == f64::INFINITY {
        return (0.0, f64::NEG_INFINITY);
    }
    let ln_pref = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut k = 1.0;
        for _ in 0..MAX_ITER {
            term *= x / (a + k);
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
            k += 1.0;
        }
        let ln_p = ln_pref + sum.ln();
        (ln_p, ln_1m_exp(ln_p.min(0.0)))
    } else {
        // modified Lentz continued fraction for Q
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        let ln_q = ln_pref + h.ln();
        (ln_1m_exp(ln_q.min(0.0)), ln_q)
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `(ln I_x(a, b), ln(1 − I_x(a, b)))`. The complement `y = 1 − x` is passed
/// separately so callers can supply it without cancellation.
pub fn ln_inc_beta(a: f64, b: f64, x: f64, y: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if y <= 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        let ln_i = ln_front + beta_cf(a, b, x).ln() - a.ln();
        (ln_i, ln_1m_exp(ln_i.min(0.0)))
    } else {
        let ln_c = ln_front + beta_cf(b, a, y).ln() - b.ln();
        (ln_1m_exp(ln_c.min(0.0)), ln_c)
    }
}

// ---------------------------------------------------------------------------
// distributions

/// A continuous distribution on the real line with log-scale tails.
pub trait ContinuousDist {
    fn ln_cdf(&self, x: f64) -> f64;
    fn ln_sf(&self, x: f64) -> f64;
    fn ln_pdf(&self, x: f64) -> f64;
    /// Lower end of the support.
    fn support_min(&self) -> f64;
    /// A point near the median; interval masses are computed from the tail
    /// on the far side of it.
    fn center(&self) -> f64;

    fn cdf(&self, x: f64) -> f64 {
        self.ln_cdf(x).exp()
    }
    fn sf(&self, x: f64) -> f64 {
        self.ln_sf(x).exp()
    }
    fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Quantile by bisection on the appropriate tail.
    fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.support_min();
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        let upper_tail = p > 0.5;
        let target = if upper_tail { (1.0 - p).ln() } else { p.ln() };
        // f increasing in x
        let f = |x: f64| {
            if upper_tail {
                target - self.ln_sf(x)
            } else {
                self.ln_cdf(x) - target
            }
        };
        let c = self.center();
        let mut step = 1.0_f64.max(c.abs());
        let (mut lo, mut hi);
        if f(c) > 0.0 {
            hi = c;
            lo = c - step;
            while lo > self.support_min() && f(lo) > 0.0 {
                step *= 2.0;
                lo = (c - step).max(self.support_min());
                if step > 1e300 {
                    break;
                }
            }
            lo = lo.max(self.support_min());
        } else {
            lo = c;
            hi = c + step;
            while f(hi) < 0.0 {
                step *= 2.0;
                hi = c + step;
                if step > 1e300 {
                    return f64::INFINITY;
                }
            }
        }
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(1e-300) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `N(mean, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct UnitNormal {
    pub mean: f64,
}

impl ContinuousDist for UnitNormal {
    fn ln_cdf(&self, x: f64) -> f64 {
        ln_norm_cdf(x - self.mean)
    }
    fn ln_sf(&self, x: f64) -> f64 {
        ln_norm_sf(x - self.mean)
    }
    fn ln_pdf(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * d * d - LN_SQRT_2PI
    }
    fn support_min(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn center(&self) -> f64 {
        self.mean
    }
    fn quantile(&self, p: f64) -> f64 {
        self.mean + norm_ppf(p)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ChiSquared {
    pub df: f64,
}

impl ContinuousDist for ChiSquared {
    fn ln_cdf(&self, x: f64) -> f64 {
        ln_inc_gamma(0.5 * self.df, 0.5 * x).0
    }
    fn ln_sf(&self, x: f64) -> f64 {
        ln_inc_gamma(0.5 * self.df, 0.5 * x).1
    }
    fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let k = 0.5 * self.df;
        (k - 1.0) * x.ln() - 0.5 * x - k * LN_2 - ln_gamma(k)
    }
    fn support_min(&self) -> f64 {
        0.0
    }
    fn center(&self) -> f64 {
        self.df.max(0.5)
    }
}

/// Snedecor's F with `(d1, d2)` degrees of freedom.
#[derive(Debug, Clone, Copy)]
pub struct FDist {
    pub d1: f64,
    pub d2: f64,
}

impl FDist {
    fn beta_args(&self, x: f64) -> (f64, f64) {
        let den = self.d1 * x + self.d2;
        (self.d1 * x / den, self.d2 / den)
    }
}

impl ContinuousDist for FDist {
    fn ln_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if x == f64::INFINITY {
            return 0.0;
        }
        let (u, v) = self.beta_args(x);
        ln_inc_beta(0.5 * self.d1, 0.5 * self.d2, u, v).0
    }
    fn ln_sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        let (u, v) = self.beta_args(x);
        ln_inc_beta(0.5 * self.d1, 0.5 * self.d2, u, v).1
    }
    fn ln_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let (d1, d2) = (self.d1, self.d2);
        0.5 * (d1 * (d1 * x).ln() + d2 * d2.ln() - (d1 + d2) * (d1 * x + d2).ln())
            - x.ln()
            - ln_beta(0.5 * d1, 0.5 * d2)
    }
    fn support_min(&self) -> f64 {
        0.0
    }
    fn center(&self) -> f64 {
        1.0
    }
}

/// Student's t with `df` degrees of freedom.
#[derive(Debug, Clone, Copy)]
pub struct StudentT {
    pub df: f64,
}

impl StudentT {
    /// `P(|T| ≥ |t|)`.
    pub fn two_sided_p(&self, t: f64) -> f64 {
        (LN_2 + self.ln_sf(t.abs())).exp().min(1.0)
    }
}

impl ContinuousDist for StudentT {
    fn ln_cdf(&self, x: f64) -> f64 {
        self.ln_sf(-x)
    }
    fn ln_sf(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        let t2 = x * x;
        let den = self.df + t2;
        // P(|T| > |x|) = I_{df/(df+x²)}(df/2, 1/2)
        let (ln_two_sided, ln_inner) = ln_inc_beta(0.5 * self.df, 0.5, self.df / den, t2 / den);
        if x >= 0.0 {
            ln_two_sided - LN_2
        } else {
            // 1 − ½ P(|T| > |x|) = ½ + ½ P(|T| < |x|)
            ln_add_exp(-LN_2, ln_inner - LN_2)
        }
    }
    fn ln_pdf(&self, x: f64) -> f64 {
        let v = self.df;
        ln_gamma(0.5 * (v + 1.0)) - ln_gamma(0.5 * v) - 0.5 * (v * PI).ln()
            - 0.5 * (v + 1.0) * (x * x / v).ln_1p()
    }
    fn support_min(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn center(&self) -> f64 {
        0.0
    }
}
