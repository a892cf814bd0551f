use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::interval::IntervalSet;
use crate::linalg::Projector;

/// One summand of the quadratic part `yᵀ Q y`.
#[derive(Debug, Clone)]
pub enum QuadTerm {
    /// `coef · ‖P y‖²`
    ProjectedNorm { coef: f64, projector: Arc<Projector> },
    /// `coef · ((P y)_index)²`
    ProjectedCoordinate {
        coef: f64,
        projector: Arc<Projector>,
        index: usize,
    },
    /// `yᵀ Q y` for an explicit symmetric `Q`.
    Dense(DMatrix<f64>),
}

/// The region `{y : yᵀ Q y + aᵀ y + b ≥ 0}`, with `Q` stored as structured
/// terms so evaluation never forms an `n × n` matrix.
#[derive(Debug, Clone, Default)]
pub struct QuadraticConstraint {
    terms: Vec<QuadTerm>,
    linear: Option<DVector<f64>>,
    constant: f64,
}

/// `q(s, t) = c00 + c10 s + c01 t + c20 s² + c11 s t + c02 t²`
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlaneQuadratic {
    pub c00: f64,
    pub c10: f64,
    pub c01: f64,
    pub c20: f64,
    pub c11: f64,
    pub c02: f64,
}

impl PlaneQuadratic {
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        self.c00 + self.c10 * s + self.c01 * t + self.c20 * s * s + self.c11 * s * t + self.c02 * t * t
    }
}

/// Per-projector cache of `P w` for a fixed list of vectors `w`.
#[derive(Default)]
pub struct ProjectionCache {
    map: HashMap<usize, Vec<DVector<f64>>>,
}

impl ProjectionCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn projections(&mut self, p: &Arc<Projector>, vecs: &[&DVector<f64>]) -> &Vec<DVector<f64>> {
        let key = Arc::as_ptr(p) as usize;
        self.map
            .entry(key)
            .or_insert_with(|| vecs.iter().map(|w| p.apply(w)).collect())
    }
}

impl QuadraticConstraint {
    pub fn new(terms: Vec<QuadTerm>, linear: Option<DVector<f64>>, constant: f64) -> Self {
        QuadraticConstraint { terms, linear, constant }
    }

    /// Affine constraint `aᵀ y + b ≥ 0`.
    pub fn affine(a: DVector<f64>, b: f64) -> Self {
        Self::new(Vec::new(), Some(a), b)
    }

    pub fn terms(&self) -> &[QuadTerm] {
        &self.terms
    }

    pub fn linear(&self) -> Option<&DVector<f64>> {
        self.linear.as_ref()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Gram form over `vecs`: `G[a][b] = w_aᵀ Q w_b` and `L[a] = aᵀ w_a`.
    fn gram(&self, vecs: &[&DVector<f64>], cache: &mut ProjectionCache) -> (Vec<Vec<f64>>, Vec<f64>) {
        let k = vecs.len();
        let mut g = vec![vec![0.0; k]; k];
        for term in &self.terms {
            match term {
                QuadTerm::ProjectedNorm { coef, projector } => {
                    let pw = cache.projections(projector, vecs);
                    for a in 0..k {
                        for b in a..k {
                            g[a][b] += coef * pw[a].dot(&pw[b]);
                        }
                    }
                }
                QuadTerm::ProjectedCoordinate { coef, projector, index } => {
                    let pw = cache.projections(projector, vecs);
                    for a in 0..k {
                        for b in a..k {
                            g[a][b] += coef * pw[a][*index] * pw[b][*index];
                        }
                    }
                }
                QuadTerm::Dense(q) => {
                    for a in 0..k {
                        let qw = q * vecs[a];
                        for b in a..k {
                            g[a][b] += vecs[b].dot(&qw);
                        }
                    }
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                g[a][b] = g[b][a];
            }
        }
        let l = match &self.linear {
            Some(lin) => vecs.iter().map(|w| lin.dot(w)).collect(),
            None => vec![0.0; k],
        };
        (g, l)
    }

    pub fn evaluate(&self, y: &DVector<f64>) -> f64 {
        self.evaluate_cached(y, &mut ProjectionCache::new())
    }

    pub fn evaluate_cached(&self, y: &DVector<f64>, cache: &mut ProjectionCache) -> f64 {
        let (g, l) = self.gram(&[y], cache);
        g[0][0] + l[0] + self.constant
    }

    pub fn is_satisfied(&self, y: &DVector<f64>) -> bool {
        self.evaluate(y) >= 0.0
    }

    /// Restriction to `y = z + t v`, as `(A, B, C)` with value `A t² + B t + C`.
    /// `cache` must have been used only with the same `(z, v)`.
    pub fn line_coefficients(
        &self,
        z: &DVector<f64>,
        v: &DVector<f64>,
        cache: &mut ProjectionCache,
    ) -> (f64, f64, f64) {
        let (g, l) = self.gram(&[z, v], cache);
        (g[1][1], 2.0 * g[0][1] + l[1], g[0][0] + l[0] + self.constant)
    }

    /// Restriction to `y = z + s v1 + t v2`.
    /// `cache` must have been used only with the same `(z, v1, v2)`.
    pub fn plane_coefficients(
        &self,
        z: &DVector<f64>,
        v1: &DVector<f64>,
        v2: &DVector<f64>,
        cache: &mut ProjectionCache,
    ) -> PlaneQuadratic {
        let (g, l) = self.gram(&[z, v1, v2], cache);
        PlaneQuadratic {
            c00: g[0][0] + l[0] + self.constant,
            c10: 2.0 * g[0][1] + l[1],
            c01: 2.0 * g[0][2] + l[2],
            c20: g[1][1],
            c11: 2.0 * g[1][2],
            c02: g[2][2],
        }
    }

    /// Dense `(Q, a, b)`; for tests and small problems only.
    pub fn to_dense(&self, n: usize) -> (DMatrix<f64>, DVector<f64>, f64) {
        let mut q = DMatrix::zeros(n, n);
        for term in &self.terms {
            match term {
                QuadTerm::ProjectedNorm { coef, projector } => q += projector.to_dense() * *coef,
                QuadTerm::ProjectedCoordinate { coef, projector, index } => {
                    let row = projector.to_dense().row(*index).transpose();
                    q += &row * row.transpose() * *coef;
                }
                QuadTerm::Dense(m) => q += m,
            }
        }
        let a = self.linear.clone().unwrap_or_else(|| DVector::zeros(n));
        (q, a, self.constant)
    }
}

/// `{t : A t² + B t + C ≥ 0}` as a closed interval set.
///
/// Roots use the cancellation-free formula, which stays accurate for tiny
/// `A`; the linear branch is taken only when `A` vanishes or the far root
/// overflows.
pub fn solve_quadratic_sign_set(a: f64, b: f64, c: f64) -> IntervalSet {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return IntervalSet::real_line();
    }
    let (a, b, c) = (a / scale, b / scale, c / scale);
    let inf = f64::INFINITY;

    let linear = |b: f64, c: f64| {
        if b == 0.0 {
            if c >= 0.0 {
                IntervalSet::real_line()
            } else {
                IntervalSet::empty()
            }
        } else if b > 0.0 {
            IntervalSet::single(-c / b, inf)
        } else {
            IntervalSet::single(-inf, -c / b)
        }
    };
    if a == 0.0 {
        return linear(b, c);
    }

    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return if a > 0.0 { IntervalSet::real_line() } else { IntervalSet::empty() };
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    if !r1.is_finite() {
        return linear(b, c);
    }
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    if a > 0.0 {
        IntervalSet::from_pairs(&[(-inf, lo), (hi, inf)])
    } else {
        IntervalSet::single(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simple_cases() {
        // t² - 1 ≥ 0
        assert_eq!(
            solve_quadratic_sign_set(1.0, 0.0, -1.0).to_pairs(),
            vec![(f64::NEG_INFINITY, -1.0), (1.0, f64::INFINITY)]
        );
        // 1 - t² ≥ 0
        assert_eq!(solve_quadratic_sign_set(-1.0, 0.0, 1.0).to_pairs(), vec![(-1.0, 1.0)]);
        // 2t - 4 ≥ 0
        assert_eq!(solve_quadratic_sign_set(0.0, 2.0, -4.0).to_pairs(), vec![(2.0, f64::INFINITY)]);
        assert!(solve_quadratic_sign_set(0.0, 0.0, -1.0).is_empty());
        assert!(solve_quadratic_sign_set(1.0, 0.0, 1.0).is_real_line());
        assert!(solve_quadratic_sign_set(-1.0, 0.0, -1.0).is_empty());
        // -t² ≥ 0 is the single point 0
        assert_eq!(solve_quadratic_sign_set(-1.0, 0.0, 0.0).to_pairs(), vec![(0.0, 0.0)]);
    }

    #[test]
    fn stable_for_tiny_root() {
        // (t - 1e-9)(t - 1e9) with large cancellation in the naive formula
        let s = solve_quadratic_sign_set(-1.0, 1e9 + 1e-9, -1.0);
        let iv = s.intervals()[0];
        assert!((iv.lo - 1e-9).abs() < 1e-22);
        assert!((iv.hi - 1e9).abs() < 1e-6);
    }

    #[test]
    fn tiny_leading_coefficient_keeps_far_root() {
        // 1e-16 t² + t - 1 has roots near 1 and -1e16
        let s = solve_quadratic_sign_set(1e-16, 1.0, -1.0);
        assert_eq!(s.len(), 2);
        assert!((s.intervals()[1].lo - 1.0).abs() < 1e-15);
        assert!((s.intervals()[0].hi + 1e16).abs() < 1e2);
        assert_eq!(solve_quadratic_sign_set(0.0, 0.0, 0.0), IntervalSet::real_line());
    }

    #[test]
    fn scale_invariant_degeneracy() {
        let small = solve_quadratic_sign_set(1e-30, 2e-30, -3e-30);
        let big = solve_quadratic_sign_set(1.0, 2.0, -3.0);
        assert_eq!(small.len(), 2);
        for (a, b) in small.intervals().iter().zip(big.intervals()) {
            assert!((a.lo - b.lo).abs() < 1e-14 || a.lo == b.lo);
            assert!((a.hi - b.hi).abs() < 1e-14 || a.hi == b.hi);
        }
    }

    proptest! {
        #[test]
        fn matches_grid_scan(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
            let set = solve_quadratic_sign_set(a, b, c);
            for k in 0..=400 {
                let t = -20.0 + 0.1 * k as f64 + 0.0123;
                let val = a * t * t + b * t + c;
                // skip points too close to a root to classify by sign
                if val.abs() < 1e-9 {
                    continue;
                }
                prop_assert_eq!(set.contains(t), val > 0.0, "t={} val={}", t, val);
            }
        }
    }

    #[test]
    fn structured_terms_match_dense_form() {
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.3, 1.0, -1.0, 1.0, 2.0, 1.0, 0.5]);
        let p = Arc::new(Projector::residual_maker(&x).unwrap());
        let c = QuadraticConstraint::new(
            vec![
                QuadTerm::ProjectedNorm { coef: 0.7, projector: p.clone() },
                QuadTerm::ProjectedCoordinate { coef: -2.0, projector: p.clone(), index: 2 },
            ],
            Some(DVector::from_vec(vec![0.1, 0.0, -0.2, 0.4])),
            0.25,
        );
        let (q, a, b) = c.to_dense(4);
        let y = DVector::from_vec(vec![0.5, -1.0, 2.0, 0.1]);
        let dense_val = y.dot(&(&q * &y)) + a.dot(&y) + b;
        assert!((c.evaluate(&y) - dense_val).abs() < 1e-12);

        let z = DVector::from_vec(vec![1.0, 1.0, -1.0, 0.0]);
        let v1 = DVector::from_vec(vec![0.0, 1.0, 0.5, -0.5]);
        let v2 = DVector::from_vec(vec![0.3, 0.0, 0.0, 1.0]);
        let pq = c.plane_coefficients(&z, &v1, &v2, &mut ProjectionCache::new());
        let (s, t) = (0.7, -1.3);
        let pt = &z + &v1 * s + &v2 * t;
        assert!((pq.eval(s, t) - c.evaluate(&pt)).abs() < 1e-12);
    }
}
