mod common;

use common::{contaminated_dataset, rng};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use selout::detection::detect_cooks;
use selout::inference::{
    group_chi2_test, make_contrast, naive_coefficient, prediction_interval, selective_f_test, selective_z_inference,
    z_truncation_set, ContrastKind,
};
use selout::truncated::{Family, TruncatedDistribution};
use selout::{fit_ols, Dataset, IntervalSet, OlsFit, SelectionEvent};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal, StudentsT};

const TOL: f64 = 1e-9;
const ALPHA: f64 = 0.1;

/// Explicit-inverse quantities on the retained rows.
struct Classical {
    beta: DVector<f64>,
    cov: DMatrix<f64>,
    s2: f64,
    df: f64,
}

fn classical(data: &Dataset, rows: &[usize]) -> Classical {
    let xm = data.x().select_rows(rows);
    let ym = data.y().select_rows(rows);
    let cov = (xm.transpose() * &xm).try_inverse().unwrap();
    let beta = &cov * xm.transpose() * &ym;
    let df = (rows.len() - data.p()) as f64;
    let s2 = (&ym - &xm * &beta).norm_squared() / df;
    Classical { beta, cov, s2, df }
}

fn wald(c: &Classical, g: &[usize]) -> f64 {
    let b = DVector::from_iterator(g.len(), g.iter().map(|&j| c.beta[j]));
    let v = DMatrix::from_fn(g.len(), g.len(), |a, b| c.cov[(g[a], g[b])]);
    (b.transpose() * v.try_inverse().unwrap() * &b)[(0, 0)]
}

fn instance(seed: u64) -> (Dataset, OlsFit, Vec<usize>) {
    let mut r = rng(seed);
    let n = r.random_range(20..50);
    let data = contaminated_dataset(&mut r, n, 4, 0, 0.0);
    let drop = r.random_range(0..4);
    let rows: Vec<usize> = (drop..n).collect();
    let fit = fit_ols(&data, &rows).unwrap();
    (data, fit, rows)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * (1.0 + b.abs())
}

#[test]
fn whole_space_z_test_is_classical() {
    let sigma = 1.3;
    let std = Normal::standard();
    let q = std.inverse_cdf(1.0 - ALPHA / 2.0);
    for seed in 0..20 {
        let (data, fit, rows) = instance(seed);
        let c = classical(&data, &rows);
        let event = SelectionEvent::whole_space(data.n());
        for j in 0..data.p() {
            let spec = make_contrast(&fit, ContrastKind::Coefficient(j), &data, sigma).unwrap();
            assert!(close(spec.nu_norm.powi(2), c.cov[(j, j)]));
            let se = sigma * c.cov[(j, j)].sqrt();
            let z = c.beta[j] / se;
            let inf = selective_z_inference(&spec, &event, ALPHA).unwrap();
            assert!(inf.truncation.is_real_line());
            assert!(close(inf.statistic, z));
            assert!(close(inf.p_value, 2.0 * std.sf(z.abs())), "seed {seed}, j {j}");
            assert!(close(inf.ci.0, c.beta[j] - q * se), "{} vs {}", inf.ci.0, c.beta[j] - q * se);
            assert!(close(inf.ci.1, c.beta[j] + q * se));
        }
    }
}

#[test]
fn whole_space_chi2_and_f_are_classical() {
    let sigma = 0.8;
    for seed in 0..20 {
        let (data, fit, rows) = instance(100 + seed);
        let c = classical(&data, &rows);
        let event = SelectionEvent::whole_space(data.n());
        for g in [vec![1], vec![1, 2], vec![1, 2, 3], vec![0, 3]] {
            let w = wald(&c, &g);
            let k = g.len() as f64;

            let chi = group_chi2_test(&fit, &data, &g, &event, sigma).unwrap();
            let stat = w / (sigma * sigma);
            assert!(close(chi.statistic, stat));
            assert!(chi.truncation == IntervalSet::nonnegative());
            let p = ChiSquared::new(k).unwrap().sf(stat);
            assert!(close(chi.p_value, p), "seed {seed}, g {g:?}: {} vs {p}", chi.p_value);
            assert_eq!(chi.p_value, chi.naive_p);

            let f = selective_f_test(&fit, &data, &g, &event).unwrap();
            let fstat = w / k / c.s2;
            assert!(close(f.statistic, fstat));
            assert!(f.truncation == IntervalSet::nonnegative());
            let p = FisherSnedecor::new(k, c.df).unwrap().sf(fstat);
            assert!(close(f.p_value, p), "seed {seed}, g {g:?}: {} vs {p}", f.p_value);
            assert_eq!(f.p_value, f.naive_p);
        }
    }
}

#[test]
fn naive_t_is_classical_and_matches_single_coefficient_f() {
    for seed in 0..20 {
        let (data, fit, rows) = instance(200 + seed);
        let c = classical(&data, &rows);
        let t_dist = StudentsT::new(0.0, 1.0, c.df).unwrap();
        let q = t_dist.inverse_cdf(1.0 - ALPHA / 2.0);
        let event = SelectionEvent::whole_space(data.n());
        for j in 0..data.p() {
            let se = (c.s2 * c.cov[(j, j)]).sqrt();
            let t = c.beta[j] / se;
            let naive = naive_coefficient(&fit, &data, j, ALPHA).unwrap();
            assert!(close(naive.statistic, t));
            assert!(close(naive.p_value, 2.0 * t_dist.sf(t.abs())));
            assert!(close(naive.ci.0, c.beta[j] - q * se) && close(naive.ci.1, c.beta[j] + q * se));
            let f = selective_f_test(&fit, &data, &[j], &event).unwrap();
            assert!(close(f.statistic, t * t));
            assert!(close(f.p_value, naive.p_value));
        }
    }
}

fn mirrored(set: &IntervalSet) -> IntervalSet {
    IntervalSet::from_pairs(&set.to_pairs().iter().map(|&(a, b)| (-b, -a)).collect::<Vec<_>>())
}

#[test]
fn single_coefficient_chi2_is_sign_conditioned_z() {
    let sigma = 1.0;
    let mut checked = 0;
    let mut truncated = 0;
    for seed in 0..60u64 {
        let mut r = rng(300 + seed);
        let data = contaminated_dataset(&mut r, 30, 3, 3, 5.0);
        let Ok(det) = detect_cooks(&data, 3.0) else { continue };
        let fit = fit_ols(&data, &det.kept).unwrap();
        for j in 0..3 {
            let spec = make_contrast(&fit, ContrastKind::Coefficient(j), &data, sigma).unwrap();
            let z = spec.statistic;
            let set = z_truncation_set(&spec, &det.event).unwrap();
            let oriented = if z >= 0.0 { set } else { mirrored(&set) };
            let half = oriented.intersect(&IntervalSet::nonnegative());
            let want = TruncatedDistribution::new(Family::Normal { mean: 0.0 }, &half).unwrap().sf(z.abs());
            let chi = group_chi2_test(&fit, &data, &[j], &det.event, sigma).unwrap();
            assert!(close(chi.statistic, z * z));
            assert!((chi.p_value - want).abs() < TOL, "seed {seed}, j {j}: {} vs {want}", chi.p_value);
            let squared = half.map_increasing(|x| x * x);
            for (a, b) in chi.truncation.to_pairs().iter().zip(squared.to_pairs()) {
                assert!(close(a.0, b.0) && (a.1 == b.1 || close(a.1, b.1)));
            }
            if !half.is_empty() && half != IntervalSet::nonnegative() {
                truncated += 1;
            }
            checked += 1;
        }
    }
    assert!(checked >= 100 && truncated >= 20, "checked {checked}, truncated {truncated}");
}

#[test]
fn whole_space_prediction_interval_is_conservative() {
    let sigma = 1.0;
    let (data, fit, _) = instance(7);
    let event = SelectionEvent::whole_space(data.n());
    let x0 = DVector::from_vec(vec![1.0, 0.3, -0.5, 1.2]);
    let spec = make_contrast(&fit, ContrastKind::Surface(x0), &data, sigma).unwrap();
    let pi = prediction_interval(&spec, &event, ALPHA).unwrap();
    let q = Normal::standard().inverse_cdf(1.0 - ALPHA / 2.0);
    let exact_half = q * sigma * (1.0 + spec.nu_norm.powi(2)).sqrt();
    assert!(pi.lo < spec.estimate && spec.estimate < pi.hi);
    assert!(pi.hi - pi.lo >= 2.0 * exact_half);
    assert!(pi.alpha_mean > 0.0 && pi.alpha_mean < ALPHA);
    let mean_only = selective_z_inference(&spec, &event, ALPHA).unwrap();
    assert!(pi.hi - pi.lo > mean_only.ci.1 - mean_only.ci.0);
}
