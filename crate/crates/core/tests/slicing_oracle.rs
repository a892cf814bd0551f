mod common;

use common::{contaminated_dataset, f_check, line_check, random_cooks_instance, rng, Rule};
use rand::Rng;
use selout::datasets::stackloss;
use selout::detection::{detect_cooks, detect_dffits};

const TOL: f64 = 1e-4;

#[test]
fn cooks_line_slices_match_recomputation() {
    let mut r = rng(2024);
    let mut done = 0;
    let mut endpoints = 0;
    while done < 100 {
        let Some((data, det, lambda, j)) = random_cooks_instance(&mut r) else { continue };
        let check = line_check(&data, &det, Rule::Cooks(lambda), j, &mut r);
        assert!(
            check.passes(TOL),
            "instance {done}: endpoint error {:.3e}, {} probe mismatches",
            check.endpoint_error,
            check.probe_mismatches
        );
        endpoints += check.endpoints;
        done += 1;
    }
    assert!(endpoints > 100, "only {endpoints} endpoints exercised");
}

#[test]
fn cooks_f_curve_slices_match_recomputation() {
    let mut r = rng(77);
    let mut done = 0;
    while done < 100 {
        let Some((data, det, lambda, j)) = random_cooks_instance(&mut r) else { continue };
        let check = f_check(&data, &det, Rule::Cooks(lambda), j, &mut r);
        assert!(
            check.passes(TOL),
            "instance {done}: endpoint error {:.3e}, {} probe mismatches",
            check.endpoint_error,
            check.probe_mismatches
        );
        done += 1;
    }
}

#[test]
fn dffits_slices_match_recomputation() {
    let mut r = rng(5);
    let mut done = 0;
    while done < 40 {
        let n = r.random_range(20..=40);
        let shifted = r.random_range(0..=3);
        let data = contaminated_dataset(&mut r, n, 3, shifted, 6.0);
        let c = 2.0 * (3.0 / n as f64).sqrt();
        let Ok(det) = detect_dffits(&data, c) else { continue };
        let j = r.random_range(0..3);
        let line = line_check(&data, &det, Rule::Dffits(c), j, &mut r);
        let curve = f_check(&data, &det, Rule::Dffits(c), j, &mut r);
        assert!(
            line.passes(TOL) && curve.passes(TOL),
            "instance {done}: line {:.3e}/{}, curve {:.3e}/{}",
            line.endpoint_error,
            line.probe_mismatches,
            curve.endpoint_error,
            curve.probe_mismatches
        );
        done += 1;
    }
}

#[test]
fn stackloss_air_flow_slice() {
    let data = stackloss();
    let det = detect_cooks(&data, 4.0).unwrap();
    let j = data.column_index("Air.Flow").unwrap();
    let mut r = rng(1);
    let line = line_check(&data, &det, Rule::Cooks(4.0), j, &mut r);
    let curve = f_check(&data, &det, Rule::Cooks(4.0), j, &mut r);
    assert!(line.passes(TOL), "line error {:.3e}", line.endpoint_error);
    assert!(curve.passes(TOL), "curve error {:.3e}", curve.endpoint_error);
}
