mod common;

use common::{contaminated_dataset, normal, rng};
use nalgebra::DVector;
use selout::detection::{soft_ipod_event, soft_ipod_objective, solve_soft_ipod};
use selout::Dataset;

fn signs(u: &DVector<f64>) -> Vec<i8> {
    u.iter().map(|&v| if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 }).collect()
}

fn resolve_signs(data: &Dataset, y: DVector<f64>, lambda: f64) -> Vec<i8> {
    let fit = solve_soft_ipod(&data.with_response(y).unwrap(), lambda).unwrap();
    signs(&fit.u)
}

#[test]
fn event_membership_matches_resolving() {
    let mut r = rng(12);
    let (mut inside, mut outside, mut skipped) = (0, 0, 0);
    for (instance, lambda) in [0.08, 0.1, 0.12, 0.15].into_iter().enumerate() {
        let data = contaminated_dataset(&mut r, 30, 3, 3 + instance % 2, 5.0);
        let fit = solve_soft_ipod(&data, lambda).unwrap();
        let det = soft_ipod_event(&data, lambda, &fit).unwrap();
        let observed = signs(&fit.u);
        assert!(det.event.contains(data.y()));
        assert!(!det.outliers.is_empty(), "instance {instance} flags nothing");
        for k in 0..2500 {
            let scale = [0.05, 0.2, 0.6][k % 3];
            let y = data.y() + DVector::from_fn(30, |_, _| scale * normal(&mut r));
            if det.event.margin(&y).abs() < 1e-6 {
                skipped += 1;
                continue;
            }
            let member = det.event.contains(&y);
            let truth = resolve_signs(&data, y, lambda) == observed;
            assert_eq!(member, truth, "instance {instance}, perturbation {k}");
            if member {
                inside += 1;
            } else {
                outside += 1;
            }
        }
    }
    assert!(inside > 1000 && outside > 1000, "inside {inside}, outside {outside}");
    assert!(skipped < 100, "{skipped} perturbations on the boundary");
}

#[test]
fn solution_beats_perturbed_candidates() {
    let mut r = rng(8);
    let data = contaminated_dataset(&mut r, 25, 3, 2, 6.0);
    let lambda = 0.1;
    let fit = solve_soft_ipod(&data, lambda).unwrap();
    let best = soft_ipod_objective(&data, lambda, &fit.beta, &fit.u);
    for _ in 0..2000 {
        let db = DVector::from_fn(3, |_, _| 0.01 * normal(&mut r));
        let du = DVector::from_fn(25, |_, _| 0.01 * normal(&mut r));
        let other = soft_ipod_objective(&data, lambda, &(&fit.beta + db), &(&fit.u + du));
        assert!(other >= best - 1e-12);
    }
}
