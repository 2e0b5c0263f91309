//! Cross-L properties of the optimizer output.

use poset_ramsey::certifier;
use poset_ramsey::layers::{LayerSchedule, ParamVector};
use poset_ramsey::optimizer::{optimize, OptimizerConfig};

fn solve(layers: usize) -> (f64, ParamVector) {
    let schedule = LayerSchedule::uniform(layers).unwrap();
    let config = OptimizerConfig {
        restarts: 1,
        ..OptimizerConfig::default()
    };
    let result = optimize(&schedule, &config);
    assert!(result.verified, "L = {layers} must verify");
    (result.best_c_total, result.best_params)
}

#[test]
fn best_c_total_is_monotone_in_layer_count() {
    let mut prev = 0.0;
    for layers in 1..=10usize {
        let (c_total, _) = solve(layers);
        assert!(
            c_total >= prev - 1e-9,
            "L = {layers}: {c_total} < {prev}"
        );
        assert!(c_total < 1.0);
        prev = c_total;
    }
}

#[test]
fn shrunk_embedding_into_one_more_layer_stays_feasible() {
    // The layer fractions carry denominator 2L+1, so an L-solution cannot be
    // copied into the L+1 schedule verbatim, and the entropy margins do not
    // scale linearly either. What does survive: some strictly positive
    // multiple of the solution, padded with a zero layer, certifies under
    // the finer schedule.
    for layers in 1..=5usize {
        let (_, params) = solve(layers);
        let schedule = LayerSchedule::uniform(layers + 1).unwrap();
        let embed = |theta: f64| {
            let mut c: Vec<f64> = params.c.iter().map(|v| v * theta).collect();
            let mut h: Vec<f64> = params.h.iter().map(|v| v * theta).collect();
            c.push(0.0);
            h.push(0.0);
            ParamVector { c, h }
        };
        let verified = |theta: f64| {
            certifier::certify(&schedule, &embed(theta), 1e-9)
                .unwrap()
                .verified
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if verified(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(lo > 0.1, "L = {layers}: embedded scaling collapsed to {lo}");
        assert!(verified(lo));
    }
}
