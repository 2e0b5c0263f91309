//! The c-vs-L curve for small layer counts, as CSV on standard output.

use poset_ramsey::layers::LayerSchedule;
use poset_ramsey::optimizer::{optimize, OptimizerConfig};
use std::time::Instant;

fn main() {
    println!("L,c_total,verified,seconds");
    for layers in 1..=6usize {
        let start = Instant::now();
        let schedule = LayerSchedule::uniform(layers).unwrap();
        let config = OptimizerConfig {
            restarts: 1,
            ..OptimizerConfig::default()
        };
        let result = optimize(&schedule, &config);
        println!(
            "{layers},{:.10},{},{:.3}",
            result.best_c_total,
            result.verified,
            start.elapsed().as_secs_f64()
        );
    }
}
