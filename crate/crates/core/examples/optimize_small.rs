//! Maximize the bound coefficient for a small layer count.
//!
//! ```text
//! cargo run --release --example optimize_small -- [layers]
//! ```

use poset_ramsey::layers::LayerSchedule;
use poset_ramsey::optimizer::{optimize, OptimizerConfig};

fn main() {
    let layers: usize = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("layers must be an integer"))
        .unwrap_or(3);
    let schedule = LayerSchedule::uniform(layers).expect("valid layer count");
    let result = optimize(&schedule, &OptimizerConfig::default());

    println!("L = {layers}");
    for (i, (c, h)) in result
        .best_params
        .c
        .iter()
        .zip(&result.best_params.h)
        .enumerate()
    {
        println!("  layer {i}: c = {c:.6}, h = {h:.6}");
    }
    println!("c_total = {:.10}", result.best_c_total);
    println!("verified = {}", result.verified);
    println!(
        "bound: R(Q_n, Q_n) > {:.4} n + k for large n",
        2.0 + result.best_c_total
    );
}
