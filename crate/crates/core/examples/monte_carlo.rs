//! Seeded Monte Carlo check of the pivot-sampling expectation identity
//! E |K ∩ T| = |K| q at toy scale.

use poset_ramsey::oracle::{mask_from_elems, sample_pivot_family};

fn main() {
    let cone = [
        mask_from_elems(&[1, 2]),
        mask_from_elems(&[1, 3]),
        mask_from_elems(&[2, 3]),
    ];
    let q = 0.525;
    let trials = 50_000u64;
    let mut total = 0u64;
    for seed in 0..trials {
        let family = sample_pivot_family(4, 2, q, seed).unwrap();
        total += cone.iter().filter(|&&m| family.contains(m)).count() as u64;
    }
    let mean = total as f64 / trials as f64;
    let expect = cone.len() as f64 * q;
    let se = (cone.len() as f64 * q * (1.0 - q) / trials as f64).sqrt();
    println!("trials = {trials}");
    println!("empirical mean = {mean:.4}");
    println!("closed form    = {expect:.4}");
    println!("deviation      = {:.2} standard errors", (mean - expect).abs() / se);
}
