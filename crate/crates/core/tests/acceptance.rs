//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line. Run with `cargo test --test acceptance`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

use poset_ramsey::certifier::{self, Certificate};
use poset_ramsey::exponent;
use poset_ramsey::layers::{constraint_margins, LayerSchedule, ParamVector};
use poset_ramsey::optimizer::{self, OptimizerConfig};
use poset_ramsey::oracle::{self, Colour, GroundSetInstance, LemmaSizes};

struct Gate {
    label: &'static str,
}

impl Gate {
    fn new(label: &'static str) -> Self {
        Gate { label }
    }

    fn finish(self) {
        println!("[acceptance] {}: PASS", self.label);
    }
}

impl Drop for Gate {
    fn drop(&mut self) {
        if std::thread::panicking() {
            println!("[acceptance] {}: FAIL", self.label);
        }
    }
}

fn run_cli(args: &[&str]) -> i32 {
    let argv: Vec<String> = std::iter::once("poset-ramsey".to_string())
        .chain(args.iter().map(|s| s.to_string()))
        .collect();
    poset_ramsey::cli::run(&argv)
}

#[test]
fn criterion_1_headline_l150() {
    let gate = Gate::new("1 headline: L=150 verified with c_total > 0.70 in < 10 min");
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("certificate-L150.json");
    let code = run_cli(&["optimize", "--layers", "150", "--out", out.to_str().unwrap()]);
    let elapsed = start.elapsed().as_secs_f64();
    assert_eq!(code, 0, "optimize exited {code}");
    let cert = Certificate::read_from(&out).unwrap();
    assert!(cert.verified, "certificate not verified");
    assert!(cert.c_total > 0.70, "c_total = {}", cert.c_total);
    assert!(cert.c_total < 1.0, "limit bound violated: {}", cert.c_total);
    assert!(elapsed < 600.0, "took {elapsed:.1}s");
    gate.finish();
}

#[test]
fn criterion_2_six_layer_case() {
    let gate = Gate::new("2 six-layer: paper point certifies and optimize reaches 1/3");
    let schedule = LayerSchedule::uniform(1).unwrap();
    let params = ParamVector {
        c: vec![1.0 / 6.0],
        h: vec![0.05],
    };
    let cert = certifier::certify(&schedule, &params, 1e-6).unwrap();
    assert!(cert.verified, "paper parameters must certify");
    let result = optimizer::optimize(&schedule, &OptimizerConfig::default());
    assert!(result.verified);
    assert!(
        result.best_c_total >= 1.0 / 3.0,
        "c_total = {}",
        result.best_c_total
    );
    assert!(result.best_c_total < 1.0);
    gate.finish();
}

#[test]
fn criterion_3_constants_table() {
    let gate = Gate::new("3 constants: all eight rows within 1e-4");
    let table = certifier::paper_constants();
    assert_eq!(table.entries.len(), 8);
    for entry in &table.entries {
        assert!(
            entry.passes(),
            "{}: {} vs {} (tol {})",
            entry.name,
            entry.value,
            entry.paper_value,
            entry.tolerance
        );
    }
    let get = |n: &str| table.entries.iter().find(|e| e.name == n).unwrap().value;
    assert!(get("neighbourhood_base") <= 1.9041 + 1e-4);
    assert!(get("expectation_base") > 1.0068);
    assert!(get("bad_base") <= 0.9997);
    assert!(get("subfamily_base") >= 1.0002);
    assert_eq!(get("pivot_probability"), 0.525);
    gate.finish();
}

#[test]
fn criterion_4_limit_bound() {
    let gate = Gate::new("4 limit bound: 1000 certified-feasible vectors respect (2L/(2L+1))^2");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0usize;
    for layers in 1..=10usize {
        let schedule = LayerSchedule::uniform(layers).unwrap();
        let bound = {
            let l = layers as f64;
            (2.0 * l / (2.0 * l + 1.0)).powi(2)
        };
        for _ in 0..100 {
            // Random direction, scaled to the largest certifiable multiple,
            // then drawn back by a random factor.
            let c_dir: Vec<f64> = (0..layers).map(|_| rng.gen::<f64>()).collect();
            let h_dir: Vec<f64> = (0..layers).map(|_| rng.gen::<f64>() * 0.3).collect();
            let at = |theta: f64| ParamVector {
                c: c_dir.iter().map(|v| v * theta).collect(),
                h: h_dir.iter().map(|v| v * theta).collect(),
            };
            let certifiable = |theta: f64| {
                constraint_margins(&schedule, &at(theta))
                    .map(|m| m.certifiable(1e-6))
                    .unwrap_or(false)
            };
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if certifiable(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mut theta = lo * rng.gen::<f64>();
            let mut cert = certifier::certify(&schedule, &at(theta), 1e-6).unwrap();
            while !cert.verified && theta > 1e-12 {
                theta *= 0.5;
                cert = certifier::certify(&schedule, &at(theta), 1e-6).unwrap();
            }
            assert!(cert.verified, "sampling failed to produce a feasible vector");
            let total = cert.c_total + 2.0 * cert.params.h.iter().sum::<f64>();
            assert!(
                total <= bound,
                "L={layers}: c + 2 sum h = {total} > {bound}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 1000);
    gate.finish();
}

#[test]
fn criterion_5_exact_oracle_suite() {
    let gate = Gate::new("5 oracle: cones, duality, normalization, trivial colouring");

    // Forced-regime cone counts equal C(n, n/3).
    for n in [3u32, 6] {
        let big_n = n + n / 3 + 1;
        let x = (1u32 << n) - 1;
        let p = ((1u32 << (n + n / 3)) - 1) ^ x;
        let instance = GroundSetInstance {
            big_n,
            x,
            p,
            s: 2 * n / 3,
            t: 0,
            s_cap: n / 3,
            t_floor: 0,
        };
        let cone = oracle::enumerate_s_cone(&instance).unwrap();
        let expect: u64 = match n {
            3 => 3,
            _ => 15,
        };
        assert_eq!(cone.len() as u64, expect, "n = {n}");
    }

    // Duality round-trip and the Lemma-4 <-> Lemma-5 verdict equivalence on
    // sampled families at every even N <= 8 admitting the sizes.
    for (big_n, n) in [(4u32, 3u32), (6, 3), (8, 3), (8, 6)] {
        let sizes = LemmaSizes::lemma_four(big_n, n);
        for seed in 0..3u64 {
            let s_level = n.div_ceil(2);
            let s1 = oracle::sample_pivot_family(big_n, s_level, 0.4, seed).unwrap();
            let t1 = oracle::sample_pivot_family(big_n, big_n / 2, 0.4, 77 + seed).unwrap();
            assert_eq!(
                oracle::dualize(&oracle::dualize(&s1, big_n).unwrap(), big_n).unwrap(),
                s1
            );
            let direct = oracle::check_pivot_conditions(&s1, &t1, big_n, n, &sizes).unwrap();
            let dual = oracle::check_pivot_conditions(
                &oracle::dualize(&t1, big_n).unwrap(),
                &oracle::dualize(&s1, big_n).unwrap(),
                big_n,
                n,
                &sizes.dual(big_n, n),
            )
            .unwrap();
            assert_eq!(direct.cross_containment, dual.cross_containment);
            assert_eq!(direct.condition_one, dual.condition_two);
            assert_eq!(direct.condition_two, dual.condition_one);
        }
    }

    // Normalization postconditions on 100 random 2-cube -> 4-cube embeddings.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut found = 0;
    while found < 100 {
        let images: Vec<u32> = (0..4).map(|_| rng.gen::<u32>() & 0xF).collect();
        let phi = oracle::EmbeddingMap::new(2, images);
        if phi.validate(4).is_err() {
            continue;
        }
        found += 1;
        let norm = oracle::normalize_embedding(&phi, 4).unwrap();
        assert_eq!(norm.x.count_ones(), 2);
        for source in 0..4u32 {
            let expected: u32 = norm
                .anchors
                .iter()
                .enumerate()
                .filter(|(i, _)| source >> i & 1 == 1)
                .map(|(_, &e)| 1 << (e - 1))
                .sum();
            assert_eq!(norm.phi_prime.image(source) & norm.x, expected);
            assert_eq!(norm.phi_prime.image(source), phi.image(source));
        }
    }

    // The trivial colouring of the 3-cube has no monochromatic 2-cube.
    let colour = |a: u32| {
        if a.count_ones() <= 1 {
            Colour::Blue
        } else {
            Colour::Red
        }
    };
    assert_eq!(oracle::find_monochromatic_copy(colour, 3, 2).unwrap(), None);
    gate.finish();
}

#[test]
fn criterion_6_numeric_property_suite() {
    let gate = Gate::new("6 numerics: entropy laws, Stirling sandwich, binomial estimate");
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10_000 {
        let c = 0.1 + 3.0 * rng.gen::<f64>();
        let d = rng.gen::<f64>() * c;
        let f = |cc: f64, dd: f64| exponent::entropy_log(cc, dd).unwrap().value;
        // Symmetry around the midpoint.
        assert!((f(c, d) - f(c, c - d)).abs() < 1e-9 * (1.0 + f(c, d).abs()));
        // Homogeneity of degree one.
        let t = 0.5 + 2.0 * rng.gen::<f64>();
        assert!((f(t * c, t * d) - t * f(c, d)).abs() < 1e-8 * (1.0 + t * f(c, d).abs()));
        // Monotone up to the midpoint.
        let lo = d.min(c - d);
        let hi = 0.5 * (lo + c / 2.0);
        assert!(f(c, hi) >= f(c, lo) - 1e-12);
    }

    let mut prev = f64::INFINITY;
    for n in 1..=50u64 {
        let ratio = exponent::stirling_ratio(n);
        assert!(ratio >= (2.0 * std::f64::consts::PI).sqrt());
        assert!(ratio <= std::f64::consts::E);
        assert!(ratio < prev, "not strictly decreasing at n = {n}");
        prev = ratio;
    }

    for n in 2..=30u64 {
        let nf = n as f64;
        for j in 1..n {
            let exact = exponent::ln_biguint(&exponent::exact_binomial(n, j as i64)) / nf;
            let estimate = exponent::entropy_log(1.0, j as f64 / nf).unwrap().value;
            assert!(
                (exact - estimate).abs() <= (nf.ln() + 2.0) / nf,
                "n={n} j={j}: |{exact} - {estimate}|"
            );
        }
    }
    gate.finish();
}

#[test]
fn criterion_7_monte_carlo_sanity() {
    let gate = Gate::new("7 monte carlo: expectation identity and Chernoff tail");

    // E |K ∩ T| = |K| q over 1e5 seeded trials; the cone is the full
    // 2-level of the 4-cube restricted to three members.
    let cone = [0b0011u32, 0b0101, 0b0110];
    let q = 0.525;
    let trials = 100_000u64;
    let mut total = 0u64;
    for seed in 0..trials {
        let family = oracle::sample_pivot_family(4, 2, q, seed).unwrap();
        total += cone.iter().filter(|&&m| family.contains(m)).count() as u64;
    }
    let mean = total as f64 / trials as f64;
    let expect = cone.len() as f64 * q;
    let se = (cone.len() as f64 * q * (1.0 - q) / trials as f64).sqrt();
    assert!(
        (mean - expect).abs() <= 5.0 * se,
        "mean {mean}, expect {expect}, se {se}"
    );

    // Chernoff direction: the family size is Bin(126, 0.2) with mean 25.2;
    // the lower-tail frequency at mu/2 stays within exp(-mu/8) + 3 SE.
    let level_count = 126.0;
    let q2 = 0.2;
    let mu = level_count * q2;
    assert!(mu >= 20.0);
    let tail_trials = 10_000u64;
    let mut tail_hits = 0u64;
    for seed in 0..tail_trials {
        let family = oracle::sample_pivot_family(9, 4, q2, 10_000 + seed).unwrap();
        if (family.len() as f64) <= mu / 2.0 {
            tail_hits += 1;
        }
    }
    let freq = tail_hits as f64 / tail_trials as f64;
    let bound = (-mu / 8.0).exp();
    let se_tail = (bound * (1.0 - bound) / tail_trials as f64).sqrt();
    assert!(
        freq <= bound + 3.0 * se_tail,
        "tail freq {freq}, bound {bound}, se {se_tail}"
    );
    gate.finish();
}
