//! Command-line front end.
//!
//! `run` is the whole entry point; the binary is a one-line wrapper around
//! it so every code path stays testable in-process. Exit codes: 0 for
//! success or a verified result, 1 for unverified / infeasible / not found,
//! 2 for usage and I/O errors. Progress goes to standard error, results to
//! standard output.

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::certifier::{self, Certificate};
use crate::layers::{LayerSchedule, ParamVector};
use crate::optimizer::{self, OptimizerConfig};
use crate::oracle::{self, Colour, GroundSetInstance, LemmaSizes, SetFamily, SetMask};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "POSET_RAMSEY_OUT_DIR";

const EXIT_OK: i32 = 0;
const EXIT_UNVERIFIED: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "poset-ramsey",
    about = "Layered-colouring lower bounds for diagonal poset Ramsey numbers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the bound coefficient and write a certificate.
    Optimize(OptimizeArgs),
    /// Re-verify a stored certificate from its parameters alone.
    Certify(CertifyArgs),
    /// Print the table of named constants.
    Constants {
        #[arg(long)]
        json: bool,
    },
    /// Optimize over a range of layer counts and emit a CSV.
    Sweep(SweepArgs),
    /// Exact small-instance combinatorics.
    Oracle {
        #[command(subcommand)]
        op: OracleOp,
    },
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    layers: usize,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Certificate path; defaults to certificate-L<layers>.json in the
    /// default output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Override the stored verification threshold.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    layers_from: usize,
    #[arg(long)]
    layers_to: usize,
    /// Directory for per-L certificates and sweep.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum OracleOp {
    /// Enumerate the s-cone of a probe pair.
    SCone {
        #[arg(long)]
        ground_n: u32,
        /// Comma-separated elements, e.g. 1,2,3 (empty for the empty set).
        #[arg(long, default_value = "")]
        x: String,
        #[arg(long, default_value = "")]
        p: String,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        cap: u32,
    },
    /// Enumerate the t-cone of a probe pair.
    TCone {
        #[arg(long)]
        ground_n: u32,
        #[arg(long, default_value = "")]
        x: String,
        #[arg(long, default_value = "")]
        p: String,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        floor: u32,
    },
    /// Complement a family (JSON file) in {1..N}.
    Dualize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        ground_n: u32,
    },
    /// Sample a pivot family at a level with inclusion probability q.
    Sample {
        #[arg(long)]
        ground_n: u32,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check two families (JSON files) against the pivot-lemma conditions.
    Check {
        #[arg(long)]
        s1: PathBuf,
        #[arg(long)]
        t1: PathBuf,
        #[arg(long)]
        ground_n: u32,
        #[arg(long)]
        n: u32,
    },
    /// Search a colouring spec (JSON file) for a monochromatic n-cube.
    FindCopy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        n: u32,
    },
}

/// Parse and dispatch; never panics on user input.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.exit_code() == 0 { EXIT_OK } else { EXIT_USAGE };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Optimize(args) => cmd_optimize(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Constants { json } => cmd_constants(json),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Oracle { op } => cmd_oracle(op),
    }
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn check_writable(path: &Path) -> Result<(), String> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if !dir.is_dir() {
        return Err(format!("output directory {} does not exist", dir.display()));
    }
    let probe = tempfile::NamedTempFile::new_in(&dir)
        .map_err(|e| format!("output directory {} is not writable: {e}", dir.display()))?;
    drop(probe);
    Ok(())
}

fn run_optimize(
    layers: usize,
    restarts: usize,
    epsilon: f64,
    seed: Option<u64>,
) -> Result<Certificate, String> {
    let schedule = LayerSchedule::uniform(layers).map_err(|e| e.to_string())?;
    let config = OptimizerConfig {
        restarts,
        epsilon,
        seed: seed.unwrap_or(0),
        jitter: seed.is_some(),
        ..OptimizerConfig::default()
    };
    let result = optimizer::optimize(&schedule, &config);
    for (restart, c_total, verified) in &result.history {
        eprintln!("restart {restart}: c_total = {c_total:.6}, verified = {verified}");
    }
    certifier::certify(&schedule, &result.best_params, epsilon).map_err(|e| e.to_string())
}

fn cmd_optimize(args: OptimizeArgs) -> Result<i32, String> {
    let out = args
        .out
        .unwrap_or_else(|| default_out_dir().join(format!("certificate-L{}.json", args.layers)));
    check_writable(&out)?;
    let cert = run_optimize(args.layers, args.restarts, args.epsilon, args.seed)?;
    cert.write_to(&out).map_err(|e| e.to_string())?;
    println!(
        "L = {}, c_total = {:.10}, verified = {}, certificate = {}",
        args.layers,
        cert.c_total,
        cert.verified,
        out.display()
    );
    Ok(if cert.verified { EXIT_OK } else { EXIT_UNVERIFIED })
}

fn cmd_certify(args: CertifyArgs) -> Result<i32, String> {
    let stored = Certificate::read_from(&args.input).map_err(|e| e.to_string())?;
    let epsilon = args.epsilon.unwrap_or(stored.epsilon);
    let schedule = LayerSchedule::uniform(stored.num_layers).map_err(|e| e.to_string())?;
    let fresh =
        certifier::certify(&schedule, &stored.params, epsilon).map_err(|e| e.to_string())?;

    // Verification trusts only the parameters; stored margins are compared
    // so tampering is visible.
    let mut margins_match = true;
    let pairs = [
        ("intersection", &stored.margins.intersection, &fresh.margins.intersection),
        ("probability", &stored.margins.probability, &fresh.margins.probability),
        ("room_for_h", &stored.margins.room_for_h, &fresh.margins.room_for_h),
        ("t_below_top", &stored.margins.t_below_top, &fresh.margins.t_below_top),
        ("subfamily", &stored.margins.subfamily, &fresh.margins.subfamily),
    ];
    for (name, stored_vals, fresh_vals) in pairs {
        for (i, (&a, &b)) in stored_vals.iter().zip(fresh_vals).enumerate() {
            if (a - b).abs() > 1e-12 {
                margins_match = false;
                println!("margin mismatch: {name}[{i}] stored {a:.16e}, recomputed {b:.16e}");
            }
        }
    }
    if fresh.precision_warning {
        eprintln!("warning: double and extended precision disagree on a margin sign");
    }
    println!(
        "L = {}, c_total = {:.10}, verified = {}",
        fresh.num_layers, fresh.c_total, fresh.verified
    );
    Ok(if fresh.verified && margins_match {
        EXIT_OK
    } else {
        EXIT_UNVERIFIED
    })
}

fn cmd_constants(json: bool) -> Result<i32, String> {
    let table = certifier::paper_constants();
    if json {
        let rows: Vec<serde_json::Value> = table
            .entries
            .iter()
            .map(|e| {
                serde_json::json!({
                    "name": e.name,
                    "value": e.value,
                    "paper_value": e.paper_value,
                    "tolerance": e.tolerance,
                    "pass": e.passes(),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&rows).map_err(|e| e.to_string())?);
    } else {
        println!(
            "{:<20} {:>20} {:>14} {:>10} {:>6}",
            "name", "value", "paper", "tol", "pass"
        );
        for e in &table.entries {
            println!(
                "{:<20} {:>20.12} {:>14.6} {:>10.0e} {:>6}",
                e.name,
                e.value,
                e.paper_value,
                e.tolerance,
                if e.passes() { "yes" } else { "NO" }
            );
        }
    }
    Ok(if table.all_pass() { EXIT_OK } else { EXIT_UNVERIFIED })
}

fn cmd_sweep(args: SweepArgs) -> Result<i32, String> {
    let SweepArgs {
        layers_from,
        layers_to,
        out,
        jobs,
        restarts,
        epsilon,
        seed,
    } = args;
    if layers_from > layers_to {
        return Err("--layers-from must not exceed --layers-to".into());
    }
    let jobs = jobs.max(1);
    let out_dir = out.unwrap_or_else(default_out_dir);
    if !out_dir.is_dir() {
        std::fs::create_dir_all(&out_dir)
            .map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    }
    check_writable(&out_dir.join("sweep.csv"))?;

    let range: Vec<usize> = (layers_from..=layers_to).collect();
    let mut rows: Vec<(usize, f64, bool, f64)> = Vec::with_capacity(range.len());
    std::thread::scope(|scope| -> Result<(), String> {
        for chunk in range.chunks(jobs) {
            let mut handles = Vec::with_capacity(chunk.len());
            for &layers in chunk {
                let out_dir = &out_dir;
                handles.push((
                    layers,
                    scope.spawn(move || -> Result<(f64, bool, f64), String> {
                        let start = Instant::now();
                        let cert = run_optimize(layers, restarts, epsilon, seed)?;
                        let path = out_dir.join(format!("certificate-L{layers}.json"));
                        cert.write_to(&path).map_err(|e| e.to_string())?;
                        Ok((cert.c_total, cert.verified, start.elapsed().as_secs_f64()))
                    }),
                ));
            }
            for (layers, handle) in handles {
                let (c_total, verified, seconds) =
                    handle.join().map_err(|_| "worker panicked".to_string())??;
                eprintln!("L = {layers} done in {seconds:.2}s");
                rows.push((layers, c_total, verified, seconds));
            }
        }
        Ok(())
    })?;
    rows.sort_by_key(|r| r.0);

    let mut csv = String::from("L,c_total,verified,seconds\n");
    for (layers, c_total, verified, seconds) in &rows {
        csv.push_str(&format!("{layers},{c_total:.10},{verified},{seconds:.3}\n"));
    }
    print!("{csv}");
    std::fs::write(out_dir.join("sweep.csv"), &csv).map_err(|e| e.to_string())?;
    Ok(if rows.iter().all(|r| r.2) {
        EXIT_OK
    } else {
        EXIT_UNVERIFIED
    })
}

fn parse_elems(text: &str) -> Result<SetMask, String> {
    let mut mask: SetMask = 0;
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let e: u32 = part
            .trim()
            .parse()
            .map_err(|_| format!("bad element {part:?}"))?;
        if !(1..=32).contains(&e) {
            return Err(format!("element {e} out of range 1..=32"));
        }
        mask |= 1 << (e - 1);
    }
    Ok(mask)
}

fn read_family(path: &Path) -> Result<SetFamily, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn print_family(family: &SetFamily) -> Result<(), String> {
    println!(
        "{}",
        serde_json::to_string(family).map_err(|e| e.to_string())?
    );
    Ok(())
}

fn cmd_oracle(op: OracleOp) -> Result<i32, String> {
    match op {
        OracleOp::SCone {
            ground_n,
            x,
            p,
            level,
            cap,
        } => {
            let instance = GroundSetInstance {
                big_n: ground_n,
                x: parse_elems(&x)?,
                p: parse_elems(&p)?,
                s: level,
                t: 0,
                s_cap: cap,
                t_floor: 0,
            };
            let cone = oracle::enumerate_s_cone(&instance).map_err(|e| e.to_string())?;
            print_family(&cone)?;
            Ok(EXIT_OK)
        }
        OracleOp::TCone {
            ground_n,
            x,
            p,
            level,
            floor,
        } => {
            let instance = GroundSetInstance {
                big_n: ground_n,
                x: parse_elems(&x)?,
                p: parse_elems(&p)?,
                s: 0,
                t: level,
                s_cap: 0,
                t_floor: floor,
            };
            let cone = oracle::enumerate_t_cone(&instance).map_err(|e| e.to_string())?;
            print_family(&cone)?;
            Ok(EXIT_OK)
        }
        OracleOp::Dualize { input, ground_n } => {
            let family = read_family(&input)?;
            let dual = oracle::dualize(&family, ground_n).map_err(|e| e.to_string())?;
            print_family(&dual)?;
            Ok(EXIT_OK)
        }
        OracleOp::Sample {
            ground_n,
            level,
            q,
            seed,
        } => {
            if !(0.0..=1.0).contains(&q) {
                return Err(format!("q = {q} is not a probability"));
            }
            let family =
                oracle::sample_pivot_family(ground_n, level, q, seed).map_err(|e| e.to_string())?;
            print_family(&family)?;
            Ok(EXIT_OK)
        }
        OracleOp::Check { s1, t1, ground_n, n } => {
            let s_family = read_family(&s1)?;
            let t_family = read_family(&t1)?;
            let sizes = LemmaSizes::lemma_four(ground_n, n);
            let verdict =
                oracle::check_pivot_conditions(&s_family, &t_family, ground_n, n, &sizes)
                    .map_err(|e| e.to_string())?;
            println!(
                "cross_containment = {}, condition_one = {}, condition_two = {}, pass = {}",
                verdict.cross_containment,
                verdict.condition_one,
                verdict.condition_two,
                verdict.pass()
            );
            Ok(if verdict.pass() { EXIT_OK } else { EXIT_UNVERIFIED })
        }
        OracleOp::FindCopy { input, n } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| format!("cannot read {}: {e}", input.display()))?;
            let spec: oracle::ColouringSpec =
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", input.display()))?;
            let big_n = spec.big_n;
            let colouring = oracle::build_colouring(spec).map_err(|e| e.to_string())?;
            let found = oracle::find_monochromatic_copy(|a| colouring.colour(a), big_n, n)
                .map_err(|e| e.to_string())?;
            match found {
                Some(copy) => {
                    let images: Vec<Vec<u32>> = copy
                        .embedding
                        .images()
                        .iter()
                        .map(|&m| oracle::elems_from_mask(m))
                        .collect();
                    let colour = match copy.colour {
                        Colour::Blue => "blue",
                        Colour::Red => "red",
                    };
                    println!(
                        "{}",
                        serde_json::json!({
                            "colour": colour,
                            "x": oracle::elems_from_mask(copy.x),
                            "images": images,
                        })
                    );
                    Ok(EXIT_OK)
                }
                None => {
                    println!("none");
                    Ok(EXIT_UNVERIFIED)
                }
            }
        }
    }
}

/// Certify an in-memory parameter vector at the CLI's default settings;
/// exposed for examples and tests.
pub fn certify_params(
    layers: usize,
    params: &ParamVector,
    epsilon: f64,
) -> Result<Certificate, String> {
    let schedule = LayerSchedule::uniform(layers).map_err(|e| e.to_string())?;
    certifier::certify(&schedule, params, epsilon).map_err(|e| e.to_string())
}
