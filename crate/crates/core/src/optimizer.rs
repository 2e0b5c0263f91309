//! Constrained maximization of the bound coefficient `c = 2 * sum c_i`.
//!
//! The solver is an augmented-Lagrangian local method over the box-bounded
//! variables `(c_1..c_L, h_1..h_L)`, with gradients taken by central finite
//! differences (step 1e-7, below the constraint margin scale of 1e-6). Each
//! restart warm-starts from the previous solution. After the smooth solve, a
//! deterministic coordinate-saturation pass pushes every `c_i` (and its
//! companion `h_i`) to the feasibility boundary at the configured strictness
//! margin. Results are only reported as `verified` after the margins pass the
//! certification predicate; if nothing verifies, the all-zeros baseline is
//! returned.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::layers::{constraint_margins, derive, LayerSchedule, ParamVector};

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub epsilon: f64,
    pub tolerance: f64,
    pub initial_c: f64,
    pub initial_h: f64,
    pub seed: u64,
    pub use_monotonicity_hints: bool,
    /// Seeded warm-start jitter of magnitude 1e-4; off by default.
    pub jitter: bool,
    pub c_upper: f64,
    pub h_upper: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 3,
            epsilon: 1e-6,
            tolerance: 1e-9,
            initial_c: 0.001,
            initial_h: 0.0001,
            seed: 0,
            use_monotonicity_hints: true,
            jitter: false,
            c_upper: 2.0,
            h_upper: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub best_c_total: f64,
    pub best_params: ParamVector,
    pub verified: bool,
    /// One entry per restart: (restart index, c_total, verified).
    pub history: Vec<(usize, f64, bool)>,
}

/// The paper-level objective `2 * sum c_i`.
pub fn objective(params: &ParamVector) -> f64 {
    2.0 * params.c.iter().sum::<f64>()
}

/// Schedule data flattened to f64 for the hot constraint loop.
struct Problem {
    num_layers: usize,
    bottom: Vec<f64>,
    top: Vec<f64>,
    red_level: Vec<f64>,
    red_climb: Vec<f64>,
    blue_level: Vec<f64>,
    blue_climb: Vec<f64>,
    epsilon: f64,
    hints: bool,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn entropy(c: f64, d: f64) -> f64 {
    if d <= 0.0 || d >= c {
        return 0.0;
    }
    c * c.ln() - d * d.ln() - (c - d) * (c - d).ln()
}

impl Problem {
    fn new(schedule: &LayerSchedule, config: &OptimizerConfig) -> Self {
        let num_layers = schedule.num_layers();
        let f = |x: crate::layers::Frac| *x.numer() as f64 / *x.denom() as f64;
        let lo = vec![0.0; 2 * num_layers];
        let mut hi = vec![config.c_upper; num_layers];
        hi.extend(vec![config.h_upper; num_layers]);
        Self {
            num_layers,
            bottom: schedule.rows().iter().map(|r| f(r.bottom)).collect(),
            top: schedule.rows().iter().map(|r| f(r.top)).collect(),
            red_level: schedule.rows().iter().map(|r| f(r.red_level)).collect(),
            red_climb: schedule.rows().iter().map(|r| f(r.red_climb)).collect(),
            blue_level: schedule.rows().iter().map(|r| f(r.blue_level)).collect(),
            blue_climb: schedule.rows().iter().map(|r| f(r.blue_climb)).collect(),
            epsilon: config.epsilon,
            hints: config.use_monotonicity_hints,
            lo,
            hi,
        }
    }

    fn num_constraints(&self) -> usize {
        let hints = if self.hints && self.num_layers > 1 {
            2 * (self.num_layers - 1)
        } else {
            0
        };
        3 * self.num_layers + hints
    }

    /// All inequality constraints as `g_j(x) >= 0`, strictness folded in.
    fn constraints(&self, x: &[f64], out: &mut [f64]) {
        let num_layers = self.num_layers;
        let (c, h) = x.split_at(num_layers);
        let ambient = 2.0 + 2.0 * c.iter().sum::<f64>();
        let mut c_prefix = 0.0;
        let mut j = 0;
        for i in 0..num_layers {
            let red_level = self.red_level[i];
            let red_climb = self.red_climb[i];
            let blue_level = self.blue_level[i];
            let s = self.bottom[i] + c_prefix + red_climb;
            let t = s + c[i] + h[i];
            let topvar = self.top[i] + c_prefix + c[i];

            // intersection
            out[j] = red_climb - red_climb * red_climb / (1.0 - red_level)
                - (c[i] + h[i])
                - self.epsilon;
            // probability
            let kt = entropy(blue_level, self.blue_climb[i])
                + entropy(ambient - topvar - 1.0 + blue_level, h[i]);
            let nt = entropy(ambient - s, t - s);
            out[j + 1] = kt - nt - self.epsilon;
            // room for h
            out[j + 2] = ambient - topvar - 1.0 + blue_level - h[i] - self.epsilon;
            j += 3;
            c_prefix += c[i];
        }
        if self.hints {
            for i in 0..num_layers.saturating_sub(1) {
                out[j] = c[i + 1] - c[i];
                out[j + 1] = h[i] - h[i + 1];
                j += 2;
            }
        }
    }

    /// Augmented Lagrangian value at `x`.
    fn phi(&self, x: &[f64], lambda: &[f64], mu: f64, g_buf: &mut [f64]) -> f64 {
        self.constraints(x, g_buf);
        let obj: f64 = -x[..self.num_layers].iter().sum::<f64>();
        let mut penalty = 0.0;
        for (&g, &l) in g_buf.iter().zip(lambda) {
            let shifted = l - mu * g;
            if shifted > 0.0 {
                penalty += (shifted * shifted - l * l) / (2.0 * mu);
            } else {
                penalty -= l * l / (2.0 * mu);
            }
        }
        obj + penalty
    }

    fn grad_phi(
        &self,
        x: &mut Vec<f64>,
        lambda: &[f64],
        mu: f64,
        g_buf: &mut [f64],
        grad: &mut [f64],
    ) {
        const STEP: f64 = 1e-7;
        for k in 0..x.len() {
            let orig = x[k];
            x[k] = orig + STEP;
            let up = self.phi(x, lambda, mu, g_buf);
            x[k] = orig - STEP;
            let down = self.phi(x, lambda, mu, g_buf);
            x[k] = orig;
            grad[k] = (up - down) / (2.0 * STEP);
        }
    }

    fn project(&self, x: &mut [f64]) {
        for (k, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lo[k], self.hi[k]);
        }
    }
}

/// Projected-gradient inner solve with Barzilai-Borwein steps and a
/// nonmonotone backtracking line search.
fn inner_solve(
    problem: &Problem,
    x: &mut Vec<f64>,
    lambda: &[f64],
    mu: f64,
    tol: f64,
    max_iters: usize,
) {
    let n = x.len();
    let mut g_buf = vec![0.0; problem.num_constraints()];
    let mut grad = vec![0.0; n];
    let mut prev_x = vec![0.0; n];
    let mut prev_grad = vec![0.0; n];
    let mut phi = problem.phi(x, lambda, mu, &mut g_buf);
    let mut recent = vec![phi; 1];
    let mut alpha = 1e-3;

    for iter in 0..max_iters {
        problem.grad_phi(x, lambda, mu, &mut g_buf, &mut grad);

        // Projected-gradient stationarity measure.
        let mut stat: f64 = 0.0;
        for k in 0..n {
            let moved = (x[k] - grad[k]).clamp(problem.lo[k], problem.hi[k]);
            stat = stat.max((moved - x[k]).abs());
        }
        if stat < tol {
            break;
        }

        if iter > 0 {
            // BB1 step length from the last pair of iterates.
            let mut sy = 0.0;
            let mut yy = 0.0;
            for k in 0..n {
                let s = x[k] - prev_x[k];
                let y = grad[k] - prev_grad[k];
                sy += s * y;
                yy += y * y;
            }
            if sy > 0.0 && yy > 0.0 {
                alpha = (sy / yy).clamp(1e-12, 1e4);
            }
        }
        prev_x.copy_from_slice(x);
        prev_grad.copy_from_slice(&grad);

        let ref_phi = recent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut step = alpha;
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial: Vec<f64> = (0..n)
                .map(|k| (prev_x[k] - step * grad[k]).clamp(problem.lo[k], problem.hi[k]))
                .collect();
            let trial_phi = problem.phi(&trial, lambda, mu, &mut g_buf);
            let mut decrease = 0.0;
            for k in 0..n {
                decrease += grad[k] * (prev_x[k] - trial[k]);
            }
            if trial_phi <= ref_phi - 1e-4 * decrease.max(0.0) && trial_phi <= ref_phi {
                std::mem::swap(x, &mut trial);
                phi = trial_phi;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        recent.push(phi);
        if recent.len() > 10 {
            recent.remove(0);
        }
    }
}

fn solve_augmented_lagrangian(problem: &Problem, x0: &[f64], tolerance: f64) -> Vec<f64> {
    let mut x = x0.to_vec();
    problem.project(&mut x);
    let m = problem.num_constraints();
    let mut lambda = vec![0.0; m];
    let mut mu = 10.0;
    let mut g = vec![0.0; m];
    let mut prev_violation = f64::INFINITY;
    let mut prev_obj = f64::INFINITY;

    let debug = std::env::var("POSET_RAMSEY_OPT_DEBUG").is_ok();
    for outer in 0..25 {
        let inner_tol = (tolerance * 10.0).max(1e-10) * if outer < 3 { 100.0 } else { 1.0 };
        inner_solve(problem, &mut x, &lambda, mu, inner_tol, 400);

        problem.constraints(&x, &mut g);
        let violation = g.iter().fold(0.0f64, |a, &b| a.max(-b));
        for (l, &gj) in lambda.iter_mut().zip(&g) {
            *l = (*l - mu * gj).max(0.0);
        }
        let obj: f64 = -x[..problem.num_layers].iter().sum::<f64>();
        if debug {
            eprintln!(
                "outer {outer}: obj2 {} violation {violation:.3e} mu {mu:.1e}",
                -2.0 * obj
            );
        }
        if violation <= tolerance && (prev_obj - obj).abs() < tolerance {
            break;
        }
        if violation > 0.25 * prev_violation && violation > tolerance {
            mu = (mu * 10.0).min(1e10);
        }
        prev_violation = violation;
        prev_obj = obj;
    }
    x
}

/// Push each `c_i` (choosing the best companion `h_i`) to the largest value
/// that keeps the full margin system certifiable at `epsilon`. Deterministic;
/// repeated sweeps stop once a sweep gains less than `tolerance`.
fn saturate(
    schedule: &LayerSchedule,
    params: &mut ParamVector,
    epsilon: f64,
    tolerance: f64,
    c_upper: f64,
    h_upper: f64,
) {
    let num_layers = schedule.num_layers();
    // Saturate against a slightly stricter threshold so the margins still
    // clear `epsilon` when re-evaluated in extended precision.
    let epsilon = epsilon + 1e-9;
    let certifiable = |p: &ParamVector| -> bool {
        p.within_bounds()
            && constraint_margins(schedule, p)
                .map(|m| m.certifiable(epsilon))
                .unwrap_or(false)
    };
    if !certifiable(params) {
        // Pull back toward the always-feasible origin by the largest
        // certifiable scaling (solver iterates often sit a hair below the
        // strictness margin).
        let scaled = |p: &ParamVector, theta: f64| ParamVector {
            c: p.c.iter().map(|v| v * theta).collect(),
            h: p.h.iter().map(|v| v * theta).collect(),
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if certifiable(&scaled(params, mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        *params = scaled(params, lo);
        if !certifiable(params) {
            *params = ParamVector::zeros(num_layers);
        }
    }

    // Largest feasible c_i for a fixed h_i, by bisection.
    let max_c = |p: &mut ParamVector, i: usize| -> f64 {
        let base = p.c[i];
        let mut lo = base;
        let mut hi = c_upper;
        p.c[i] = hi;
        if certifiable(p) {
            p.c[i] = base;
            return hi;
        }
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            p.c[i] = mid;
            if certifiable(p) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        p.c[i] = base;
        lo
    };

    for _sweep in 0..12 {
        let before = objective(params);
        for i in 0..num_layers {
            let (c0, h0) = (params.c[i], params.h[i]);
            let mut best = (c0, h0);
            // Golden-section over h_i on the (unimodal in practice) map
            // h -> largest feasible c_i.
            let inv_phi = 0.618_033_988_749_894_9;
            let h_cap = h_upper.min(self_h_cap(schedule, i));
            let (mut a, mut b) = (0.0, h_cap);
            let eval = |h: f64, p: &mut ParamVector| -> f64 {
                p.h[i] = h;
                let c = max_c(p, i);
                p.h[i] = h0;
                c
            };
            let mut x1 = b - inv_phi * (b - a);
            let mut x2 = a + inv_phi * (b - a);
            let mut f1 = eval(x1, params);
            let mut f2 = eval(x2, params);
            for _ in 0..24 {
                if f1 < f2 {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + inv_phi * (b - a);
                    f2 = eval(x2, params);
                } else {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - inv_phi * (b - a);
                    f1 = eval(x1, params);
                }
            }
            let (h_star, c_star) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            if c_star > best.0 {
                best = (c_star, h_star);
            }
            params.c[i] = best.0;
            params.h[i] = best.1;
            if !certifiable(params) {
                params.c[i] = c0;
                params.h[i] = h0;
            }
        }
        if objective(params) - before < tolerance.max(1e-12) {
            break;
        }
    }
}

/// Upper limit on useful h for layer `i`: the intersection cap.
fn self_h_cap(schedule: &LayerSchedule, i: usize) -> f64 {
    let row = &schedule.rows()[i];
    let f = |x: crate::layers::Frac| *x.numer() as f64 / *x.denom() as f64;
    let rc = f(row.red_climb);
    let rl = f(row.red_level);
    (rc - rc * rc / (1.0 - rl)).max(0.0)
}

pub fn optimize(schedule: &LayerSchedule, config: &OptimizerConfig) -> OptimizeResult {
    let num_layers = schedule.num_layers();
    let problem = Problem::new(schedule, config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut guess: Vec<f64> = vec![config.initial_c.min(config.c_upper); num_layers];
    guess.extend(vec![config.initial_h.min(config.h_upper); num_layers]);

    let mut best: Option<(f64, ParamVector)> = None;
    let mut history = Vec::with_capacity(config.restarts);

    for restart in 0..config.restarts {
        if restart > 0 && config.jitter {
            for v in guess.iter_mut() {
                *v += rng.gen_range(-1e-4..1e-4);
            }
            problem.project(&mut guess);
        }

        let x = solve_augmented_lagrangian(&problem, &guess, config.tolerance);
        let mut params = ParamVector {
            c: x[..num_layers].to_vec(),
            h: x[num_layers..].to_vec(),
        };
        saturate(
            schedule,
            &mut params,
            config.epsilon,
            config.tolerance,
            config.c_upper,
            config.h_upper,
        );

        let c_total = objective(&params);
        let verified = constraint_margins(schedule, &params)
            .map(|m| m.certifiable(config.epsilon))
            .unwrap_or(false);
        history.push((restart, c_total, verified));

        if verified && best.as_ref().map_or(true, |(b, _)| c_total > *b) {
            best = Some((c_total, params.clone()));
        }

        // Warm-start the next restart from this solution.
        guess = params.c.iter().chain(params.h.iter()).cloned().collect();
    }

    match best {
        Some((best_c_total, best_params)) => OptimizeResult {
            best_c_total,
            best_params,
            verified: true,
            history,
        },
        None => {
            let zeros = ParamVector::zeros(num_layers);
            let c_total = objective(&zeros);
            OptimizeResult {
                best_c_total: c_total,
                best_params: zeros,
                verified: false,
                history,
            }
        }
    }
}

/// Sanity helper used by tests and the sweep: re-derive `N` for a result.
pub fn ambient_dimension(schedule: &LayerSchedule, params: &ParamVector) -> f64 {
    derive(schedule, params).map(|d| d.ambient).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_examples() {
        let p = ParamVector {
            c: vec![1.0 / 6.0],
            h: vec![0.31],
        };
        assert!((objective(&p) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(objective(&ParamVector::zeros(4)), 0.0);
        let p2 = ParamVector {
            c: vec![0.1, 0.2],
            h: vec![0.0, 0.0],
        };
        assert!((objective(&p2) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn single_layer_beats_paper_parameters() {
        let schedule = LayerSchedule::uniform(1).unwrap();
        let result = optimize(&schedule, &OptimizerConfig::default());
        assert!(result.verified);
        assert!(
            result.best_c_total >= 1.0 / 3.0,
            "got {}",
            result.best_c_total
        );
        assert!(result.best_c_total < 1.0);
    }

    #[test]
    fn forced_zero_upper_bound() {
        let schedule = LayerSchedule::uniform(3).unwrap();
        let config = OptimizerConfig {
            c_upper: 0.0,
            ..Default::default()
        };
        let result = optimize(&schedule, &config);
        assert!(result.verified);
        assert_eq!(result.best_c_total, 0.0);
    }

    #[test]
    fn deterministic_across_calls() {
        let schedule = LayerSchedule::uniform(3).unwrap();
        let config = OptimizerConfig {
            restarts: 2,
            jitter: true,
            seed: 42,
            ..Default::default()
        };
        let a = optimize(&schedule, &config);
        let b = optimize(&schedule, &config);
        assert_eq!(a.best_c_total, b.best_c_total);
        assert_eq!(a.best_params, b.best_params);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn results_always_certifiable() {
        for num_layers in [1usize, 2, 5] {
            let schedule = LayerSchedule::uniform(num_layers).unwrap();
            let result = optimize(&schedule, &OptimizerConfig::default());
            assert!(result.verified);
            let m = constraint_margins(&schedule, &result.best_params).unwrap();
            assert!(m.certifiable(1e-6));
            assert!(result.best_c_total < 1.0);
        }
    }
}
