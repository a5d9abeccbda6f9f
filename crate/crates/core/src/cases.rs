//! Executable case studies: PAC learning of decision stumps, and the
//! demographic-parity null model with its fairness checks.
//!
//! The demographic-parity model is compiled from its source program by the
//! full pipeline, so every check here exercises parsing, translation, and
//! both semantics end to end.

use crate::dist::{self, Primitive};
use crate::frontend::ast::{CmpOp, Side};
use crate::reparam::TableEntry;
use crate::rng::CounterRng;
use crate::semantics::{eval_pure, mc_probability, pushforward_exact, Event};
use crate::value::{rat, Rat, Value};
use crate::{compile, CompiledProgram};
use std::sync::OnceLock;

/// Parameters of the decision-stump experiment.
#[derive(Debug, Clone)]
pub struct StumpSetup {
    /// Example distribution the learner never sees directly.
    pub dist: Primitive,
    /// True labelling threshold.
    pub target: f64,
    /// Training-set size.
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
}

/// Sufficient sample size ceil(ln(1/delta)/epsilon) for the stump learner.
pub fn sample_size_bound(epsilon: f64, delta: f64) -> usize {
    ((1.0 / delta).ln() / epsilon).ceil() as usize
}

impl Default for StumpSetup {
    fn default() -> Self {
        StumpSetup {
            dist: Primitive::Uniform { a: 0.0, b: 1.0 },
            target: 0.5,
            n: sample_size_bound(0.1, 0.1),
            epsilon: 0.1,
            delta: 0.1,
        }
    }
}

/// True labels: points at or below the threshold are positive.
pub fn label(threshold: f64, x: f64) -> bool {
    x <= threshold
}

/// The learner: negative examples are filtered to 0 and the maximum of the
/// remainder becomes the threshold, so an empty or all-negative sample
/// yields 0.
pub fn choose(data: &[(f64, bool)]) -> f64 {
    data.iter()
        .map(|&(x, positive)| if positive { x } else { 0.0 })
        .fold(0.0, f64::max)
}

/// True error of a trained stump: the mass of the region where its labels
/// disagree with the target's, which is the interval between the two
/// thresholds.
pub fn stump_error(h: f64, setup: &StumpSetup) -> f64 {
    let (lo, hi) = if h <= setup.target {
        (h, setup.target)
    } else {
        (setup.target, h)
    };
    dist::cdf(&setup.dist, hi) - dist::cdf(&setup.dist, lo)
}

/// Fraction of independent training runs whose learned stump exceeds the
/// error budget epsilon.
pub fn pac_estimate(setup: &StumpSetup, trials: u64, seed: u64) -> f64 {
    let mut failures = 0u64;
    for trial in 0..trials {
        let mut rng = CounterRng::new(seed, trial);
        let mut data = Vec::with_capacity(setup.n);
        for _ in 0..setup.n {
            let x = dist::quantile(&setup.dist, rng.next_f64_open());
            data.push((x, label(setup.target, x)));
        }
        let h = choose(&data);
        if stump_error(h, setup) > setup.epsilon {
            failures += 1;
        }
    }
    failures as f64 / trials.max(1) as f64
}

/// Exact failure probability of the stump learner for Uniform(0,1)
/// examples with target at least epsilon: all n draws must miss the
/// interval [t - eps, t].
pub fn pac_exact_failure_rate(setup: &StumpSetup) -> f64 {
    (1.0 - setup.epsilon).powi(setup.n as i32)
}

/// The null-model source: a majority selection rate, one majority
/// selection, a minority rate at least four fifths of it, and one minority
/// selection.
pub const DP_SOURCE: &str = "\
def majority():
  theta = uniform(0, 1)
  X = bernoulli(theta)
  return (theta, X)

def demographic_parity():
  [theta,X] = majority()
  phi = uniform(0.8 * theta, 1)
  Y = bernoulli(phi)
  return (theta, X, phi, Y)
";

/// The compiled null model, built once through the real pipeline.
pub fn dp_compiled() -> &'static CompiledProgram {
    static COMPILED: OnceLock<CompiledProgram> = OnceLock::new();
    COMPILED.get_or_init(|| compile(DP_SOURCE).expect("null model compiles"))
}

fn dp_entry() -> &'static TableEntry {
    dp_compiled()
        .table
        .get("demographic_parity")
        .expect("translated")
}

/// Event: the majority member was selected (X component equals 1).
pub fn majority_selected() -> Event {
    Event::atom(vec![Side::First, Side::Second], CmpOp::Eq, Value::Int(1))
}

/// Event: the minority member was selected (Y component equals 1).
pub fn minority_selected() -> Event {
    Event::atom(vec![Side::Second, Side::Second], CmpOp::Eq, Value::Int(1))
}

/// Exact selection probabilities (Pr[X=1], Pr[Y=1]) from the
/// interval-decomposition oracle.
pub fn dp_exact_probabilities() -> (Rat, Rat) {
    let cp = dp_compiled();
    let entry = dp_entry();
    let px = pushforward_exact(&entry.pure_fn, &cp.table, &majority_selected())
        .expect("affine thresholds");
    let py = pushforward_exact(&entry.pure_fn, &cp.table, &minority_selected())
        .expect("affine thresholds");
    (px, py)
}

/// Inputs to the reparameterized null model with the majority rate pinned.
#[derive(Debug, Clone, Copy)]
pub struct DpInputs {
    pub theta: f64,
    pub x: i64,
    pub u3: f64,
    pub u4: f64,
}

/// The pointwise inclusion behind the fairness proof: whenever a Bernoulli
/// draw at rate 4/5*t fires on u4, the compiled model's Y fires on the
/// same u4. The premise pins theta to t.
pub fn dp_subset_check(t: f64, inp: &DpInputs) -> bool {
    assert_eq!(inp.theta, t, "precondition: theta = t");
    let rate = crate::value::mul(&Value::Rat(rat(4, 5)), &Value::F64(t)).expect("scalar");
    let y_prime = dist::gen_bernoulli(&rate, &Value::F64(inp.u4)).expect("in range")
        == Value::Int(1);
    let input = Value::pair(
        Value::pair(Value::F64(inp.theta), Value::Int(inp.x)),
        Value::pair(Value::F64(inp.u3), Value::F64(inp.u4)),
    );
    let out = eval_pure(&dp_entry().pure_fn, &input).expect("evaluates");
    let y = out
        .snd()
        .and_then(|v| v.snd())
        .map(|v| v == &Value::Int(1))
        .expect("output shape");
    !y_prime || y
}

/// Deterministic boundary grid for the subset property: u4 probes 0, the
/// threshold 4/5*t and its 1e-12 neighborhood, t itself, and 1.
pub fn dp_boundary_grid() -> Vec<(f64, DpInputs)> {
    let mut cases = Vec::new();
    for &t in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let threshold = 0.8 * t;
        for &u3 in &[0.0, 0.5, 1.0] {
            for &u4 in &[
                0.0,
                f64::max(threshold - 1e-12, 0.0),
                threshold,
                f64::min(threshold + 1e-12, 1.0),
                t,
                1.0,
            ] {
                for x in [0, 1] {
                    cases.push((t, DpInputs { theta: t, x, u3, u4 }));
                }
            }
        }
    }
    cases
}

/// Pseudo-random subset-property probes.
pub fn dp_random_inputs(count: u64, seed: u64) -> Vec<(f64, DpInputs)> {
    let mut out = Vec::with_capacity(count as usize);
    let mut rng = CounterRng::new(seed, 0);
    for _ in 0..count {
        let t = rng.next_f64();
        out.push((
            t,
            DpInputs {
                theta: t,
                x: (rng.next_u64() & 1) as i64,
                u3: rng.next_f64(),
                u4: rng.next_f64(),
            },
        ));
    }
    out
}

/// Result of the Monte Carlo inequality check.
#[derive(Debug, Clone, Copy)]
pub struct DpInequality {
    pub p_x: f64,
    pub p_y: f64,
    pub se_x: f64,
    pub se_y: f64,
    pub holds: bool,
}

fn guarded_se(p: f64, n: u64) -> f64 {
    let var = p * (1.0 - p);
    // Degenerate estimates (0 or 1) get the worst-case variance guard.
    let var = if var == 0.0 { 0.25 } else { var };
    (var / n.max(1) as f64).sqrt()
}

/// Monte Carlo estimates of the two selection rates and the four-fifths
/// inequality, allowing four combined standard errors of slack.
pub fn dp_inequality(trials: u64, seed: u64) -> DpInequality {
    let cp = dp_compiled();
    let entry = dp_entry();
    let ex = mc_probability(entry, &cp.table, &majority_selected(), trials, seed)
        .expect("model samples");
    let ey = mc_probability(entry, &cp.table, &minority_selected(), trials, seed)
        .expect("model samples");
    let se_x = guarded_se(ex.estimate, trials);
    let se_y = guarded_se(ey.estimate, trials);
    let combined = (0.64 * se_x * se_x + se_y * se_y).sqrt();
    DpInequality {
        p_x: ex.estimate,
        p_y: ey.estimate,
        se_x,
        se_y,
        holds: 0.8 * ex.estimate <= ey.estimate + 4.0 * combined,
    }
}

/// One line of a verification report.
#[derive(Debug, Clone)]
pub struct Metric {
    pub name: String,
    pub value: String,
    pub tolerance: String,
    pub pass: bool,
}

impl Metric {
    fn new(name: &str, value: String, tolerance: &str, pass: bool) -> Metric {
        Metric {
            name: name.to_string(),
            value,
            tolerance: tolerance.to_string(),
            pass,
        }
    }
}

/// The full demographic-parity verification suite.
pub fn verify_dp(trials: u64, seed: u64, subset_samples: u64) -> Vec<Metric> {
    let mut metrics = Vec::new();
    let (px, py) = dp_exact_probabilities();
    metrics.push(Metric::new(
        "exact_pr_majority_selected",
        format!("{}/{}", px.numer(), px.denom()),
        "= 1/2 exactly",
        px == rat(1, 2),
    ));
    metrics.push(Metric::new(
        "exact_pr_minority_selected",
        format!("{}/{}", py.numer(), py.denom()),
        "= 7/10 exactly",
        py == rat(7, 10),
    ));

    let ineq = dp_inequality(trials, seed);
    metrics.push(Metric::new(
        "mc_pr_majority_selected",
        format!("{:.6}", ineq.p_x),
        "within 4 se of 1/2",
        (ineq.p_x - 0.5).abs() <= 4.0 * ineq.se_x,
    ));
    metrics.push(Metric::new(
        "mc_pr_minority_selected",
        format!("{:.6}", ineq.p_y),
        "within 4 se of 7/10",
        (ineq.p_y - 0.7).abs() <= 4.0 * ineq.se_y,
    ));
    metrics.push(Metric::new(
        "four_fifths_inequality",
        format!("0.8*{:.6} <= {:.6}", ineq.p_x, ineq.p_y),
        "0.8*Pr[X=1] <= Pr[Y=1] + 4 se",
        ineq.holds,
    ));

    let mut violations = 0u64;
    let mut checked = 0u64;
    for (t, inp) in dp_random_inputs(subset_samples, seed) {
        checked += 1;
        if !dp_subset_check(t, &inp) {
            violations += 1;
        }
    }
    for (t, inp) in dp_boundary_grid() {
        checked += 1;
        if !dp_subset_check(t, &inp) {
            violations += 1;
        }
    }
    metrics.push(Metric::new(
        "subset_property_violations",
        format!("{violations}/{checked}"),
        "zero violations",
        violations == 0,
    ));
    metrics
}

/// The PAC decision-stump verification suite.
pub fn verify_pac(setup: &StumpSetup, trials: u64, seed: u64) -> Vec<Metric> {
    let rate = pac_estimate(setup, trials, seed);
    let exact = pac_exact_failure_rate(setup);
    let se = (exact * (1.0 - exact) / trials.max(1) as f64).sqrt();
    vec![
        Metric::new(
            "pac_failure_rate",
            format!("{rate:.6}"),
            &format!("<= delta = {}", setup.delta),
            rate <= setup.delta,
        ),
        Metric::new(
            "pac_failure_vs_exact_law",
            format!("{rate:.6} vs {exact:.6}"),
            "within 4 binomial se",
            (rate - exact).abs() <= 4.0 * se,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn choose_takes_max_positive() {
        assert_eq!(choose(&[(0.3, true), (0.7, false), (0.2, true)]), 0.3);
        assert_eq!(choose(&[]), 0.0);
        assert_eq!(choose(&[(0.9, false)]), 0.0);
    }

    #[test]
    fn choose_never_overshoots_target() {
        // When labels come from t, every positive example is <= t.
        let setup = StumpSetup::default();
        let mut rng = CounterRng::new(5, 0);
        for _ in 0..1000 {
            let data: Vec<(f64, bool)> = (0..20)
                .map(|_| {
                    let x = rng.next_f64();
                    (x, label(setup.target, x))
                })
                .collect();
            assert!(choose(&data) <= setup.target);
        }
    }

    #[test]
    fn stump_error_examples() {
        let setup = StumpSetup {
            target: 0.5,
            ..StumpSetup::default()
        };
        // Misclassified region (0.4, 0.5] has Lebesgue measure 0.1.
        assert!((stump_error(0.4, &setup) - 0.1).abs() < 1e-12);
        assert_eq!(stump_error(0.5, &setup), 0.0);
        // Degenerate sliver: no catastrophic cancellation.
        let setup = StumpSetup {
            target: 0.5 + 1e-9,
            ..setup
        };
        let e = stump_error(0.5, &setup);
        assert!(e > 0.0 && (e - 1e-9).abs() < 1e-12, "{e}");
    }

    #[test]
    fn stump_error_zero_iff_equal() {
        let setup = StumpSetup::default();
        for h in [0.0, 0.1, 0.49, 0.5, 0.51, 1.0] {
            let e = stump_error(h, &setup);
            assert!(e >= 0.0);
            assert_eq!(e == 0.0, h == setup.target, "h = {h}");
        }
    }

    #[test]
    fn sample_size_bound_matches_reference_point() {
        assert_eq!(sample_size_bound(0.1, 0.1), 24);
    }

    #[test]
    fn pac_failure_rate_matches_exact_law() {
        let setup = StumpSetup::default();
        let trials = 10_000;
        let rate = pac_estimate(&setup, trials, 42);
        let exact = pac_exact_failure_rate(&setup);
        assert!((exact - 0.0798).abs() < 5e-4, "exact law sanity: {exact}");
        let se = (exact * (1.0 - exact) / trials as f64).sqrt();
        assert!(
            (rate - exact).abs() <= 4.0 * se,
            "rate {rate}, exact {exact}, se {se}"
        );
        assert!(rate <= setup.delta);
    }

    #[test]
    fn pac_huge_sample_never_fails() {
        let setup = StumpSetup {
            n: 10_000,
            ..StumpSetup::default()
        };
        assert_eq!(pac_estimate(&setup, 100, 1), 0.0);
    }

    #[test]
    fn pac_trivial_epsilon_never_fails() {
        let setup = StumpSetup {
            epsilon: 1.0 - 1e-9,
            ..StumpSetup::default()
        };
        assert_eq!(pac_estimate(&setup, 1000, 2), 0.0);
    }

    #[test]
    fn dp_exact_values() {
        let (px, py) = dp_exact_probabilities();
        assert_eq!(px, rat(1, 2));
        assert_eq!(py, rat(7, 10));
    }

    #[test]
    fn dp_subset_hand_cases() {
        // t = 0.5: Y' fires (0.3 < 0.4), phi = 0.58 > 0.3 so Y fires too.
        assert!(dp_subset_check(
            0.5,
            &DpInputs {
                theta: 0.5,
                x: 1,
                u3: 0.3,
                u4: 0.3
            }
        ));
        // t = 0: Y' never fires, vacuous.
        assert!(dp_subset_check(
            0.0,
            &DpInputs {
                theta: 0.0,
                x: 0,
                u3: 0.9,
                u4: 0.7
            }
        ));
        // t = 1, u4 = 0.99 >= 0.8: vacuous again.
        assert!(dp_subset_check(
            1.0,
            &DpInputs {
                theta: 1.0,
                x: 1,
                u3: 0.2,
                u4: 0.99
            }
        ));
    }

    #[test]
    fn dp_subset_no_violations_on_grid_and_sample() {
        for (t, inp) in dp_boundary_grid() {
            assert!(dp_subset_check(t, &inp), "violation at {inp:?}");
        }
        for (t, inp) in dp_random_inputs(20_000, 9) {
            assert!(dp_subset_check(t, &inp), "violation at {inp:?}");
        }
    }

    #[test]
    fn dp_inequality_small_run() {
        let r = dp_inequality(20_000, 11);
        assert!((r.p_x - 0.5).abs() <= 4.0 * r.se_x, "{r:?}");
        assert!((r.p_y - 0.7).abs() <= 4.0 * r.se_y, "{r:?}");
        assert!(r.holds);
    }

    #[test]
    fn dp_inequality_degenerate_single_trial() {
        let r = dp_inequality(1, 3);
        assert!(r.p_x == 0.0 || r.p_x == 1.0);
        assert!(r.p_y == 0.0 || r.p_y == 1.0);
        // The guard pins the standard error at 1/2 for one trial.
        assert_eq!(r.se_x, 0.5);
        assert_eq!(r.se_y, 0.5);
        assert!(r.holds, "guarded slack covers any single-trial outcome");
    }

    #[test]
    fn verify_suites_pass_at_desk_scale() {
        for m in verify_dp(20_000, 7, 10_000) {
            assert!(m.pass, "{}: {} ({})", m.name, m.value, m.tolerance);
        }
        for m in verify_pac(&StumpSetup::default(), 4000, 7) {
            assert!(m.pass, "{}: {} ({})", m.name, m.value, m.tolerance);
        }
    }
}
