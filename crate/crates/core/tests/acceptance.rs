//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use mllab::harness::{
    default_path, gen_step_function, rng, run_suite, suite_names, trial_seed, FixtureStore, Mode, StepSpec, TrialSpec,
    ValueDist, VerifyReport,
};
use mllab::lorentz::{lorentz_norm, rearrangement, weak_norm};
use mllab::operators::{frac_integral_at, FracIntegralParams};
use mllab::quad::integrate;
use mllab::{LorentzParams, StepFunction};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn assert_run(suite: &str, trials: usize, seed: u64) -> Result<VerifyReport, String> {
    let mut store = FixtureStore::load(&default_path()).map_err(|e| e.to_string())?;
    run_suite(&TrialSpec::new(suite, trials, seed), Mode::Assert, &mut store).map_err(|e| e.to_string())
}

fn stat_line(report: &VerifyReport) -> String {
    report
        .stats
        .iter()
        .filter(|s| s.fixture.is_some())
        .map(|s| format!("{}={:.4} (fixture {:.4})", s.id, s.observed, s.fixture.unwrap_or(f64::NAN)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn suite_outcome(report: Result<VerifyReport, String>) -> Outcome {
    match report {
        Ok(r) if r.passed() => outcome(true, stat_line(&r)),
        Ok(r) => outcome(false, r.failures.join("; ")),
        Err(e) => outcome(false, e),
    }
}

fn within(elapsed: Duration, limit: Duration, inner: Outcome) -> Outcome {
    let detail = format!("{}; {:.2?} of {:?}", inner.detail, elapsed, limit);
    outcome(inner.ok && elapsed < limit, detail)
}

/// A mixed corpus: dims 1 and 2, three value laws, 1 to 60 cells.
fn corpus(root: u64, count: usize) -> Vec<StepFunction> {
    (0..count)
        .map(|i| {
            let seed = trial_seed(root, i as u64);
            let mut r = rng(seed);
            let dist = match i % 3 {
                0 => ValueDist::Uniform,
                1 => ValueDist::HeavyTail { beta: 1.5 },
                _ => ValueDist::IndicatorMix,
            };
            let spec = StepSpec::new(1 + i % 2, r.gen_range(-2..=3), r.gen_range(1..=60), dist);
            gen_step_function(seed ^ 1, &spec).expect("valid spec")
        })
        .collect()
}

/// Cell values sorted decreasingly, one entry per cell: the rearrangement built from scratch.
fn sorted_cells(f: &StepFunction) -> Vec<f64> {
    let mut v: Vec<f64> = f.values().map(f64::abs).filter(|v| *v > 0.0).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `(∫_0^∞ (t^{1/p} f*(t))^q dt/t)^{1/q}` by adaptive quadrature over each cell's stretch of `f*`.
fn lorentz_by_quadrature(f: &StepFunction, p: f64, q: f64) -> f64 {
    let v = sorted_cells(f);
    let h = f.cell_measure();
    if q.is_infinite() {
        // t^{1/p} f*(t) increases on each stretch, so the sup is its left limit at the stretch end
        return v.iter().enumerate().map(|(i, x)| x * ((i + 1) as f64 * h).powf(1.0 / p)).fold(0.0, f64::max);
    }
    let a = q / p;
    let mut total = 0.0;
    for (i, x) in v.iter().enumerate() {
        let piece = if i == 0 {
            // t = h e^{-s} removes the endpoint singularity; the tail past s = 60/a is below 1e-26
            integrate(|s| (h * (-s).exp()).powf(a), 0.0, 60.0 / a, 0.0, 1e-13)
        } else {
            integrate(|t| t.powf(a - 1.0), i as f64 * h, (i + 1) as f64 * h, 0.0, 1e-13)
        };
        total += x.powf(q) * piece;
    }
    total.powf(1.0 / q)
}

/// `inf{α > 0 : λ_f(α) ≤ t}`; the infimum is attained at 0 or at a cell value.
fn rearrangement_by_definition(f: &StepFunction, t: f64) -> f64 {
    let h = f.cell_measure();
    let lambda = |alpha: f64| f.values().filter(|v| v.abs() > alpha).count() as f64 * h;
    std::iter::once(0.0)
        .chain(f.values().map(f64::abs))
        .filter(|&alpha| lambda(alpha) <= t)
        .fold(f64::INFINITY, f64::min)
}

fn indicator_exactness() -> Outcome {
    let start = Instant::now();
    let report = assert_run("indicator", 50, 7);
    let inner = match report {
        Ok(r) => {
            let worst = r.rows.iter().map(|row| (row.ratio - 1.0).abs()).fold(0.0, f64::max);
            outcome(r.passed() && r.rows.len() == 50 && worst <= 1e-12, format!("max relative error {worst:e}"))
        }
        Err(e) => outcome(false, e),
    };
    within(start.elapsed(), Duration::from_secs(1), inner)
}

fn lorentz_oracle() -> Outcome {
    let start = Instant::now();
    let pairs = [(2.0, 1.0), (2.0, 2.0), (3.0, 0.5), (1.5, f64::INFINITY)];
    let mut worst: f64 = 0.0;
    for (i, f) in corpus(11, 200).iter().enumerate() {
        let (p, q) = pairs[i % pairs.len()];
        let exact = lorentz_norm(f, LorentzParams::new(p, q).expect("valid"));
        let oracle = lorentz_by_quadrature(f, p, q);
        worst = worst.max((exact - oracle).abs() / oracle);
    }
    within(
        start.elapsed(),
        Duration::from_secs(10),
        outcome(worst <= 1e-9, format!("max relative difference {worst:e} over 200 functions")),
    )
}

fn rearrangement_oracle() -> Outcome {
    let mut mismatches = 0usize;
    let mut evaluated = 0usize;
    for (i, f) in corpus(23, 100).iter().enumerate() {
        let profile = rearrangement(f);
        let total = *profile.cumulative().last().expect("breakpoints");
        let mut r = rng(trial_seed(29, i as u64));
        let mut ts: Vec<f64> = (0..1000).map(|_| r.gen_range(0.0..1.25 * total)).collect();
        ts.extend_from_slice(profile.cumulative());
        for t in ts {
            evaluated += 1;
            if profile.eval(t) != rearrangement_by_definition(f, t) {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches in {evaluated} evaluations"))
}

fn weak_norm_thresholds() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, f) in corpus(31, 100).iter().enumerate() {
        let p = [1.0, 1.5, 2.0, 4.0][i % 4];
        let h = f.cell_measure();
        // just below each value v the superlevel set is {|f| ≥ v}
        let oracle = f
            .values()
            .map(f64::abs)
            .map(|v| v * (f.values().filter(|w| w.abs() >= v).count() as f64 * h).powf(1.0 / p))
            .fold(0.0, f64::max);
        let exact = weak_norm(f, p).expect("valid exponent");
        worst = worst.max((exact - oracle).abs() / oracle);
    }
    outcome(worst <= 1e-12, format!("max relative difference {worst:e} over 100 functions"))
}

fn decomposition_guarantees() -> Outcome {
    let start = Instant::now();
    let report = assert_run("decomposition", 100, 7);
    let inner = match report {
        Ok(r) => {
            let rows = r.rows.iter().filter(|row| row.params.starts_with("K=") && row.notes.contains("reconstruction"));
            let checked = rows.count();
            let ok = r.passed() && checked == 100;
            outcome(ok, format!("{checked} decompositions checked; {}", if ok { stat_line(&r) } else { r.failures.join("; ") }))
        }
        Err(e) => outcome(false, e),
    };
    within(start.elapsed(), Duration::from_secs(60), inner)
}

fn synthesis_stability() -> Outcome {
    let report = assert_run("synthesis", 200, 7);
    match report {
        Ok(r) => {
            let single: Vec<f64> = r.rows.iter().filter(|row| row.notes.contains("single indicator")).map(|row| row.ratio).collect();
            let single_ok = single.len() == 2 && single.iter().all(|x| (x - 1.0).abs() <= 1e-12);
            let ok = r.passed() && single_ok;
            outcome(ok, format!("{}; single-indicator ratios {single:?}", stat_line(&r)))
        }
        Err(e) => outcome(false, e),
    }
}

fn maximal_bounds() -> Outcome {
    let a = suite_outcome(assert_run("maximal-mpqr", 200, 7));
    let b = suite_outcome(assert_run("fefferman-stein", 200, 7));
    outcome(a.ok && b.ok, format!("{}; {}", a.detail, b.detail))
}

fn fractional_checks() -> Outcome {
    let q = StepFunction::new(1, 0, [([0], 1.0)]).expect("valid");
    let half = FracIntegralParams::new(0.5).expect("valid");
    let at0 = frac_integral_at(&q, half, &[0.0]).expect("evaluates");
    let at2 = frac_integral_at(&q, half, &[2.0]).expect("evaluates");
    let exact = (at0 - 2.0).abs() <= 1e-10 && (at2 - 2.0 * (2f64.sqrt() - 1.0)).abs() <= 1e-10;
    let floor = suite_outcome(assert_run("frac-lower", 50, 7));
    let decay = suite_outcome(assert_run("atom-decay", 100, 7));
    outcome(
        exact && floor.ok && decay.ok,
        format!("I(0)={at0}, I(2)={at2}; {}; {}", floor.detail, decay.detail),
    )
}

fn olsen_stability() -> Outcome {
    suite_outcome(assert_run("olsen", 200, 7))
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    for name in suite_names() {
        let spec = TrialSpec::new(name, 12, 99);
        let run = || run_suite(&spec, Mode::Estimate, &mut FixtureStore::default()).map(|r| r.to_csv());
        match (run(), run()) {
            (Ok(a), Ok(b)) if a == b => {}
            _ => differing.push(name),
        }
    }
    let count = suite_names().len();
    outcome(differing.is_empty(), format!("{count} suites rerun; differing: {differing:?}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("indicator norm exactness", indicator_exactness),
        ("Lorentz norm against quadrature of the defining integral", lorentz_oracle),
        ("rearrangement against the inf formula", rearrangement_oracle),
        ("weak norm against the threshold formula", weak_norm_thresholds),
        ("decomposition guarantees", decomposition_guarantees),
        ("synthesis stability", synthesis_stability),
        ("maximal operator bounds", maximal_bounds),
        ("fractional integral checks", fractional_checks),
        ("Olsen ratio stability", olsen_stability),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        let tag = if result.ok { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2} {name}: {}", i + 1, result.detail);
        if !result.ok {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
