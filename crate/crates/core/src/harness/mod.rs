//! Randomized verification suites: trial generation, per-trial checks,
//! aggregation into statistics, and comparison against recorded constants.

pub mod fixtures;
pub mod gen;
mod suites;

pub use fixtures::{content_hash, default_path, Bound, Fixture, FixtureStore, FIXTURES_ENV};
pub use gen::{
    gen_atom_family, gen_step_function, rng, trial_seed, AtomSpec, CubeLaw, StepSpec, ValueDist,
};
pub use suites::{suite_names, suite_summary};

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "suite,trial,seed,dim,params,lhs,rhs,ratio,eval_level,notes";

/// Everything that determines a suite run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialSpec {
    pub suite: String,
    pub trials: usize,
    pub seed: u64,
    /// Evaluation grid offset above each generated function's level; the suite default when `None`.
    pub eval_offset: Option<i32>,
}

impl TrialSpec {
    pub fn new(suite: &str, trials: usize, seed: u64) -> Self {
        Self {
            suite: suite.to_string(),
            trials,
            seed,
            eval_offset: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Compare statistics against recorded constants.
    Assert,
    /// Overwrite recorded constants with the observed statistics.
    Record,
    /// Compute statistics without reading or writing constants.
    Estimate,
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub suite: String,
    pub trial: usize,
    pub seed: u64,
    pub dim: usize,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub eval_level: Option<i32>,
    pub notes: String,
    /// Statistic this row's ratio feeds, if any.
    pub(crate) stat: Option<&'static str>,
    /// Set when an exact per-row check failed.
    pub(crate) failure: Option<String>,
}

/// Aggregate of one statistic over the rows of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct StatResult {
    pub id: String,
    /// `None` for statistics that are recorded but never asserted.
    pub bound: Option<Bound>,
    /// Maximum ratio for upper bounds and unasserted statistics, minimum for lower bounds.
    pub observed: f64,
    pub median: f64,
    /// Recorded constant compared against, in assert mode.
    pub fixture: Option<f64>,
    pub passed: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub spec: TrialSpec,
    pub rows: Vec<Row>,
    pub stats: Vec<StatResult>,
    pub failures: Vec<String>,
}

/// Formats a number with the shortest representation that parses back exactly.
pub fn fmt_num(x: f64) -> String {
    format!("{x}")
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
        for r in &self.rows {
            let eval = r.eval_level.map(|e| e.to_string()).unwrap_or_default();
            w.write_record([
                r.suite.clone(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.dim.to_string(),
                r.params.clone(),
                fmt_num(r.lhs),
                fmt_num(r.rhs),
                fmt_num(r.ratio),
                eval,
                r.notes.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
    }
}

fn record_command(spec: &TrialSpec) -> String {
    let mut cmd = format!(
        "mllab verify --suite {} --trials {} --seed {} --mode record",
        spec.suite, spec.trials, spec.seed
    );
    if let Some(offset) = spec.eval_offset {
        cmd.push_str(&format!(" --eval-offset {offset}"));
    }
    cmd
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Runs a suite. Assert mode fails with [`Error::Fixture`] when a constant is
/// missing or was recorded for different inputs; exceedances and failed
/// per-row checks are listed in the report's `failures`.
pub fn run_suite(spec: &TrialSpec, mode: Mode, store: &mut FixtureStore) -> Result<VerifyReport> {
    let suite = suites::lookup(&spec.suite)?;
    let offset = spec.eval_offset.unwrap_or(suite.default_offset);
    let per_trial: Vec<Result<Vec<Row>>> = (0..spec.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(spec.seed, i as u64);
            (suite.run)(i, seed, offset).map(|rows| {
                rows.into_iter()
                    .map(|mut r| {
                        r.suite = suite.name.to_string();
                        r.trial = i;
                        r.seed = seed;
                        r
                    })
                    .collect()
            })
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_trial {
        rows.extend(r?);
    }

    let mut failures: Vec<String> = rows
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|f| format!("trial {} ({}): {f}", r.trial, r.params)))
        .collect();

    let mut stats = Vec::new();
    for def in suite.stats {
        let ratios: Vec<f64> = rows.iter().filter(|r| r.stat == Some(def.id)).map(|r| r.ratio).collect();
        if ratios.is_empty() {
            continue;
        }
        let observed = match def.bound {
            Some(Bound::Lower) => ratios.iter().copied().fold(f64::INFINITY, f64::min),
            _ => ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        let med = median(ratios.clone());
        let hash = content_hash(&[suite.name, def.id, def.params, suite.generator, &offset.to_string()]);
        let mut result = StatResult {
            id: def.id.to_string(),
            bound: def.bound,
            observed,
            median: med,
            fixture: None,
            passed: None,
        };
        if let Some(bound) = def.bound {
            if ratios.iter().any(|r| !r.is_finite()) {
                failures.push(format!("{}: non-finite ratio", def.id));
            }
            match mode {
                Mode::Assert => {
                    let fixture = store
                        .get(def.id)
                        .ok_or_else(|| Error::Fixture(format!("missing fixture `{}`", def.id)))?;
                    if fixture.hash != hash {
                        return Err(Error::Fixture(format!(
                            "fixture `{}` was recorded for different inputs (hash {} ≠ {hash})",
                            def.id, fixture.hash
                        )));
                    }
                    let ok = match bound {
                        Bound::Upper => observed <= suite.tolerance * fixture.value,
                        Bound::Lower => observed >= fixture.value / suite.tolerance,
                    };
                    if !ok {
                        failures.push(format!(
                            "{}: observed {} against recorded {} ({:?} bound, factor {})",
                            def.id,
                            fmt_num(observed),
                            fmt_num(fixture.value),
                            bound,
                            suite.tolerance
                        ));
                    }
                    result.fixture = Some(fixture.value);
                    result.passed = Some(ok);
                }
                Mode::Record => {
                    store.insert(Fixture {
                        id: def.id.to_string(),
                        value: observed,
                        bound,
                        command: record_command(spec),
                        hash,
                    });
                    result.fixture = Some(observed);
                }
                Mode::Estimate => {}
            }
        }
        stats.push(result);
    }

    Ok(VerifyReport {
        spec: spec.clone(),
        rows,
        stats,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(Vec::new()).is_nan());
    }

    #[test]
    fn registry_is_complete() {
        assert_eq!(suite_names().len(), 16);
        for name in suite_names() {
            assert!(suite_summary(name).is_some());
            let report = run_suite(&TrialSpec::new(name, 2, 5), Mode::Estimate, &mut FixtureStore::default()).unwrap();
            assert!(!report.rows.is_empty(), "{name}");
            assert!(report.passed(), "{name}: {:?}", report.failures);
        }
        assert!(matches!(
            run_suite(&TrialSpec::new("nope", 1, 0), Mode::Estimate, &mut FixtureStore::default()),
            Err(Error::UnknownSuite(_))
        ));
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        let report = run_suite(&TrialSpec::new("olsen", 1, 3), Mode::Estimate, &mut FixtureStore::default()).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row = lines.next().unwrap();
        assert!(row.contains("\"alpha=0.5;p=(1.5,1.25,1.25)"), "{row}");
    }

    #[test]
    fn record_then_assert() {
        let mut store = FixtureStore::default();
        let spec = TrialSpec::new("heat-domination", 4, 1);
        let recorded = run_suite(&spec, Mode::Record, &mut store).unwrap();
        let fixture = store.get("heat-domination").unwrap().clone();
        assert_eq!(Some(fixture.value), recorded.stats[0].fixture);
        assert!(fixture.command.contains("--trials 4 --seed 1"));

        let again = run_suite(&TrialSpec::new("heat-domination", 4, 2), Mode::Assert, &mut store).unwrap();
        assert_eq!(again.stats[0].passed, Some(true));

        // a different evaluation offset changes what the constant means
        let mut shifted = spec.clone();
        shifted.eval_offset = Some(2);
        assert!(matches!(run_suite(&shifted, Mode::Assert, &mut store), Err(Error::Fixture(_))));
        assert!(matches!(
            run_suite(&TrialSpec::new("hls", 2, 1), Mode::Assert, &mut store),
            Err(Error::Fixture(_))
        ));
    }

    #[test]
    fn exceedance_is_reported() {
        let mut store = FixtureStore::default();
        let spec = TrialSpec::new("maximal-mpqr", 3, 1);
        run_suite(&spec, Mode::Record, &mut store).unwrap();
        let mut fixture = store.get("maximal-mpqr").unwrap().clone();
        fixture.value /= 2.0;
        store.insert(fixture);
        let report = run_suite(&spec, Mode::Assert, &mut store).unwrap();
        assert!(!report.passed());
        assert!(report.failures[0].starts_with("maximal-mpqr: observed"), "{:?}", report.failures);
    }

    #[test]
    fn lower_bounds_take_the_minimum() {
        let report = run_suite(&TrialSpec::new("frac-lower", 6, 4), Mode::Estimate, &mut FixtureStore::default()).unwrap();
        for stat in &report.stats {
            let min = report
                .rows
                .iter()
                .filter(|r| r.stat.is_some_and(|s| s == stat.id))
                .map(|r| r.ratio)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(stat.observed, min);
        }
    }
}
