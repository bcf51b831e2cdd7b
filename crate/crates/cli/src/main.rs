use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mllab::atoms::{decompose, guarantees, synthesize, AtomFamily};
use mllab::harness::{default_path, fmt_num, run_suite, suite_names, suite_summary, FixtureStore, Mode, TrialSpec, VerifyReport};
use mllab::lorentz::{lorentz_norm, weak_norm};
use mllab::morrey::morrey_lorentz_norm;
use mllab::operators::{
    dyadic_maximal, frac_integral, frac_integral_at, heat_extension, heat_maximal, heat_maximal_norm, maximal,
    FracIntegralParams, HeatParams, MaximalParams,
};
use mllab::{Error, LorentzParams, MorreyLorentzParams, StepFunction};

const EXIT_IO: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_GUARANTEE: u8 = 4;
const EXIT_CHECK: u8 = 5;
const EXIT_FIXTURE: u8 = 6;

#[derive(Parser)]
#[command(name = "mllab", version, about = "Morrey-Lorentz norms, operators and atomic decompositions on dyadic step functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Space {
    Lorentz,
    MorreyLorentz,
    WeakMorrey,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Assert,
    Record,
}

#[derive(Subcommand)]
enum Command {
    /// Print a quasi-norm of a step function
    Norm {
        #[arg(long, value_enum)]
        space: Space,
        #[arg(long)]
        p: f64,
        /// Required for lorentz and morrey-lorentz
        #[arg(long)]
        q: Option<f64>,
        /// Second Morrey-Lorentz index; `inf` for the weak variant
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        input: PathBuf,
    },
    /// Apply the maximal operator M^(eta,theta), or the dyadic one
    Maximal {
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// Evaluation grid level; one finer than the input by default
        #[arg(long, allow_hyphen_values = true)]
        eval_level: Option<i32>,
        /// Dyadic maximal function on the input's own grid
        #[arg(long, conflicts_with_all = ["eta", "theta", "eval_level"])]
        dyadic: bool,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Apply the fractional integral I_alpha
    Fracint {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        eval_level: Option<i32>,
        /// Evaluate at one point instead, given as comma-separated coordinates
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "eval_level")]
        at: Option<Vec<f64>>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Heat extension at one time, or its maximal function over t = 4^-j, j = -2..12
    Heat {
        #[arg(long)]
        t: Option<f64>,
        /// Levels between the input grid and the evaluation grid
        #[arg(long, default_value_t = 1)]
        offset: u32,
        /// With --p/--q/--r, print the Morrey-Lorentz quasi-norm of the heat maximal function
        #[arg(long, requires_all = ["q", "r"], conflicts_with = "t")]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Calderón-Zygmund atomic decomposition with moments cancelled up to degree K
    Decompose {
        #[arg(long = "K", default_value_t = 0)]
        degree: i32,
        #[arg(long, default_value_t = 1.0)]
        v: f64,
        #[arg(long)]
        input: PathBuf,
        /// Atom family JSON
        #[arg(long)]
        output: PathBuf,
        /// Residual step function JSON; next to the output by default
        #[arg(long)]
        residual: Option<PathBuf>,
        /// Guarantees JSON; printed to stdout by default
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sum an atom family, optionally comparing against a function
    Synthesize {
        #[arg(long)]
        input: PathBuf,
        /// Step function added to the sum, such as a decomposition residual
        #[arg(long)]
        residual: Option<PathBuf>,
        /// Compare the sum cellwise against this function and print a match report
        #[arg(long)]
        compare: Option<PathBuf>,
        /// Largest accepted |difference| / sup|compare|
        #[arg(long, default_value_t = 1e-10, requires = "compare")]
        tolerance: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a verification suite against the recorded constants
    Verify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = VerifyMode::Assert)]
        mode: VerifyMode,
        /// Fixture file; MLLAB_FIXTURES or the bundled file by default
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Run a suite and print its statistics without touching the recorded constants
    Estimate {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    suite: String,
    /// The suite's default when omitted
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluation grid offset above each generated function's level
    #[arg(long, allow_hyphen_values = true)]
    eval_offset: Option<i32>,
    /// CSV destination; stdout by default
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. } => EXIT_IO,
            Error::Parse(_) => EXIT_PARSE,
            Error::Fixture(_) => EXIT_FIXTURE,
            Error::Moments(_) => EXIT_GUARANTEE,
            Error::Domain(_)
            | Error::Constraint(_)
            | Error::Coarsening { .. }
            | Error::ZeroFunction
            | Error::UnknownSuite(_) => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

type Outcome = Result<(), Failure>;

fn suite_listing() -> String {
    let mut text = String::from("Suites:\n");
    for name in suite_names() {
        let (reference, trials) = suite_summary(name).expect("registered suite");
        text.push_str(&format!("  {name:<16} {reference} [{trials} trials]\n"));
    }
    text
}

fn command() -> clap::Command {
    let listing = suite_listing();
    Cli::command()
        .after_help(listing.clone())
        .mut_subcommand("verify", |c| c.after_help(listing.clone()))
        .mut_subcommand("estimate", |c| c.after_help(listing.clone()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|source| {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn write(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|source| {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn load_function(path: &Path) -> Result<StepFunction, Failure> {
    let text = read(path)?;
    StepFunction::from_json(&text).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(path) => write(path, &format!("{text}\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn require(value: Option<f64>, flag: &str, space: &str) -> Result<f64, Failure> {
    value.ok_or_else(|| fail(EXIT_INVALID, format!("--{flag} is required for --space {space}")))
}

fn cmd_norm(space: Space, p: f64, q: Option<f64>, r: Option<f64>, input: &Path) -> Outcome {
    let f = load_function(input)?;
    let value = match space {
        Space::Lorentz => {
            if r.is_some() {
                return Err(fail(EXIT_INVALID, "--r applies only to morrey-lorentz"));
            }
            lorentz_norm(&f, LorentzParams::new(p, require(q, "q", "lorentz")?)?)
        }
        Space::MorreyLorentz => {
            let params = MorreyLorentzParams::new(p, require(q, "q", "morrey-lorentz")?, require(r, "r", "morrey-lorentz")?)?;
            morrey_lorentz_norm(&f, params)
        }
        Space::WeakMorrey => match (q, r) {
            (Some(q), None) => morrey_lorentz_norm(&f, MorreyLorentzParams::weak(p, q)?),
            (None, None) => weak_norm(&f, p)?,
            (_, Some(_)) => return Err(fail(EXIT_INVALID, "--r is fixed to inf for weak-morrey")),
        },
    };
    println!("{}", fmt_num(value));
    Ok(())
}

fn cmd_decompose(degree: i32, v: f64, input: &Path, output: &Path, residual: Option<&Path>, report: Option<&Path>) -> Outcome {
    let f = load_function(input)?;
    let result = decompose(&f, degree, v)?;
    let g = guarantees(&f, &result)?;
    write(output, &format!("{}\n", result.family.to_json()))?;
    let residual_path = residual.map(Path::to_path_buf).unwrap_or_else(|| output.with_extension("residual.json"));
    write(&residual_path, &format!("{}\n", result.residual.to_json()))?;
    let block = json!({
        "atoms": result.family.len(),
        "k_range": [result.level_range.0, result.level_range.1],
        "guarantees": {
            "reconstruction_error": g.reconstruction_error,
            "max_atom_excess": g.max_atom_excess,
            "max_moment_residual": g.max_moment_residual,
            "lambda_constant": g.lambda_constant,
            "pointwise_bound_constant": g.pointwise_bound_constant,
        },
        "violations": g.violations(),
    });
    emit(report, &serde_json::to_string_pretty(&block).expect("json value serializes"))?;
    let violations = g.violations();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(fail(EXIT_GUARANTEE, format!("decomposition guarantee violated: {}", violations.join(", "))))
    }
}

fn cmd_synthesize(input: &Path, residual: Option<&Path>, compare: Option<&Path>, tolerance: f64, output: Option<&Path>) -> Outcome {
    let text = read(input)?;
    let family = AtomFamily::from_json(&text).map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", input.display())))?;
    let mut sum = synthesize(&family);
    if let Some(path) = residual {
        sum = add_any_level(&sum, &load_function(path)?)?;
    }
    let Some(path) = compare else {
        return emit(output, &sum.to_json());
    };
    if let Some(out) = output {
        write(out, &format!("{}\n", sum.to_json()))?;
    }
    let target = load_function(path)?;
    let diff = add_any_level(&target, &sum.scale(-1.0))?;
    let scale = target.sup_norm();
    let max_diff = diff.sup_norm();
    let relative = if scale > 0.0 { max_diff / scale } else { max_diff };
    let ok = relative <= tolerance;
    let report = json!({
        "cells_differing": diff.values().filter(|d| d.abs() > tolerance * scale.max(1.0)).count(),
        "max_abs_difference": max_diff,
        "relative_difference": relative,
        "match": ok,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("json value serializes"));
    if ok {
        Ok(())
    } else {
        Err(fail(EXIT_CHECK, format!("synthesized function differs from {}", path.display())))
    }
}

/// Sum of two step functions after refining both to the finer level.
fn add_any_level(a: &StepFunction, b: &StepFunction) -> Result<StepFunction, Failure> {
    let level = a.level().max(b.level());
    Ok(a.refine(level)?.add(&b.refine(level)?)?)
}

fn write_csv(report: &VerifyReport, path: Option<&Path>) -> Outcome {
    match path {
        Some(p) => write(p, &report.to_csv()),
        None => {
            print!("{}", report.to_csv());
            Ok(())
        }
    }
}

fn summarize(report: &VerifyReport) {
    for s in &report.stats {
        let bound = match s.bound {
            Some(b) => format!("{b:?}").to_lowercase(),
            None => "report-only".into(),
        };
        let fixture = s.fixture.map(fmt_num).unwrap_or_else(|| "-".into());
        let status = match s.passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "",
        };
        eprintln!(
            "{:<28} {bound:<11} observed={} median={} fixture={fixture} {status}",
            s.id,
            fmt_num(s.observed),
            fmt_num(s.median)
        );
    }
    for f in &report.failures {
        eprintln!("failure: {f}");
    }
}

fn trial_spec(run: &RunArgs) -> Result<TrialSpec, Failure> {
    let (_, default_trials) =
        suite_summary(&run.suite).ok_or_else(|| Failure::from(Error::UnknownSuite(run.suite.clone())))?;
    let mut spec = TrialSpec::new(&run.suite, run.trials.unwrap_or(default_trials), run.seed);
    spec.eval_offset = run.eval_offset;
    Ok(spec)
}

fn finish(report: &VerifyReport) -> Outcome {
    if report.passed() {
        Ok(())
    } else {
        Err(fail(EXIT_CHECK, format!("{} check(s) failed", report.failures.len())))
    }
}

fn cmd_verify(run: &RunArgs, mode: VerifyMode, fixtures: Option<PathBuf>) -> Outcome {
    let spec = trial_spec(run)?;
    let path = fixtures.unwrap_or_else(default_path);
    let mut store = FixtureStore::load(&path)?;
    let mode = match mode {
        VerifyMode::Assert => Mode::Assert,
        VerifyMode::Record => Mode::Record,
    };
    let report = run_suite(&spec, mode, &mut store)?;
    write_csv(&report, run.report.as_deref())?;
    summarize(&report);
    if mode == Mode::Record {
        store.save(&path)?;
        eprintln!("recorded {} statistic(s) in {}", report.stats.iter().filter(|s| s.bound.is_some()).count(), path.display());
    }
    finish(&report)
}

fn cmd_estimate(run: &RunArgs) -> Outcome {
    let spec = trial_spec(run)?;
    let report = run_suite(&spec, Mode::Estimate, &mut FixtureStore::default())?;
    write_csv(&report, run.report.as_deref())?;
    summarize(&report);
    finish(&report)
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Norm { space, p, q, r, input } => cmd_norm(space, p, q, r, &input),
        Command::Maximal {
            eta,
            theta,
            eval_level,
            dyadic,
            input,
            output,
        } => {
            let f = load_function(&input)?;
            let m = if dyadic {
                dyadic_maximal(&f)
            } else {
                maximal(&f, MaximalParams::new(eta, theta)?, eval_level.unwrap_or(f.level() + 1))?
            };
            emit(output.as_deref(), &m.to_json())
        }
        Command::Fracint {
            alpha,
            eval_level,
            at,
            input,
            output,
        } => {
            let f = load_function(&input)?;
            let params = FracIntegralParams::new(alpha)?;
            match at {
                Some(x) => {
                    if x.len() != f.dim() {
                        return Err(fail(EXIT_INVALID, format!("--at needs {} coordinate(s)", f.dim())));
                    }
                    emit(output.as_deref(), &fmt_num(frac_integral_at(&f, params, &x)?))
                }
                None => {
                    let out = frac_integral(&f, params, eval_level.unwrap_or(f.level() + 1))?;
                    emit(output.as_deref(), &out.to_json())
                }
            }
        }
        Command::Heat {
            t,
            offset,
            p,
            q,
            r,
            input,
            output,
        } => {
            let f = load_function(&input)?;
            if let Some(t) = t {
                let out = heat_extension(&f, t, f.level() + offset as i32)?;
                return emit(output.as_deref(), &out.to_json());
            }
            let hp = HeatParams::with_default_grid(offset);
            match (p, q, r) {
                (Some(p), Some(q), Some(r)) => {
                    let value = heat_maximal_norm(&f, &hp, MorreyLorentzParams::new(p, q, r)?)?;
                    emit(output.as_deref(), &fmt_num(value))
                }
                _ => emit(output.as_deref(), &heat_maximal(&f, &hp)?.to_json()),
            }
        }
        Command::Decompose {
            degree,
            v,
            input,
            output,
            residual,
            report,
        } => cmd_decompose(degree, v, &input, &output, residual.as_deref(), report.as_deref()),
        Command::Synthesize {
            input,
            residual,
            compare,
            tolerance,
            output,
        } => cmd_synthesize(&input, residual.as_deref(), compare.as_deref(), tolerance, output.as_deref()),
        Command::Verify { run, mode, fixtures } => cmd_verify(&run, mode, fixtures),
        Command::Estimate { run } => cmd_estimate(&run),
    }
}

fn parse() -> Result<Cli, clap::Error> {
    let matches: ArgMatches = command().try_get_matches()?;
    Cli::from_arg_matches(&matches)
}

fn main() -> ExitCode {
    let cli = match parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INVALID),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
