//! Command-line verification reports for the n-Laplace Liouville equation.
//!
//! Every subcommand builds a [`VerificationReport`]: a fixed-order list of
//! named checks, each comparing a computed value against a reference within a
//! tolerance. Output is deterministic byte-for-byte unless `--timing` is given.

pub mod args;
pub mod report;
pub mod suites;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use liouville_core::{Dimension, LevelSuite, RadialSolution};
use rayon::prelude::*;

pub use args::{parse_command, Cli, Command, Format, Suite};
pub use report::{emit_report, Check, InputValue, Summary, VerificationReport};
use suites::Subject;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum RunError {
    /// Arguments that parse but make no sense.
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(msg) => write!(f, "error: {msg}"),
            RunError::Io { path, source } => write!(f, "error: cannot write {}: {source}", path.display()),
        }
    }
}

impl std::error::Error for RunError {}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => EXIT_USAGE,
            RunError::Io { .. } => EXIT_IO,
        }
    }
}

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(msg.into())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    std::fs::write(path, bytes).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

fn positive(name: &str, v: f64) -> Result<(), RunError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive and finite, got {v}")))
    }
}

fn validate(cli: &Cli) -> Result<Dimension, RunError> {
    let dim = Dimension::new(cli.n).map_err(|e| usage(format!("--n: {e}")))?;
    positive("lambda", cli.lambda)?;
    positive("rmax", cli.rmax)?;
    positive("rtol", cli.rtol)?;
    positive("R", cli.radius)?;
    if let Some(a) = cli.alpha {
        if !a.is_finite() {
            return Err(usage(format!("--alpha must be finite, got {a}")));
        }
    }
    if let Command::Sweep { alpha_min, alpha_max, count } = cli.command {
        if !(alpha_min.is_finite() && alpha_max.is_finite() && alpha_min <= alpha_max) {
            return Err(usage("sweep needs finite --alpha-min <= --alpha-max"));
        }
        if count == 0 {
            return Err(usage("sweep needs --count >= 1"));
        }
    }
    Ok(dim)
}

/// Center value of the family member with scale `lambda`.
fn family_alpha(dim: &Dimension, lambda: f64) -> f64 {
    dim.c_n().ln() + dim.n() as f64 * lambda.ln()
}

fn sweep_alphas(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    (0..count).map(|k| min + (max - min) * k as f64 / (count - 1) as f64).collect()
}

/// Tables requested alongside a report.
#[derive(Debug, Default)]
pub struct Dumps {
    pub profile: Option<(PathBuf, Vec<u8>)>,
    pub levels: Option<(PathBuf, Vec<u8>)>,
}

pub fn profile_table(sol: &RadialSolution) -> Vec<u8> {
    let sigma = liouville_core::SolutionField::dim(sol).sigma();
    let rows: Vec<Vec<f64>> = (0..sol.grid().len())
        .map(|i| vec![sol.grid()[i], sol.u_values()[i], sol.du_values()[i], sol.flux()[i], -sigma * sol.flux()[i]])
        .collect();
    report::table_csv(&["r", "U", "dU_dr", "flux", "mass_in_ball"], &rows)
}

pub fn level_table(suite: &LevelSuite) -> Vec<u8> {
    let rows: Vec<Vec<f64>> = suite
        .samples
        .iter()
        .map(|s| {
            let mut row = vec![s.t, s.radius, s.volume, s.mass, s.perimeter_grad, s.coarea];
            row.extend(s.chain.as_array());
            row
        })
        .collect();
    report::table_csv(&["t", "R", "volume", "mass", "perimeter_grad", "coarea", "D1", "D2", "D3", "D4"], &rows)
}

fn subject(cli: &Cli, dim: Dimension) -> Result<Subject, liouville_core::Error> {
    match cli.alpha {
        Some(a) => Subject::shoot(dim, a, cli.rmax, cli.rtol),
        None => Subject::exact(dim, cli.lambda),
    }
}

/// Checks of one verification suite, in the fixed order of the grammar.
fn verify(suite: &Suite, subject: &Subject, cli: &Cli, inputs: &mut BTreeMap<String, InputValue>) -> (Vec<Check>, Option<LevelSuite>) {
    let dim = subject.dim();
    match suite {
        Suite::Pohozaev => (suites::pohozaev(subject, cli.radius), None),
        Suite::Mass => (suites::mass(subject, cli.radius), None),
        Suite::Levelsets { .. } => {
            let levels = suites::level_grid_for(subject);
            inputs.insert("levels".into(), InputValue::List(levels.clone()));
            suites::levelsets(subject, &levels)
        }
        Suite::Asymptotics => {
            let radii = suites::asymptotic_radii(subject);
            inputs.insert("radii".into(), InputValue::List(radii.clone()));
            (suites::asymptotics(subject, &radii), None)
        }
        Suite::Sobolev => (suites::sobolev(subject), None),
        Suite::LimitMass => (suites::limit_mass(&dim), None),
        Suite::All => {
            let parts = [
                Suite::Pohozaev,
                Suite::Mass,
                Suite::Levelsets { levels_out: None },
                Suite::Asymptotics,
                Suite::Sobolev,
                Suite::LimitMass,
            ];
            let results: Vec<_> = parts
                .par_iter()
                .map(|s| {
                    let mut local = BTreeMap::new();
                    let out = verify(s, subject, cli, &mut local);
                    (out, local)
                })
                .collect();
            let mut checks = Vec::new();
            let mut levels = None;
            for ((c, l), local) in results {
                checks.extend(c);
                levels = levels.or(l);
                inputs.extend(local);
            }
            (checks, levels)
        }
    }
}

/// `run_suite`: the report for a parsed command, plus any requested tables.
pub fn run_suite(cli: &Cli) -> Result<(VerificationReport, Dumps), RunError> {
    let dim = validate(cli)?;
    let mut inputs = BTreeMap::new();
    inputs.insert("tolerances".into(), InputValue::List(suites::TOLERANCE_LADDER.to_vec()));
    let mut dumps = Dumps::default();

    let checks = match &cli.command {
        Command::Constants => suites::constants(&dim),
        Command::Exact => {
            inputs.insert("lambda".into(), InputValue::Number(cli.lambda));
            match Subject::exact(dim, cli.lambda) {
                Ok(Subject::Exact(sol)) => suites::exact(&sol),
                Ok(Subject::Shot(_)) => unreachable!(),
                Err(e) => vec![Check::failed("family_member", suites::TOL_CLOSED, e)],
            }
        }
        Command::Shoot { profile_out } => {
            let alpha = cli.alpha.unwrap_or_else(|| family_alpha(&dim, cli.lambda));
            inputs.insert("alpha".into(), InputValue::Number(alpha));
            inputs.insert("rmax".into(), InputValue::Number(cli.rmax));
            inputs.insert("rtol".into(), InputValue::Number(cli.rtol));
            match Subject::shoot(dim, alpha, cli.rmax, cli.rtol) {
                Ok(Subject::Shot(sol)) => {
                    inputs.insert("lambda".into(), InputValue::Number(sol.family_match().lambda()));
                    if let Some(p) = profile_out {
                        dumps.profile = Some((p.clone(), profile_table(&sol)));
                    }
                    suites::shoot(&sol)
                }
                Ok(Subject::Exact(_)) => unreachable!(),
                Err(e) => vec![Check::failed("integrate_radial", suites::TOL_NUMERIC, e)],
            }
        }
        Command::Sweep { alpha_min, alpha_max, count } => {
            let alphas = sweep_alphas(*alpha_min, *alpha_max, *count);
            inputs.insert("alphas".into(), InputValue::List(alphas.clone()));
            inputs.insert("rmax".into(), InputValue::Number(cli.rmax));
            inputs.insert("rtol".into(), InputValue::Number(cli.rtol));
            let per_alpha: Vec<Vec<Check>> = alphas
                .par_iter()
                .enumerate()
                .map(|(k, &a)| {
                    let suffix = format!("[{k}]");
                    match Subject::shoot(dim, a, cli.rmax, cli.rtol) {
                        Ok(Subject::Shot(sol)) => suites::shoot_named(&sol, &suffix),
                        Ok(Subject::Exact(_)) => unreachable!(),
                        Err(e) => vec![Check::failed(format!("integrate_radial{suffix}"), suites::TOL_NUMERIC, e)],
                    }
                })
                .collect();
            per_alpha.into_iter().flatten().collect()
        }
        Command::Verify { suite } => {
            if !matches!(suite, Suite::LimitMass) {
                inputs.insert("R".into(), InputValue::Number(cli.radius));
                match cli.alpha {
                    Some(a) => {
                        inputs.insert("alpha".into(), InputValue::Number(a));
                        inputs.insert("rmax".into(), InputValue::Number(cli.rmax));
                        inputs.insert("rtol".into(), InputValue::Number(cli.rtol));
                    }
                    None => {
                        inputs.insert("lambda".into(), InputValue::Number(cli.lambda));
                    }
                }
            }
            match suite {
                Suite::LimitMass => suites::limit_mass(&dim),
                _ => match subject(cli, dim) {
                    Ok(s) => {
                        let (checks, levels) = verify(suite, &s, cli, &mut inputs);
                        if let (Suite::Levelsets { levels_out: Some(p) }, Some(l)) = (suite, levels) {
                            dumps.levels = Some((p.clone(), level_table(&l)));
                        }
                        checks
                    }
                    Err(e) => vec![Check::failed("integrate_radial", suites::TOL_NUMERIC, e)],
                },
            }
        }
    };

    Ok((VerificationReport::new(cli.command.name(), dim.n(), inputs, checks), dumps))
}

/// Parses `argv` (without the program name), runs, writes, and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match parse_command(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, RunError> {
    let start = Instant::now();
    let (mut report, dumps) = run_suite(cli)?;
    if cli.timing {
        report.timing_ms = start.elapsed().as_millis() as u64;
    }
    for (path, bytes) in [dumps.profile, dumps.levels].into_iter().flatten() {
        write_file(&path, &bytes)?;
    }
    emit_report(&report, cli.format, cli.out.as_deref()).map_err(|source| RunError::Io {
        path: cli.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>")),
        source,
    })?;
    Ok(if report.summary.failed == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
}
