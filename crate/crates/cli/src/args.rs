use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

/// Verification reports for the n-Laplace Liouville equation -Δ_n U = e^U.
#[derive(Parser, Debug, Clone, PartialEq)]
#[command(name = "liouville", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Space dimension (2..=16).
    #[arg(long, global = true, default_value_t = 2)]
    pub n: usize,

    /// Scale of the explicit family member.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 1.0)]
    pub lambda: f64,

    /// Center value for a shot profile; verification suites then run on the
    /// numerical solution instead of the explicit one.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,

    /// Outer radius of the shooting integration.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 1000.0)]
    pub rmax: f64,

    /// Relative tolerance of the shooting integration.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 1e-10)]
    pub rtol: f64,

    /// Ball radius for the Pohozaev and mass-flux checks.
    #[arg(long = "R", global = true, allow_negative_numbers = true, default_value_t = 1.0)]
    pub radius: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Report destination; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Record wall-clock time in the report (makes output run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Dimensional constants and their consistency.
    Constants,
    /// Point checks on the explicit family member.
    Exact,
    /// Shoot the radial problem from the center value and compare with the family.
    Shoot {
        /// Write the profile table (r, U, dU_dr, flux, mass_in_ball) as CSV.
        #[arg(long)]
        profile_out: Option<PathBuf>,
    },
    /// Run one verification suite, or all of them.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Shoot over a grid of center values.
    Sweep {
        #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
        alpha_min: f64,
        #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
        alpha_max: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Suite {
    Pohozaev,
    Mass,
    Levelsets {
        /// Write the level-set table as CSV.
        #[arg(long)]
        levels_out: Option<PathBuf>,
    },
    Asymptotics,
    Sobolev,
    LimitMass,
    All,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Pohozaev => "pohozaev",
            Suite::Mass => "mass",
            Suite::Levelsets { .. } => "levelsets",
            Suite::Asymptotics => "asymptotics",
            Suite::Sobolev => "sobolev",
            Suite::LimitMass => "limit-mass",
            Suite::All => "all",
        }
    }
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Constants => "constants".into(),
            Command::Exact => "exact".into(),
            Command::Shoot { .. } => "shoot".into(),
            Command::Verify { suite } => format!("verify {}", suite.name()),
            Command::Sweep { .. } => "sweep".into(),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// `parse_command`.
pub fn parse_command<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = std::iter::once(OsString::from("liouville")).chain(argv.into_iter().map(Into::into));
    Cli::try_parse_from(args)
}
