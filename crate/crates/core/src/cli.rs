//! Command-line front end for the suites.
//!
//! Exit codes: `0` when every internal check passes (discrepancy rows do
//! not count), `1` on a failed check or an I/O error, `2` on invalid
//! parameters or usage.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::{emit_csv, emit_json, Verdict, VerificationReport};
use crate::suites::{self, SuiteConfig, SweepAxis, SweepConfig, DEFAULT_SAMPLES};
use crate::Result;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "LBVERIFY_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "lbverify", version, about = "Verify the cylindrical scalar-field solution with cosmological constant")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = suites::DEFAULT_LAMBDA, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = suites::DEFAULT_XI, allow_negative_numbers = true)]
    pub xi: f64,
    #[arg(long = "e-tilde", allow_negative_numbers = true)]
    pub e_tilde: Option<f64>,
    /// Defaults to -2a.
    #[arg(long = "r-min", allow_negative_numbers = true)]
    pub r_min: Option<f64>,
    /// Defaults to 2a.
    #[arg(long = "r-max", allow_negative_numbers = true)]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    /// Extra `b = |xi / E|` for the polynomial root and sign analysis.
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

impl RunArgs {
    pub fn config(&self) -> SuiteConfig {
        SuiteConfig {
            lambda: self.lambda,
            xi: self.xi,
            e_tilde: self.e_tilde,
            r_min: self.r_min,
            r_max: self.r_max,
            samples: self.samples,
            b: self.b,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// `start:stop:count` or a single value.
    #[arg(long, default_value = "3", allow_hyphen_values = true)]
    pub lambda: SweepAxis,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub xi: SweepAxis,
    #[arg(long = "e-tilde", default_value = "2", allow_hyphen_values = true)]
    pub e_tilde: SweepAxis,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form residuals, curvature oracle, RK4, scalar first integral.
    Verify(RunArgs),
    /// Fixed point and Jacobian spectrum of the reduced system.
    Stability(RunArgs),
    /// Effective stress and energy-condition margins.
    Energy(RunArgs),
    /// Timelike and null radial congruences (needs --e-tilde).
    Congruence(RunArgs),
    /// Tortoise coordinate: series against quadrature.
    Tortoise(RunArgs),
    /// Grid over (lambda, xi, E).
    Sweep(SweepArgs),
}

impl Command {
    fn output(&self) -> &Output {
        match self {
            Command::Verify(a) | Command::Stability(a) | Command::Energy(a) | Command::Congruence(a) | Command::Tortoise(a) => {
                &a.output
            }
            Command::Sweep(a) => &a.output,
        }
    }

    /// Rejects unusable parameters before any work starts.
    pub fn validate(&self) -> Result<()> {
        match self {
            Command::Congruence(a) => a.config().validate(true),
            Command::Verify(a) | Command::Stability(a) | Command::Energy(a) | Command::Tortoise(a) => a.config().validate(false),
            Command::Sweep(a) => a.sweep_config().validate(),
        }
    }

    pub fn execute(&self) -> Result<VerificationReport> {
        match self {
            Command::Verify(a) => suites::verify(&a.config()),
            Command::Stability(a) => suites::stability(&a.config()),
            Command::Energy(a) => suites::energy(&a.config()),
            Command::Congruence(a) => suites::congruence(&a.config()),
            Command::Tortoise(a) => suites::tortoise_suite(&a.config()),
            Command::Sweep(a) => suites::sweep(&a.sweep_config()),
        }
    }
}

impl SweepArgs {
    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig { lambda: self.lambda, xi: self.xi, e_tilde: self.e_tilde, samples: self.samples }
    }
}

fn thread_cap() -> std::result::Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV}={v} is not a positive integer")),
        },
    }
}

fn write_report(report: &VerificationReport, output: &Output) -> io::Result<()> {
    let sink: Box<dyn Write> = match &output.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let w = BufWriter::new(sink);
    match output.format {
        Format::Csv => emit_csv(report, w),
        Format::Json => emit_json(report, w),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Diagnostics go to stderr.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = cli.command.validate() {
        eprintln!("lbverify: invalid parameters: {e}");
        return EXIT_USAGE;
    }
    let threads = match thread_cap() {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("lbverify: {msg}");
            return EXIT_USAGE;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("lbverify: thread pool: {e}");
            return EXIT_FAILURE;
        }
    };
    let report = match pool.install(|| cli.command.execute()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("lbverify: {e}");
            return EXIT_FAILURE;
        }
    };
    if let Err(e) = write_report(&report, cli.command.output()) {
        eprintln!("lbverify: write failed: {e}");
        return EXIT_FAILURE;
    }
    eprintln!(
        "lbverify: {} rows, {} pass, {} fail, {} discrepancy-logged",
        report.rows.len(),
        report.count(Verdict::Pass),
        report.count(Verdict::Fail),
        report.count(Verdict::DiscrepancyLogged)
    );
    for row in report.failures() {
        eprintln!("lbverify: FAIL {} at {}: {:e} (tolerance {:e})", row.check, row.location, row.value, row.tolerance);
    }
    if report.all_internal_pass() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_for_bad_input() {
        assert_eq!(run(["lbverify", "verify", "--lambda", "-1"]), EXIT_USAGE);
        assert_eq!(run(["lbverify", "congruence", "--xi", "0", "--e-tilde", "0.5"]), EXIT_USAGE);
        assert_eq!(run(["lbverify", "congruence"]), EXIT_USAGE);
        assert_eq!(run(["lbverify", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["lbverify", "energy", "--samples", "1"]), EXIT_USAGE);
        assert_eq!(run(["lbverify", "sweep", "--lambda", "1:2"]), EXIT_USAGE);
    }

    #[test]
    fn negative_values_parse() {
        let cli = Cli::try_parse_from(["lbverify", "verify", "--xi", "-0.5", "--r-min", "-1", "--r-max", "1"]).unwrap();
        let Command::Verify(a) = cli.command else { panic!() };
        assert_eq!((a.xi, a.r_min, a.r_max), (-0.5, Some(-1.0), Some(1.0)));
    }
}
