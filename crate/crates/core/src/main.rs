use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavedecay::cli::{self, Axes, CliError, ExperimentConfig, Mode, Report};

#[derive(Parser)]
#[command(name = "wavedecay", version, about = "Decay-rate experiments for damped semilinear wave equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a decay envelope and compare the closed-form families.
    Envelope(RunArgs),
    /// Run the finite-difference simulator and fit decay laws.
    Simulate(RunArgs),
    /// Trace rays and compute the geometric control time.
    Raytrace(RunArgs),
    /// Run the built-in property suite.
    Verify(RunArgs),
    /// Regenerate the table of decay families.
    Reproduce(RunArgs),
    /// Plot a CSV file as SVG (first column is x).
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        svg: PathBuf,
        /// linear, semilogy or loglog
        #[arg(long, default_value = "linear", value_parser = parse_axes)]
        axes: Axes,
    },
}

fn parse_axes(s: &str) -> Result<Axes, String> {
    s.parse()
}

fn execute(mode: Mode, args: RunArgs) -> Result<Report, CliError> {
    let mut cfg = match &args.config {
        Some(path) => cli::parse_config(path, mode)?,
        None if matches!(mode, Mode::Verify | Mode::Reproduce) => ExperimentConfig::parse_str("")?,
        None => {
            return Err(CliError::Validation { key: "--config".into(), constraint: format!("required for {mode}") })
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.unwrap_or_else(|| cfg.output.dir.clone());
    let report = cli::run_mode(mode, &cfg, &out)?;
    for c in &report.checks {
        let status = match (c.threshold, c.pass) {
            (None, _) => "INFO",
            (Some(_), true) => "PASS",
            (Some(_), false) => "FAIL",
        };
        let threshold = c.threshold.map_or_else(String::new, |t| format!(" (threshold {})", cli::fmt_f64(t)));
        println!("{status} {} = {}{threshold}", c.name, cli::fmt_f64(c.value));
    }
    let failed = report.failures().count();
    if failed > 0 {
        return Err(CliError::ChecksFailed { failed });
    }
    Ok(report)
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let result = cli::init_threads().and_then(|()| match args.command {
        Command::Envelope(a) => execute(Mode::Envelope, a).map(drop),
        Command::Simulate(a) => execute(Mode::Simulate, a).map(drop),
        Command::Raytrace(a) => execute(Mode::Raytrace, a).map(drop),
        Command::Verify(a) => execute(Mode::Verify, a).map(drop),
        Command::Reproduce(a) => execute(Mode::Reproduce, a).map(drop),
        Command::Plot { csv, svg, axes } => cli::emit_plot(&csv, &svg, axes),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
