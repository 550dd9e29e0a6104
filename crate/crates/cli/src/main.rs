use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parametrix_cli::config::{resolve_config_path, CONFIG_DIR_ENV};
use parametrix_cli::{run, CliError, CliResult, Command, RunConfig};

#[derive(Parser)]
#[command(name = "parametrix", version, about = "Kernel evaluation, bounds and validation runs")]
struct Cli {
    /// run configuration (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output file; overrides output.path, stdout when neither is set
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// CSV of Z, p, the series terms and the tail bound per grid point
    EvalKernel,
    /// CSV of the lower estimate, p, the series estimate and q per grid point
    EvalBounds,
    /// CSV of u(t, x) for the [solve] problem
    Solve,
    /// JSON report of the invariant suite
    Validate,
    /// TOML [bounds.calibration] table fitted on the grid
    CalibrateBounds,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::EvalKernel => Command::EvalKernel,
            Sub::EvalBounds => Command::EvalBounds,
            Sub::Solve => Command::Solve,
            Sub::Validate => Command::Validate,
            Sub::CalibrateBounds => Command::CalibrateBounds,
        }
    }
}

fn write_out(path: Option<&Path>, body: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main_inner(cli: Cli) -> CliResult<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let dir = std::env::var_os(CONFIG_DIR_ENV).map(PathBuf::from);
    let path = resolve_config_path(cli.config.as_deref(), dir.as_deref())?;
    if cli.verbose {
        eprintln!("config {}", path.display());
    }
    let cfg = RunConfig::load(&path)?;
    let outcome = run(cli.command.into(), &cfg, cli.verbose)?;
    write_out(cli.out.as_deref().or(cfg.output.path.as_deref()), &outcome.body)?;
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
