use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mmdflow_cli::check::{check_run, find_runs};
use mmdflow_cli::output::{execute, RunSummary};
use mmdflow_cli::spec::{parse_run_spec_with, Overrides, RunSpec, DEFAULT_OUTDIR};
use mmdflow_cli::{exit_code, EXIT_CHECK_FAILED};
use mmdflow_core::{presets, CheckStatus, Error, Result, Scheme};

/// Energy-distance gradient flows on the line, solved in quantile space.
#[derive(Parser, Debug)]
#[command(name = "flow", version)]
struct Cli {
    /// Step size, overriding the spec or preset.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Number of quantile levels.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Final time.
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
    /// implicit, explicit, closed-form or pointwise.
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// Reserved; every scheme is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the flow described by a TOML spec.
    Run {
        spec: PathBuf,
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Run a named reference setup with each of its schemes.
    Preset {
        name: String,
        /// Runs go to OUTDIR/NAME/SCHEME.
        #[arg(long, default_value = DEFAULT_OUTDIR)]
        outdir: PathBuf,
    },
    /// List the preset names.
    List,
    /// Recompute the property checks of stored runs.
    Check {
        rundir: PathBuf,
        /// Exit with status 4 if any check fails.
        #[arg(long)]
        strict: bool,
    },
}

fn overrides(cli: &Cli) -> Result<Overrides> {
    Ok(Overrides {
        tau: cli.tau,
        n: cli.n,
        t_end: cli.t_end,
        scheme: cli.scheme.as_deref().map(str::parse).transpose()?,
        outdir: None,
    })
}

fn report(s: &RunSummary) {
    let failed = s.failed_checks();
    eprintln!(
        "{}: {} states, {} files, {} checks ({} failed)",
        s.outdir.display(),
        s.snapshots,
        s.files.len(),
        s.checks.len(),
        failed
    );
}

fn run(cli: &Cli) -> Result<i32> {
    let ov = overrides(cli)?;
    // a closed pipe (`flow list | head`) is not an error
    let mut stdout = std::io::stdout().lock();
    match &cli.command {
        Command::Run { spec, outdir } => {
            let text = std::fs::read_to_string(spec)
                .map_err(|e| Error::Io(format!("{}: {e}", spec.display())))?;
            let ov = Overrides {
                outdir: outdir.clone(),
                ..ov
            };
            let spec = parse_run_spec_with(&text, &ov)?;
            report(&execute(&spec)?);
            Ok(0)
        }
        Command::Preset { name, outdir } => {
            let p = presets::find(name)?;
            let schemes: Vec<Scheme> = match ov.scheme {
                Some(s) => vec![s],
                None => p.schemes(),
            };
            let specs = schemes
                .into_iter()
                .map(|s| RunSpec::from_preset(p, s, &ov, outdir.join(p.name).join(s.name())))
                .collect::<Result<Vec<_>>>()?;
            // each variant writes its own subdirectory
            let results: Vec<Result<RunSummary>> = std::thread::scope(|scope| {
                let handles: Vec<_> = specs
                    .iter()
                    .map(|s| scope.spawn(move || execute(s)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("run thread panicked"))
                    .collect()
            });
            for r in results {
                report(&r?);
            }
            Ok(0)
        }
        Command::List => {
            for p in &presets::PRESETS {
                let _ = writeln!(stdout, "{:<22} {} -> {}", p.name, p.mu0, p.nu);
            }
            Ok(0)
        }
        Command::Check { rundir, strict } => {
            let mut failed = 0;
            for dir in find_runs(rundir)? {
                let checks = check_run(&dir)?;
                let count = |st: CheckStatus| checks.iter().filter(|c| c.status == st).count();
                let _ = writeln!(
                    stdout,
                    "{}: {} pass, {} fail, {} skipped",
                    dir.display(),
                    count(CheckStatus::Pass),
                    count(CheckStatus::Fail),
                    count(CheckStatus::Skipped)
                );
                for c in checks.iter().filter(|c| c.failed()) {
                    let _ = writeln!(
                        stdout,
                        "  FAIL {} t={} observed={:e} bound={:e} slack={:e}",
                        c.kind.name(),
                        c.time,
                        c.observed,
                        c.bound,
                        c.slack
                    );
                }
                failed += count(CheckStatus::Fail);
            }
            Ok(if *strict && failed > 0 {
                EXIT_CHECK_FAILED
            } else {
                0
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
