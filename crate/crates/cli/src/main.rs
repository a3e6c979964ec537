use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sdemsr_cli::{load_config, run, CliError, Command, RouteSpec};

/// Perturbative SDE and MSR expansions, numerical evaluation and checks.
#[derive(Parser, Debug)]
#[command(name = "sdemsr", version)]
struct Args {
    /// Subcommand to run.
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    config: PathBuf,
    /// Override a config entry, e.g. `--set model.sigma=0.5`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads for the parallel engines.
    #[arg(long)]
    jobs: Option<usize>,
    /// SDE contraction route; shorthand for `--set expansion.route=...`.
    #[arg(long, value_enum)]
    route: Option<RouteSpec>,
    /// Output directory; shorthand for `--set output.directory=...`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sdemsr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let mut overrides = args.overrides.clone();
    if let Some(r) = args.route {
        overrides.push(format!("expansion.route=\"{}\"", if r == RouteSpec::Lemma42 { "lemma42" } else { "direct" }));
    }
    if let Some(o) = &args.out {
        overrides.push(format!("output.directory={:?}", o.display().to_string()));
    }
    let cfg = load_config(&args.config, &overrides)?;
    if let Some(j) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| CliError::Config { field: "--jobs".into(), message: e.to_string() })?;
    }
    let outcome = run(args.command, &cfg)?;
    print!("{}", outcome.summary);
    for a in &outcome.artifacts {
        println!("wrote {}", a.display());
    }
    if outcome.failed_checks > 0 {
        return Err(CliError::CheckFailed(outcome.failed_checks));
    }
    Ok(())
}
