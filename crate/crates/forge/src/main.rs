use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mikado_forge::{init_threads, run, DirSink, Experiment, ExperimentConfig};

/// Runs one experiment and writes its reports and fields.
///
/// Exit status: 0 pass, 1 failed assertion, 2 bad configuration,
/// 3 budget or resource exhaustion.
#[derive(Parser, Debug)]
#[command(name = "mikado-forge", version)]
struct Cli {
    /// mikado-verify, osc-verify, ci-step, ci-run, solve, maxprinc, moser,
    /// commutator, counterexample or uniqueness
    experiment: String,
    /// `key = value` file; every key has a default when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `out_dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed, overriding the config
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match go(&cli) {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("mikado-forge: {msg}");
            code
        }
    };
    ExitCode::from(code as u8)
}

fn go(cli: &Cli) -> Result<i32, (i32, String)> {
    let config_err = |e: mikado_forge::ConfigError| (2, e.to_string());
    init_threads().map_err(|e| (2, e))?;
    let experiment: Experiment = cli.experiment.parse().map_err(config_err)?;
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| (2, format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = ExperimentConfig::from_text(experiment, &text).map_err(config_err)?;
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed);
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.raw("out_dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut sink = DirSink::new(&out).map_err(|e| (3, format!("{}: {e}", out.display())))?;
    let report = run(&cfg, &mut sink).map_err(|e| (e.exit_code(), e.to_string()))?;
    let status = report.status();
    for name in report.failed() {
        eprintln!("failed check: {name}");
    }
    println!("{experiment}: {} ({})", status.name(), out.display());
    Ok(status.exit_code())
}
