use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use schmidt_cert::{run, CliError, Experiment, ExperimentConfig};

/// Schmidt-number certification experiments.
#[derive(Debug, Parser)]
#[command(name = "schmidt-cert", version)]
struct Args {
    experiment: Experiment,
    /// TOML config; all keys optional.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main_inner(args: Args) -> Result<(), CliError> {
    let (config, base_dir) = match &args.config {
        Some(path) => {
            let base = path.parent().map(PathBuf::from).unwrap_or_default();
            (ExperimentConfig::load(path)?, base)
        }
        None => (ExperimentConfig::default(), PathBuf::from(".")),
    };
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(|o| base_dir.join(o)))
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set `out` in the config".into()))?;
    let output = run(args.experiment, &config, args.seed, &base_dir, args.threads)?;
    for path in output.write(&out_dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("schmidt-cert: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
