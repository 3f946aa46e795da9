use clap::Parser;
use noisy_rf_cli::{parse_config, run, CliError, Mode, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Resonance fluorescence spectra under classical frequency noise.
///
/// Exit codes: 0 success, 1 i/o error, 2 configuration error, 3 numerical
/// failure, 4 failed oracle check.
#[derive(Debug, Parser)]
#[command(name = "noisy-rf", version)]
struct Args {
    /// What to compute.
    #[arg(value_enum)]
    mode: Mode,

    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output file; the extension is set by the mode.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Overrides the oracle seed from the config.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, env = "NOISY_RF_THREADS")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("noisy-rf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.display().to_string(),
        source,
    })?;
    let cfg = parse_config(&text)?.with_mode(args.mode)?;
    let opts = RunOptions {
        out: args.out.clone(),
        seed: args.seed,
    };
    Ok(run(&cfg, &opts)?.files)
}
