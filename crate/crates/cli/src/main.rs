//! `photoct`: forward simulation, inversion, verification and artifact inspection.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use photoct::pipeline::{
    describe_artifact, run_forward, run_inversion, run_verify, ExperimentConfig, WORKERS_ENV,
};
use photoct::{Error, ErrorCategory};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "photoct", version, about = "Combined PAT/OCT forward simulation and inversion")]
struct Cli {
    /// Worker threads; overrides the configuration and the PHOTOCT_WORKERS variable.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the phantom and write the OCT and PAT records.
    Forward {
        config: PathBuf,
        /// Output directory, instead of the configured one.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reconstruct the Grüneisen parameter from an OCT and a PAT record.
    Invert {
        config: PathBuf,
        oct: PathBuf,
        pat: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the built-in verification suites; exits with 1 if any check fails.
    Verify {
        config: PathBuf,
        /// Also write the report as JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Describe an artifact (volume sidecar, CSV table or manifest).
    Info { artifact: PathBuf },
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        ErrorCategory::Precondition => EXIT_PRECONDITION,
        ErrorCategory::Convergence => EXIT_CONVERGENCE,
        ErrorCategory::Io => EXIT_IO,
    }
}

fn load(path: &PathBuf, workers: Option<usize>, output: Option<PathBuf>) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        cfg.workers = v.trim().parse().map_err(|_| {
            Error::precondition(format!("{WORKERS_ENV} must be a non-negative integer, got {v:?}"))
        })?;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    if let Some(o) = output {
        cfg.output_dir = o;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Forward { config, output } => {
            let cfg = load(&config, cli.workers, output)?;
            let out = run_forward(&cfg)?;
            println!(
                "forward: {} OCT samples, {} PAT frequencies, {} files in {}",
                out.oct.len(),
                out.pat.freqs.len(),
                out.manifest.files.len(),
                out.output_dir.display()
            );
            Ok(0)
        }
        Command::Invert {
            config,
            oct,
            pat,
            output,
        } => {
            let cfg = load(&config, cli.workers, output)?;
            let out = run_inversion(&cfg, &oct, &pat)?;
            let d = &out.estimate.diagnostics;
            println!(
                "invert: {} support voxels, mask fraction {:.3}, data residual {:.3e}, results in {}",
                d.support_voxels,
                d.mask_fraction,
                d.data_residual,
                out.output_dir.display()
            );
            Ok(0)
        }
        Command::Verify { config, report } => {
            let cfg = load(&config, cli.workers, None)?;
            let r = run_verify(&cfg);
            print!("{}", r.render());
            if let Some(path) = report {
                let text = serde_json::to_string_pretty(&r)
                    .map_err(|e| Error::format(&path, e.to_string()))?;
                std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
            }
            let failed = r.entries.iter().filter(|e| !e.passed).count();
            println!("{} checks, {failed} failed", r.entries.len());
            Ok(if failed == 0 { 0 } else { EXIT_VERIFY_FAILED })
        }
        Command::Info { artifact } => {
            println!("{}", describe_artifact(&artifact)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
