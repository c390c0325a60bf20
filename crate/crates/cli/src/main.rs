use clap::{Parser, Subcommand};
use ifconv_cli::commands::{run, Command};
use ifconv_cli::config::read_config;
use ifconv_cli::report::Report;
use std::path::PathBuf;
use std::process::ExitCode;

/// Decides whether integral functionals of a one-dimensional diffusion
/// converge, and checks the answer by simulation.
#[derive(Parser)]
#[command(name = "ifconv", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Override `simulation.master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of `output.report` or stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the problem analytically.
    Classify { config: PathBuf },
    /// Classify, then compare the verdict with simulated paths.
    Verify { config: PathBuf },
    /// Run the statistical checks of the underlying path identities.
    Identities { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, path) = match cli.command {
        Cmd::Classify { config } => (Command::Classify, config),
        Cmd::Verify { config } => (Command::Verify, config),
        Cmd::Identities { config } => (Command::Identities, config),
    };
    let mut report_path = cli.out.clone();
    let report = match read_config(&path) {
        Err(e) => Report::new(cmd.name(), None).fail(&e),
        Ok(mut config) => {
            if let Some(seed) = cli.seed {
                config.simulation.master_seed = seed;
            }
            if report_path.is_none() {
                report_path = config.output.report.clone();
            }
            match cli.threads {
                Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    Ok(pool) => pool.install(|| run(cmd, config)),
                    Err(e) => {
                        eprintln!("ifconv: cannot start {n} threads: {e}");
                        return ExitCode::from(1);
                    }
                },
                None => run(cmd, config),
            }
        }
    };
    if let Some(err) = &report.error {
        eprintln!("ifconv: {}", err.message);
    }
    let json = report.to_json();
    match report_path {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, json) {
                eprintln!("ifconv: cannot write {}: {e}", p.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{json}"),
    }
    ExitCode::from(report.status.exit_code() as u8)
}
