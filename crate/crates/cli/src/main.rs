use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cubecycles_cli::{execute, read_manifest, write_artifacts, CliError, Command};

#[derive(Parser)]
#[command(name = "cubecycles", version, about = "Cycle spectra of the percolated hypercube")]
struct Cli {
    #[command(subcommand)]
    command: Top,
}

#[derive(Subcommand)]
enum Top {
    /// Replays a JSON manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        /// Overrides the manifest's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    #[command(flatten)]
    Experiment(Command),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cmd = match cli.command {
        Top::Run { manifest, out } => {
            let mut cmd = read_manifest(&manifest)?;
            if let Some(out) = out {
                cmd.set_out(out);
            }
            cmd
        }
        Top::Experiment(cmd) => cmd,
    };
    let artifacts = execute(&cmd)?;
    match cmd.out() {
        Some(dir) => {
            write_artifacts(dir, &artifacts)?;
            for a in &artifacts {
                eprintln!("wrote {}", dir.join(&a.name).display());
            }
        }
        None => {
            let primary = &artifacts[0];
            std::io::stdout()
                .write_all(primary.contents.as_bytes())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(())
}
