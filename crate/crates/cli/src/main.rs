use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mesoherald_cli::{compare, configure_threads, preset, run, CliError, ExperimentConfig, RunManifest};

/// Heralded non-Gaussian state experiments.
///
/// Exit status: 0 on success, 1 for configuration or input errors, 2 when a
/// run raised numerical flags.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML experiment configuration.
    Run {
        config: PathBuf,
        /// Output directory; overrides the one in the file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the figure presets (fig2, fig3, fig4, fig5).
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the preset as TOML instead of running it.
        #[arg(long)]
        dump: bool,
    },
    /// Per-output differences between two runs (manifest files or run directories).
    Compare { a: PathBuf, b: PathBuf },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
}

fn report(manifest: &RunManifest, out: &std::path::Path) -> ExitCode {
    println!(
        "{} outputs in {} ({:.2} s)",
        manifest.outputs.len(),
        out.display(),
        manifest.wall_seconds
    );
    if manifest.flags.is_empty() {
        return ExitCode::SUCCESS;
    }
    for f in &manifest.flags {
        eprintln!("flag {:?} [{}]: {}", f.kind, f.scope, f.detail);
    }
    ExitCode::from(2)
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = out.unwrap_or_else(|| cfg.output.clone());
            let manifest = run(&cfg, &out, None)?;
            Ok(report(&manifest, &out))
        }
        Command::Preset { name, out, dump } => {
            let cfg = preset(&name)?;
            if dump {
                print!("{}", cfg.to_toml());
                return Ok(ExitCode::SUCCESS);
            }
            let out = out.unwrap_or_else(|| cfg.output.clone());
            let manifest = run(&cfg, &out, mesoherald_cli::preset::plot_recipe(&name))?;
            Ok(report(&manifest, &out))
        }
        Command::Compare { a, b } => {
            print!("{}", compare(&a, &b)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { config } => {
            ExperimentConfig::load(&config)?;
            println!("{}: ok", config.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
