use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qsd_cli::{presets, run, CliError, Result, SweepConfig};

/// Quantum scissors simulator: parameter sweeps and figure data.
#[derive(Parser)]
#[command(name = "qsd", version)]
struct Cli {
    /// Directory for CSV and metadata files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Fixed number of Fock levels per mode instead of the automatic choice.
    #[arg(long, global = true)]
    cutoff: Option<usize>,

    /// Worker threads (advisory).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Not supported: nothing in the simulation is random.
    #[arg(long, global = true, hide = true)]
    seed: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file.
    Sweep { config: PathBuf },
    /// Regenerate the data of a figure or a single panel.
    Figure { preset: String },
    /// Check a config file without running it.
    Validate { config: PathBuf },
    /// List the figure presets.
    ListPresets,
}

fn load(path: &Path, cutoff: Option<usize>) -> Result<SweepConfig> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = SweepConfig::parse(&text)?;
    if let Some(levels) = cutoff {
        qsd_cli::override_cutoff(&mut cfg, levels);
    }
    Ok(cfg)
}

fn report(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn execute(cli: Cli) -> Result<()> {
    if cli.seed.is_some() {
        return Err(CliError::validation(
            "--seed is not accepted: the simulation is deterministic and uses no random numbers",
        ));
    }
    if let Some(n) = cli.threads {
        // Only a hint; failure to resize the pool is not an error.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Sweep { config } => {
            let cfg = load(&config, cli.cutoff)?;
            let name = cfg.get("output").map(PathBuf::from).unwrap_or_else(|| {
                let stem = config
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("sweep");
                PathBuf::from(format!("{stem}.csv"))
            });
            let output = cli.out.join(name.file_name().unwrap_or(name.as_os_str()));
            report(&run::run_sweep(&cfg, Some(&output))?);
        }
        Command::Figure { preset } => report(&qsd_cli::run_figure(&preset, &cli.out, cli.cutoff)?),
        Command::Validate { config } => {
            let plan = run::validate(&load(&config, cli.cutoff)?)?;
            println!("ok: {} grid points", plan.points.len());
        }
        Command::ListPresets => {
            for p in presets::PRESETS {
                println!("{:<7} {}", p.id, p.description);
                for s in p.series {
                    println!("  {:<17} {}", s.id, s.axes);
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
