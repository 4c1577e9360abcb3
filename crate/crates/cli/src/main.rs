mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use config::{accepted_benchmarks, Command, ConfigError, RunConfig, Settings};

/// Meshfree elasticity and viscoelasticity benchmarks.
///
/// Settings come from an optional TOML file (`--config`) whose keys match
/// the long flag names with underscores; flags override the file. The
/// NIVED_THREADS environment variable caps the number of worker threads.
#[derive(Parser, Debug)]
#[command(name = "nived", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// TOML configuration file
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Solve one benchmark and write summary.json and fields.vtk
    Run(Common),
    /// Run a refinement family and write rates.csv
    Convergence(Common),
    /// Smallest eigenpairs of the unconstrained stiffness: spectrum.csv and mode VTK files
    Eigen(Common),
    /// Viscoelastic cylinder under internal pressure: history.csv
    Cylinder(Common),
    /// Write a generated background mesh to mesh.txt
    MeshGen(Common),
}

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("NIVED_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("NIVED_THREADS must be a positive integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn usage_error(command: Command, err: &ConfigError) -> ExitCode {
    let name = serde_json::to_value(command).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
    let mut cmd = Cli::command();
    cmd.build();
    let usage = cmd
        .find_subcommand_mut(&name)
        .map(|c| c.render_usage().to_string())
        .unwrap_or_else(|| Cli::command().render_usage().to_string());
    eprintln!("error: {err}");
    if matches!(err, ConfigError::UnknownBenchmark(_)) {
        eprintln!("known benchmarks: {}", accepted_benchmarks(command).join(", "));
    }
    eprintln!("\n{usage}\n\nFor more information, try '--help'.");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let (command, common) = match cli.command {
        Sub::Run(c) => (Command::Run, c),
        Sub::Convergence(c) => (Command::Convergence, c),
        Sub::Eigen(c) => (Command::Eigen, c),
        Sub::Cylinder(c) => (Command::Cylinder, c),
        Sub::MeshGen(c) => (Command::MeshGen, c),
    };
    let settings = match &common.config {
        Some(path) => Settings::from_file(path).map(|file| common.settings.over(file)),
        None => Ok(common.settings),
    };
    let config = match settings.and_then(|s| RunConfig::resolve(command, s)) {
        Ok(c) => c,
        Err(e) => return usage_error(command, &e),
    };
    let result = match command {
        Command::Run => commands::run(&config),
        Command::Convergence => commands::convergence(&config),
        Command::Eigen => commands::eigen(&config),
        Command::Cylinder => commands::cylinder(&config),
        Command::MeshGen => commands::mesh_gen(&config),
    };
    match result {
        Ok(message) => {
            println!("{message}");
            ExitCode::SUCCESS
        }
        Err(commands::CliError::Config(e)) => usage_error(command, &e),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
