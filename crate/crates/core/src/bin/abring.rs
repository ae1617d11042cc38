use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use abring::cli::{
    cmd_check, cmd_energy, cmd_entropy, cmd_figures, CliError, CommandOutput, ConfigError,
    OutputFormat, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "abring",
    version,
    about = "Bound-state energies and Shannon entropies on a screened AB ring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy levels at every sweep point
    Energy(Opts),
    /// Position and momentum entropies at every sweep point
    Entropy(Opts),
    /// Effective-potential and density curves
    Figures(Opts),
    /// Property suite over the library and the configured sweep
    Check(Opts),
}

#[derive(clap::Args)]
struct Opts {
    #[arg(long)]
    config: PathBuf,
    /// Output file (a directory for `figures`); stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("abring: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ABRING_THREADS") else {
        return Ok(());
    };
    let threads = raw
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            ConfigError::Conflict(format!(
                "ABRING_THREADS must be a positive integer, got {raw:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Output(e.to_string()))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    let (opts, command) = match &cli.command {
        Command::Energy(o) => (o, "energy"),
        Command::Entropy(o) => (o, "entropy"),
        Command::Figures(o) => (o, "figures"),
        Command::Check(o) => (o, "check"),
    };
    let cfg = RunConfig::from_path(&opts.config)?;
    let format = match opts.format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
        None => cfg.output.format,
    };
    let out = opts.out.clone().or_else(|| cfg.output.path.clone());

    match command {
        "energy" => emit(cmd_energy(&cfg, format)?, out),
        "entropy" => emit(cmd_entropy(&cfg, format)?, out),
        "figures" => {
            let dir = out.unwrap_or_else(|| PathBuf::from("figures"));
            let (files, warnings) = cmd_figures(&cfg, &dir)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            for f in files {
                println!("{}", f.display());
            }
            Ok(0)
        }
        _ => {
            let (output, ok) = cmd_check(&cfg)?;
            emit(output, out)?;
            Ok(if ok { 0 } else { 1 })
        }
    }
}

fn emit(output: CommandOutput, out: Option<PathBuf>) -> Result<u8, CliError> {
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    match out {
        Some(path) => std::fs::write(&path, output.text)
            .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(output.text.as_bytes())
            .map_err(|e| CliError::Output(e.to_string()))?,
    }
    Ok(0)
}
