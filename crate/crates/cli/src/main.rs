use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bgp_cli::output::{self, Format};
use bgp_cli::validation::{self, Status};
use bgp_cli::{exit, presets, run_sweep, CliError};

#[derive(Parser)]
#[command(name = "bgp", version, about = "Geometric phase of two qubits in a dephasing environment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config.
    Run {
        config: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; all cores when omitted.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the acceptance checks and print one line per check.
    Validate {
        /// Only run checks whose id equals, or whose name contains, this string.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Built-in figure configurations.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List preset names.
    List,
    /// Print a preset's configuration files.
    Show { name: String },
    /// Run a preset, writing `<name>_<part>.<ext>` into the output directory.
    Run {
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn write_to(table: &bgp_cli::Table, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => output::write(table, format, BufWriter::new(File::create(path)?)),
        None => output::write(table, format, io::stdout().lock()),
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, out, workers, format } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg = bgp_cli::parse(&text)?;
            let table = run_sweep(&cfg, workers)?;
            write_to(&table, format, out.as_deref())?;
            Ok(exit::SUCCESS)
        }
        Command::Validate { filter } => {
            let mut stdout = io::stdout().lock();
            let mut outcomes = Vec::new();
            for c in validation::criteria() {
                if let Some(f) = &filter {
                    if c.id != f && !c.name.contains(f.as_str()) {
                        continue;
                    }
                }
                let o = validation::run_one(&c);
                writeln!(stdout, "{}", o.line())?;
                outcomes.push(o);
            }
            let failed = outcomes.iter().filter(|o| o.status == Status::Fail).count();
            writeln!(stdout, "{} checks, {} failed", outcomes.len(), failed)?;
            Ok(if failed == 0 { exit::SUCCESS } else { exit::VALIDATION_FAILED })
        }
        Command::Presets { action } => match action {
            PresetAction::List => {
                for p in presets::PRESETS {
                    println!("{:<6} {}", p.name, p.description);
                }
                Ok(exit::SUCCESS)
            }
            PresetAction::Show { name } => {
                let preset = presets::find(&name).ok_or(CliError::UnknownPreset(name))?;
                for (label, text) in preset.parts {
                    println!("# part: {label}{text}");
                }
                Ok(exit::SUCCESS)
            }
            PresetAction::Run { name, out_dir, workers, format } => {
                let preset = presets::find(&name).ok_or_else(|| CliError::UnknownPreset(name.clone()))?;
                std::fs::create_dir_all(&out_dir)?;
                for (label, cfg) in preset.configs()? {
                    let table = run_sweep(&cfg, workers)?;
                    let path = out_dir.join(format!("{name}_{label}.{}", extension(format)));
                    write_to(&table, format, Some(&path))?;
                    eprintln!("wrote {} ({} rows)", path.display(), table.rows.len());
                }
                Ok(exit::SUCCESS)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        // a closed downstream pipe (e.g. `| head`) is not an error
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::CONFIG_ERROR as u8)
        }
    }
}
