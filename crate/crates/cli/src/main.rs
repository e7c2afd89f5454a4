use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mfrf_cli::commands::{self, CommandOutput};
use mfrf_cli::config::{SolverKind, SweepConfig, SweepVar};
use mfrf_cli::output::write_outputs;
use mfrf_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(name = "mfrf", version, about = "Multifunction MIMO waveform design experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct Common {
    /// Configuration file, or a preset name (baseline, table3_row1..5, energy_loss, direction_sweep, constant_modulus).
    #[arg(long, default_value = "baseline")]
    config: String,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured solver.
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Variable to sweep: theta_t, theta_c, theta_jam, e_t or noise_power.
    #[arg(long)]
    var: Option<SweepVar>,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Keep the first jamming direction at theta_c + offset (theta_c sweeps).
    #[arg(long, allow_hyphen_values = true)]
    jam_offset: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Design one waveform and report SINR, matching and emitted signals.
    Design(Common),
    /// Sweep one scalar parameter and tabulate exact and approximate SINR.
    Sweep(SweepArgs),
    /// Monte Carlo symbol error rates for the communication and victim receivers.
    Ser(Common),
    /// Detection-probability curves and the Pd of the designed waveform.
    Detect(Common),
    /// SINR loss against a radar-only design over a transmit-energy grid.
    Compare(Common),
}

fn resolve(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(kind) = common.solver {
        cfg.solver.kind = kind;
    }
    Ok(cfg)
}

fn resolve_sweep(args: &SweepArgs) -> Result<RunConfig, CliError> {
    let mut cfg = resolve(&args.common)?;
    let any = args.var.is_some() || args.from.is_some() || args.to.is_some() || args.step.is_some();
    if any || args.jam_offset.is_some() {
        let base = cfg.sweep.clone();
        let pick = |flag: Option<f64>, from_cfg: Option<f64>, name: &str| {
            flag.or(from_cfg).ok_or_else(|| format!("sweep.{name}: missing (pass --{name})"))
        };
        let var = args.var.or(base.as_ref().map(|s| s.var));
        let from = pick(args.from, base.as_ref().map(|s| s.from), "from");
        let to = pick(args.to, base.as_ref().map(|s| s.to), "to");
        let step = pick(args.step, base.as_ref().map(|s| s.step), "step");
        let mut errors = Vec::new();
        if var.is_none() {
            errors.push("sweep.var: missing (pass --var)".to_string());
        }
        for r in [&from, &to, &step] {
            if let Err(e) = r {
                errors.push(e.clone());
            }
        }
        if !errors.is_empty() {
            return Err(CliError::Config(errors));
        }
        let jam_offset = args.jam_offset.or(base.and_then(|s| s.jam_offset));
        cfg.sweep = Some(SweepConfig {
            var: var.unwrap(),
            from: from.unwrap(),
            to: to.unwrap(),
            step: step.unwrap(),
            jam_offset,
        });
    }
    if cfg.sweep.is_none() {
        return Err(CliError::Config(vec!["sweep: no [sweep] table in the config and no --var given".into()]));
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (name, cfg, common) = match &cli.command {
        Command::Design(c) => ("design", resolve(c)?, c),
        Command::Sweep(s) => ("sweep", resolve_sweep(s)?, &s.common),
        Command::Ser(c) => ("ser", resolve(c)?, c),
        Command::Detect(c) => ("detect", resolve(c)?, c),
        Command::Compare(c) => ("compare", resolve(c)?, c),
    };
    let (out, format) = (&common.out, common.format);
    cfg.validate()?;
    let CommandOutput { tables, summary } = match &cli.command {
        Command::Design(_) => commands::design(&cfg)?,
        Command::Sweep(_) => commands::sweep(&cfg)?,
        Command::Ser(_) => commands::ser(&cfg)?,
        Command::Detect(_) => commands::detect(&cfg)?,
        Command::Compare(_) => commands::compare(&cfg)?,
    };
    let written = match format {
        Format::Csv => write_outputs(out, name, &cfg, &tables)?,
    };
    // A closed stdout (e.g. piped into `head`) is not an error for the run.
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{summary}");
    for path in written {
        let _ = writeln!(stdout, "wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(hint) = e.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
