use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use czgate::cli::{cmd_compare, cmd_gate, cmd_leakage, cmd_spectrum, CommandOutput, RunConfig};
use czgate::devices::DeviceKind;
use czgate::dynamics::GateMode;
use czgate::{CzError, Result};

#[derive(Parser)]
#[command(name = "czgate", version, about = "Controlled-Z gate simulator for junction-coupled superconducting qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration (defaults apply to omitted fields).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Device preset used when no configuration file is given.
    #[arg(long, global = true, value_enum)]
    device: Option<DeviceArg>,
    /// CSV output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parameter sweeps (0 = one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Oscillator levels per qubit.
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Propagator convergence tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the per-run gate reports as JSON.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Dressed-energy shifts and Δ_CZ over the T_c grid.
    Spectrum,
    /// Leakage from |11⟩ over the τ_s grid.
    Leakage,
    /// Gate error and gate time over the T₀ grid.
    Gate {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Zero-wait gates for all three devices (or every configuration in the file).
    Compare,
}

#[derive(Clone, Copy, ValueEnum)]
enum DeviceArg {
    TransmonPair,
    GatemonPair,
    HPair,
}

impl From<DeviceArg> for DeviceKind {
    fn from(d: DeviceArg) -> Self {
        match d {
            DeviceArg::TransmonPair => DeviceKind::TransmonPair,
            DeviceArg::GatemonPair => DeviceKind::GatemonPair,
            DeviceArg::HPair => DeviceKind::HPair,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Plateau,
    ZeroWait,
}

fn load(cli: &Cli, allow_many: bool) -> Result<Vec<RunConfig>> {
    let mut cfgs = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CzError::Config(format!("{}: {e}", path.display())))?;
            let v = RunConfig::many_from_json(&text)?;
            if v.len() != 1 && !allow_many {
                return Err(CzError::Config("this command takes a single configuration object".into()));
            }
            v
        }
        None => match (cli.device, allow_many) {
            (Some(d), _) => vec![RunConfig::preset(d.into())],
            (None, true) => [DeviceKind::TransmonPair, DeviceKind::GatemonPair, DeviceKind::HPair]
                .into_iter()
                .map(RunConfig::preset)
                .collect(),
            (None, false) => vec![RunConfig::preset(DeviceKind::TransmonPair)],
        },
    };
    for c in &mut cfgs {
        if let Some(n) = cli.levels {
            c.levels = n;
        }
        if let Some(t) = cli.tol {
            c.tol = t;
        }
        c.validate()?;
    }
    Ok(cfgs)
}

fn run(cli: &Cli) -> Result<CommandOutput> {
    let jobs = cli.jobs.unwrap_or(0);
    match &cli.command {
        Command::Spectrum => cmd_spectrum(&load(cli, false)?[0], jobs),
        Command::Leakage => cmd_leakage(&load(cli, false)?[0], jobs),
        Command::Gate { mode } => {
            let cfg = &load(cli, false)?[0];
            let mode = match mode {
                Some(ModeArg::Plateau) => GateMode::Plateau,
                Some(ModeArg::ZeroWait) => GateMode::ZeroWait,
                None => cfg.sweep.mode,
            };
            cmd_gate(cfg, mode, jobs)
        }
        Command::Compare => cmd_compare(&load(cli, true)?, jobs),
    }
}

fn emit(cli: &Cli, out: &CommandOutput) -> Result<()> {
    match &cli.out {
        Some(p) => out.table.write(fs::File::create(p)?)?,
        None => out.table.write(std::io::stdout().lock())?,
    }
    if let Some(p) = &cli.report {
        let json = serde_json::to_string_pretty(&out.reports).map_err(|e| CzError::Io(e.to_string()))?;
        fs::write(p, json + "\n")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|out| emit(&cli, &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({ "error": { "code": e.code(), "message": e.to_string() } });
            let _ = writeln!(std::io::stderr(), "{record}");
            ExitCode::from(match e {
                CzError::Config(_) | CzError::Io(_) => 2,
                _ => 1,
            })
        }
    }
}
