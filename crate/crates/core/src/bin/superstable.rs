use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use superstable::harness::commands::{audit_command, bounds_command, exact_pressure_command, gcmc_command, probe_command, Boundary, Status};
use superstable::harness::experiment::TableVerdict;
use superstable::harness::{run_experiment, CsvDoc, ExperimentPlan, RunOptions};
use superstable::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "superstable", version, about = "Pressure bounds and convergence sweeps for continuum particle systems")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Experiment plan (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the plan's root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; without it results go to standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundaryArg {
    Free,
    Omega,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Free => Boundary::Free,
            BoundaryArg::Omega => Boundary::Omega,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Audits the potential, envelope and growth function.
    Audit,
    /// Bounds report for one box and its boundary configuration.
    Bounds {
        /// Half-size L; defaults to the first size of the plan.
        #[arg(long)]
        size: Option<f64>,
    },
    /// Growth-balance and margin-decay probes with the power-law gate.
    Probe,
    /// Truncated series pressure, with the hard-rod oracle when it applies.
    ExactPressure {
        #[arg(long)]
        size: Option<f64>,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Free)]
        boundary: BoundaryArg,
    },
    /// A single grand-canonical chain.
    Gcmc {
        #[arg(long)]
        size: Option<f64>,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Free)]
        boundary: BoundaryArg,
    },
    /// The convergence sweep over the plan's box series.
    Sweep {
        /// Runs plans that fail the power-law gate, stamping their outputs.
        #[arg(long)]
        contrast: bool,
    },
}

fn emit(doc: &CsvDoc, out: &Option<PathBuf>, plan: &ExperimentPlan, name: &str) -> Result<()> {
    match out {
        Some(dir) => doc.write(&dir.join(&plan.name).join(format!("{name}.csv"))),
        None => {
            print!("{}", doc.render()?);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<Status> {
    let Format::Csv = cli.global.format;
    let path = cli.global.config.ok_or_else(|| Error::Validation("--config <file> is required".into()))?;
    let (mut plan, base) = ExperimentPlan::load(&path)?;
    if let Some(s) = cli.global.seed {
        plan.seed = s;
    }
    let base = base.as_deref().map(Path::to_path_buf);
    let base = base.as_deref();
    let out = cli.global.out;
    match cli.command {
        Command::Audit => {
            let (doc, status) = audit_command(&plan, base)?;
            emit(&doc, &out, &plan, "audit")?;
            Ok(status)
        }
        Command::Bounds { size } => {
            let (doc, status, _) = bounds_command(&plan, base, size)?;
            emit(&doc, &out, &plan, "bounds")?;
            Ok(status)
        }
        Command::Probe => {
            let (doc, status) = probe_command(&plan, base)?;
            emit(&doc, &out, &plan, "probes")?;
            Ok(status)
        }
        Command::ExactPressure { size, boundary } => {
            let (doc, status, _) = exact_pressure_command(&plan, base, size, boundary.into())?;
            emit(&doc, &out, &plan, "exact-pressure")?;
            Ok(status)
        }
        Command::Gcmc { size, boundary } => {
            let (doc, status) = gcmc_command(&plan, base, size, boundary.into())?;
            emit(&doc, &out, &plan, "gcmc")?;
            Ok(status)
        }
        Command::Sweep { contrast } => {
            let res = run_experiment(&plan, base, &RunOptions { out: out.clone(), contrast })?;
            if out.is_none() {
                print!("{}", res.table.to_csv().render()?);
            } else {
                eprintln!("verdict: {}", res.table.verdict.name());
            }
            Ok(if res.table.verdict == TableVerdict::Converging { Status::Success } else { Status::Inconclusive })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::of_error(&e) as u8)
        }
    }
}
