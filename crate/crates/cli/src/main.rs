mod config;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ascertain_core::mc_oracle::{simulate_replications, summarize, write_dump};
use ascertain_core::sensitivity::{run_sweep, write_sweep};
use ascertain_core::{project, Error};
use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 2 config, 3 degenerate counts, 4 solver failure, 1 output I/O.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) if e.is_solver_failure() => 4,
            CliError::Core(e) => match e.root() {
                Error::DegenerateCounts(_) => 3,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Core(e) if e.is_solver_failure() => write!(f, "solver failure: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "output error: {msg}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "ascertain", version, about = "Ascertainment bias and log-rank power projection")]
struct Cli {
    /// Worker threads for sweeps and simulations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Two-sided confidence level for bias intervals (default 0.95).
    #[arg(long)]
    ci_level: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate B, P and k from interim category counts.
    EstimateBias {
        #[command(flatten)]
        common: Common,
    },
    /// Project event counts, the effective hazard ratio and power.
    Project {
        #[command(flatten)]
        common: Common,
        /// Directory for projection.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named or configured parameter sweep.
    Sweep {
        /// fig2-hhyp, fig3-b, fig4-v, fig5-a, s12-pb, s34-rb, s56-tb, or a name from `sweeps`.
        name: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Also write an SVG plot.
        #[arg(long)]
        plots: bool,
    },
    /// Run the individual-level simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Directory for summary.json and the event dump.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides simulation.seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::EstimateBias { common } => {
            let cfg = config::load(&common.config)?;
            let est = cfg.bias(cfg.ci_level(common.ci_level))?;
            Ok(format!("{}{}", report::heading(&cfg), report::bias(&est)))
        }
        Command::Project { common, out } => {
            let cfg = config::load(&common.config)?;
            let (inputs, bias) = cfg.projection_inputs(cfg.ci_level(common.ci_level))?;
            let projection = project(&inputs)?;
            if let Some(dir) = out {
                ensure_dir(&dir)?;
                write_json(&dir.join("projection.json"), &projection)?;
            }
            Ok(format!(
                "{}{}\n{}",
                report::heading(&cfg),
                report::bias(&bias),
                report::projection(&projection, inputs.design.h_hyp)
            ))
        }
        Command::Sweep {
            name,
            common,
            out,
            plots,
        } => {
            let cfg = config::load(&common.config)?;
            let (inputs, _) = cfg.projection_inputs(cfg.ci_level(common.ci_level))?;
            let spec = cfg.sweep(&name, &inputs)?;
            let rows = run_sweep(&spec).map_err(|e| CliError::Config(format!("sweep {name}: {e}")))?;
            ensure_dir(&out)?;
            write_sweep(&out, &spec, &rows, plots).map_err(|e| CliError::Io(e.to_string()))?;
            Ok(report::sweep(&name, &rows))
        }
        Command::Simulate { common, out, seed } => {
            let cfg = config::load(&common.config)?;
            let (sim, dump) = cfg.simulation(seed)?;
            let outcomes = simulate_replications(&sim)?;
            let summary = summarize(&sim, &outcomes)?;
            if let Some(dir) = out {
                ensure_dir(&dir)?;
                write_json(&dir.join("summary.json"), &summary)?;
                if dump > 0 {
                    let path = dir.join("events.csv");
                    let file = fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    write_dump(&sim, 0..dump, std::io::BufWriter::new(file)).map_err(|e| CliError::Io(e.to_string()))?;
                }
            }
            Ok(report::simulation(&summary))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
