//! `corrmatch`: command-line driver for layouts, detector graphs, Monte Carlo
//! runs and the closed-form counts.
//!
//! Every subcommand writes one JSON line to stdout, except `sweep`, which
//! writes CSV.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use corrmatch_core::analytics::{census_no_odd_y_chain, count_example_paths, min_weight_ratio, pl_basic, pl_ideal};
use corrmatch_core::harness::{self, EarlyStop};
use corrmatch_core::{build_layout, Basis, DecoderKind, DetectorModel, Error, Mode, TrialConfig};
use num_traits::ToPrimitive;
use serde_json::json;

/// Environment variable holding the default worker count.
const WORKERS_ENV: &str = "CORRMATCH_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "corrmatch",
    version,
    about = "Correlated matching decoder toolkit for the planar surface code"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the qubit layout of a distance-d patch.
    Layout {
        #[arg(long)]
        distance: usize,
    },
    /// Emit the detector graph of one error basis.
    Trace {
        #[arg(long)]
        distance: usize,
        #[arg(long, default_value = "perfect2d")]
        mode: Mode,
        #[arg(long)]
        p: f64,
        /// Noisy rounds in fault-tolerant mode (default: distance).
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, value_enum, default_value_t = BasisArg::X)]
        basis: BasisArg,
    },
    /// Run one (d, p) cell.
    Simulate(RunArgs),
    /// Run a grid of cells and write CSV.
    Sweep {
        #[command(flatten)]
        run: SweepArgs,
        /// Destination file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Closed-form path-counting quantities.
    Analytic {
        /// Path length for the minimum-weight pattern ratio.
        #[arg(long)]
        n: Option<u64>,
        /// Even distance for the leading-order logical error rates.
        #[arg(long)]
        distance: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Count error patterns with no odd-length Y chain.
    Census {
        #[arg(long, default_value_t = 20)]
        n: u32,
        #[arg(long, default_value_t = 10)]
        k: u32,
    },
    /// Path counts for the two-event example on the distance-9 patch.
    Paths,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BasisArg {
    X,
    Z,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::X => Basis::X,
            BasisArg::Z => Basis::Z,
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value = "perfect2d")]
    mode: Mode,
    #[arg(long, default_value = "independent")]
    decoder: DecoderKind,
    /// Noisy rounds in fault-tolerant mode (default: distance).
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    trials: u64,
    /// Master seed; required so every run is reproducible.
    #[arg(long)]
    seed: u64,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Stop a cell after this many X failures (checked between waves).
    #[arg(long)]
    max_failures: Option<u64>,
    /// Never stop early before this many trials.
    #[arg(long, default_value_t = 0)]
    min_trials: u64,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    distance: usize,
    #[arg(long)]
    p: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    distances: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    ps: Vec<f64>,
    #[command(flatten)]
    common: Common,
}

impl Common {
    fn config(&self, d: usize, p: f64) -> TrialConfig {
        let mut config = TrialConfig::new(self.mode, self.decoder, d, p, self.trials, self.seed);
        config.rounds = self.rounds;
        config.workers = self.workers.unwrap_or_else(default_workers);
        config.early_stop = self.max_failures.map(|max_failures| EarlyStop {
            min_trials: self.min_trials,
            max_failures,
        });
        config
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn print_line(value: &serde_json::Value) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Layout { distance } => {
            let layout = build_layout(distance)?;
            print_line(&serde_json::to_value(layout.to_document())?)
        }
        Command::Trace {
            distance,
            mode,
            p,
            rounds,
            basis,
        } => {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::InvalidConfig(format!("p must lie in [0, 0.5), got {p}")).into());
            }
            let layout = build_layout(distance)?;
            let model = match mode {
                Mode::Perfect2d => DetectorModel::perfect_measurement(&layout, p)?,
                Mode::FaultTolerant3d => {
                    let rounds = rounds.unwrap_or(distance);
                    if rounds == 0 {
                        return Err(Error::InvalidConfig("rounds must be at least 1".into()).into());
                    }
                    DetectorModel::circuit_level(&layout, rounds, p)?
                }
            };
            print_line(&serde_json::to_value(model.graph(basis.into()))?)
        }
        Command::Simulate(args) => {
            let stats = harness::run(&args.common.config(args.distance, args.p))?;
            print_line(&serde_json::to_value(stats)?)
        }
        Command::Sweep { run, output } => {
            let base = run.common.config(run.distances[0], run.ps[0]);
            let stats = harness::sweep(&run.distances, &run.ps, &base)?;
            match output {
                Some(path) => harness::write_csv(&stats, File::create(path)?)?,
                None => harness::write_csv(&stats, io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Analytic { n, distance, p } => {
            let mut doc = serde_json::Map::new();
            if n.is_none() && distance.is_none() {
                return Err(Error::InvalidConfig("analytic needs --n or --distance with --p".into()).into());
            }
            if let Some(n) = n {
                let ratio = min_weight_ratio(n)?;
                doc.insert("n".into(), json!(n));
                doc.insert("ratio".into(), json!(ratio.to_string()));
                doc.insert("ratio_f64".into(), json!(ratio.to_f64()));
            }
            if let Some(d) = distance {
                let p = p.ok_or_else(|| Error::InvalidConfig("--distance needs --p".into()))?;
                let basic = pl_basic(d, p)?;
                let ideal = pl_ideal(d, p)?;
                doc.insert("distance".into(), json!(d));
                doc.insert("p".into(), json!(p));
                doc.insert("pl_basic".into(), json!(basic));
                doc.insert("pl_ideal".into(), json!(ideal));
                doc.insert("ratio_basic_ideal".into(), json!(basic / ideal));
            }
            print_line(&serde_json::Value::Object(doc))
        }
        Command::Census { n, k } => print_line(&serde_json::to_value(census_no_odd_y_chain(n, k)?)?),
        Command::Paths => {
            let counts = count_example_paths()?;
            let crossover = counts.crossover();
            let mut value = serde_json::to_value(&counts)?;
            value["crossover"] = json!(crossover.to_string());
            value["crossover_f64"] = json!(crossover.to_f64());
            print_line(&value)
        }
    }
}

/// Configuration mistakes exit with 2, like clap's own parse errors.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidConfig(_) | Error::InvalidArgument(_) | Error::InvalidDistance(_) | Error::OddDistance { .. },
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
