//! `qcap`: capacity estimates, identity checks, additivity experiments and
//! parameter sweeps for quantum channels described in JSON.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qcap_core::capacity::OptimizerConfig;
use qcap_core::parallel::Execution;

use commands::{Family, Which};
use report::Table;

/// Why a run did not succeed; each maps to one exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unreadable or malformed input.
    Usage(String),
    /// A mathematical invariant was violated.
    Invariant(String),
    /// A computed bound did not hold.
    Bound,
}

impl From<qcap_core::Error> for Failure {
    fn from(e: qcap_core::Error) -> Self {
        match e {
            qcap_core::Error::Parse { .. } | qcap_core::Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Invariant(e.to_string()),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invariant(_) => 2,
            Failure::Bound => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qcap", version, about = "Classical capacities of quantum channels")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Seed for every stochastic component.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Optimizer restarts.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Optimizer convergence tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Iteration cap of each local search.
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Number of signal states searched over.
    #[arg(long, global = true)]
    ensemble_cap: Option<usize>,
    /// Number of POVM outcomes searched over.
    #[arg(long, global = true)]
    povm_cap: Option<usize>,
    /// Also write a CSV table to this path.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// JSON indentation; 0 prints one line.
    #[arg(long, global = true, default_value_t = 2)]
    json_indent: usize,
    /// Record wall-clock time in the report (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
    /// Run restarts and sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Corrupt an internal POVM to exercise the error path.
    #[arg(long, global = true, hide = true)]
    inject_fault: bool,
}

impl Common {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn config(&self) -> Result<OptimizerConfig, Failure> {
        let d = OptimizerConfig::default();
        let cfg = OptimizerConfig {
            restarts: self.restarts.unwrap_or(d.restarts),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            tol: self.tol.unwrap_or(d.tol),
            seed: self.seed,
            ensemble_size_cap: self.ensemble_cap.unwrap_or(d.ensemble_size_cap),
            povm_size_cap: self.povm_cap.unwrap_or(d.povm_size_cap),
            execution: self.execution(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Shannon, Holevo and average-input bound estimates for one channel.
    Capacity {
        channel: PathBuf,
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
    },
    /// Chain identities over random two-use instances.
    IdentityCheck {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
    },
    /// Adaptive-measurement additivity on two or three channel uses.
    Additivity {
        /// One file (used for every copy) or one file per use.
        #[arg(required = true)]
        channels: Vec<PathBuf>,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Capacity estimates across a one-parameter channel family.
    Sweep {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
    },
    /// Dimensions and invariant defects of a channel.
    ChannelInfo { channel: PathBuf },
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let cfg = cli.common.config()?;
    let start = Instant::now();
    let (mut report, table) = match &cli.command {
        Command::Capacity { channel, which } => (commands::capacity(channel, *which, &cfg)?, None),
        Command::IdentityCheck { instances } => (
            commands::identity_check(*instances, cfg.execution, cli.common.inject_fault, &cfg)?,
            None,
        ),
        Command::Additivity { channels, depth } => (commands::additivity(channels, *depth, &cfg)?, None),
        Command::Sweep {
            family,
            from,
            to,
            step,
            which,
        } => {
            let (r, t) = commands::sweep(*family, *from, *to, *step, *which, &cfg)?;
            (r, Some(t))
        }
        Command::ChannelInfo { channel } => (commands::channel_info(channel, &cfg)?, None),
    };
    if cli.common.timing {
        report.wall_time = Some(start.elapsed().as_secs_f64());
    }
    if let Some(path) = &cli.common.csv {
        let table = table.unwrap_or_else(|| Table::from_results(&report));
        table
            .write(path)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    println!("{}", report.to_json(cli.common.json_indent));
    Ok(report.all_passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: a bound check failed (see `checks` in the report)");
            ExitCode::from(Failure::Bound.code())
        }
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Invariant(m) => eprintln!("error: invariant violated: {m}"),
                Failure::Bound => {}
            }
            ExitCode::from(f.code())
        }
    }
}
