use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_scb::montecarlo::{SweepSpec, SweepVar};
use ris_scb::{CancellationMode, RisScenario, ScenarioConfig};
use ris_scb_cli::validate::ValidateOptions;
use ris_scb_cli::{analytic, emit, engine_options, feasibility, load_or_default, simulate, table2, validate};
use ris_scb_cli::{CliError, Overrides, RisMode};

/// Link-level simulator for RIS-assisted MIMO-NOMA downlinks with
/// signal-cancellation passive beamforming.
#[derive(Parser)]
#[command(name = "ris-scb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal RIS size per user and the binding constraint.
    Feasibility(Common),
    /// Minimal RIS sizes for the reference exponent triples.
    Table2 {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the table without comparing it to the stored reference.
        #[arg(long)]
        no_golden: bool,
    },
    /// Monte Carlo estimates as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write one realization (matrix, target, coefficients, residues) as CSV.
        #[arg(long, value_name = "INDEX", requires = "dump_out")]
        dump_trial: Option<u64>,
        #[arg(long, value_name = "PATH")]
        dump_out: Option<PathBuf>,
    },
    /// Closed-form outage and rate curves as CSV.
    Analytic(Common),
    /// Compare simulation with the closed forms; exits 6 on any failed check.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Negative control: drop the direct-link gain from the closed forms.
        #[arg(long)]
        omit_lb: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file; defaults to the two-antenna reference scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// VAR=START:STOP:STEP or VAR=v1,v2,...
    #[arg(long)]
    sweep: Option<String>,
    /// Comma-separated metric names.
    #[arg(long)]
    metrics: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// `ideal` or `bits=B`.
    #[arg(long)]
    mode: Option<RisMode>,
    #[arg(long, value_enum)]
    cancellation: Option<CancellationArg>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CancellationArg {
    Aggregate,
    PerSymbol,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Diffuse,
    Anomalous,
}

impl Common {
    fn config(&self) -> Result<ScenarioConfig, CliError> {
        let overrides = Overrides {
            seed: self.seed,
            trials: self.trials,
            mode: self.mode,
            cancellation: self.cancellation.map(|c| match c {
                CancellationArg::Aggregate => CancellationMode::Aggregate,
                CancellationArg::PerSymbol => CancellationMode::PerSymbol,
            }),
            scenario: self.scenario.map(|s| match s {
                ScenarioArg::Diffuse => RisScenario::Diffuse,
                ScenarioArg::Anomalous => RisScenario::Anomalous,
            }),
        };
        overrides.apply(load_or_default(self.config.as_deref())?)
    }

    fn sweep(&self, cfg: &ScenarioConfig) -> Result<SweepSpec, CliError> {
        match &self.sweep {
            Some(s) => Ok(s.parse()?),
            None => Ok(SweepSpec::single(SweepVar::TxPowerDbm, cfg)),
        }
    }
}

/// Output text plus the error that decides the exit code, if any.
type Outcome = Result<String, (String, CliError)>;

fn execute(cli: Cli) -> Result<(Outcome, Option<PathBuf>), CliError> {
    Ok(match cli.command {
        Command::Feasibility(c) => (Ok(feasibility::run(&c.config()?)), c.out),
        Command::Table2 { out, no_golden } => (Ok(table2::run(!no_golden)?), out),
        Command::Simulate {
            common,
            dump_trial,
            dump_out,
        } => {
            let cfg = common.config()?;
            if let (Some(index), Some(path)) = (dump_trial, &dump_out) {
                emit(&simulate::dump_trial(&cfg, index)?, Some(path))?;
            }
            let metrics = simulate::parse_metrics(common.metrics.as_deref())?;
            let spec = common.sweep(&cfg)?;
            let out = simulate::run(
                &cfg,
                &spec,
                &metrics,
                &engine_options(common.threads),
                &mut io::stderr(),
            )?;
            (out.into_result(), common.out)
        }
        Command::Analytic(c) => {
            let cfg = c.config()?;
            let metrics = analytic::parse_metrics(c.metrics.as_deref())?;
            (analytic::run(&cfg, &c.sweep(&cfg)?, &metrics)?.into_result(), c.out)
        }
        Command::Validate { common, omit_lb } => {
            let cfg = common.config()?;
            let rep = validate::run(&cfg, &engine_options(common.threads), ValidateOptions { omit_lb })?;
            (rep.into_result(), common.out)
        }
    })
}

fn main() -> ExitCode {
    let result = execute(Cli::parse()).and_then(|(outcome, out)| {
        let (text, err) = match outcome {
            Ok(text) => (text, None),
            Err((text, e)) => (text, Some(e)),
        };
        if let Some(text) = emit(&text, out.as_deref())? {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io {
                    path: "<stdout>".into(),
                    source: e,
                })?;
        }
        err.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
