use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphdrift::inference::Encoding;
use graphdrift::mi::{Criterion, MixedMode};
use graphdrift::transition::StabilityMode;
use graphdrift_cli::commands::{cmd_drift, cmd_from_forests, cmd_mse_baseline, cmd_simulate};
use graphdrift_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "graphdrift",
    version,
    about = "Structural drift detection with windowed forests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline on the configured input.
    Drift {
        #[command(flatten)]
        common: Common,
        /// Skip loading and MI: start from a forests.json written by `drift`.
        #[arg(long)]
        from_forests: Option<PathBuf>,
    },
    /// Eight-period synthetic study in both stability modes.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// OLS fitted on window 1, MSE per window.
    MseBaseline {
        #[command(flatten)]
        common: Common,
        /// Continuous column to predict (overrides [baseline] target).
        #[arg(long)]
        target: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config, or a report.json to re-run from its provenance block.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    mode: Option<ModeArg>,
    #[arg(long)]
    encoding: Option<EncodingArg>,
    #[arg(long)]
    criterion: Option<CriterionArg>,
    #[arg(long)]
    mixed: Option<MixedArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Cumulative,
    Consecutive,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    Full,
    Canonical,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Aic,
    Bic,
}

#[derive(Clone, Copy, ValueEnum)]
enum MixedArg {
    Homogeneous,
    Heterogeneous,
}

impl Common {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        if let Some(m) = self.mode {
            cfg.stability.mode = match m {
                ModeArg::Cumulative => StabilityMode::Cumulative,
                ModeArg::Consecutive => StabilityMode::Consecutive,
            };
        }
        if let Some(e) = self.encoding {
            cfg.inference.encoding = match e {
                EncodingArg::Full => Encoding::Full,
                EncodingArg::Canonical => Encoding::Canonical,
            };
        }
        if let Some(c) = self.criterion {
            cfg.mi.criterion = match c {
                CriterionArg::Aic => Criterion::Aic,
                CriterionArg::Bic => Criterion::Bic,
            };
        }
        if let Some(m) = self.mixed {
            cfg.mi.mixed = match m {
                MixedArg::Homogeneous => MixedMode::Homogeneous,
                MixedArg::Heterogeneous => MixedMode::Heterogeneous,
            };
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Drift { common, from_forests } => {
            let cfg = common.config()?;
            let report = match from_forests {
                Some(f) => cmd_from_forests(&cfg, &f, &common.out)?,
                None => cmd_drift(&cfg, &common.out)?,
            };
            for d in &report.posterior.diagnostics {
                eprintln!("warning: {d}");
            }
            println!(
                "{} forests, {} stability records -> {}",
                report.forests.len(),
                report.stability.records,
                common.out.display()
            );
        }
        Command::Simulate { common } => {
            let cfg = common.config()?;
            let r = cmd_simulate(&cfg, &common.out)?;
            for (name, rep) in [("cumulative", &r.cumulative), ("consecutive", &r.consecutive)] {
                let fr: Vec<String> = rep
                    .stability
                    .fractions
                    .iter()
                    .map(|f| format!("{:.3}", f.fraction))
                    .collect();
                println!("{name}: {}", fr.join(" "));
            }
        }
        Command::MseBaseline { common, target } => {
            let cfg = common.config()?;
            let r = cmd_mse_baseline(&cfg, target.as_deref(), &common.out)?;
            if r.baseline.fit.ridge {
                eprintln!("warning: singular normal equations, ridge jitter applied");
            }
            match r.spearman {
                Some(rho) => println!("spearman(stability, mse) = {rho:.4}"),
                None => println!("spearman(stability, mse) undefined (constant series)"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
