use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use segrnn_cli::{
    evaluate_checkpoint, exit_code, gradcheck_suite, run_ablation_with, run_experiment_with,
    time_inference, Axis, SpecLayer,
};
use segrnn_core::model::count_parameters_for;
use segrnn_core::{CellKind, DecodeMode, ModelConfig, Rng, SegRnnParams};

#[derive(Parser)]
#[command(
    name = "segrnn",
    version,
    about = "Train, evaluate and ablate segment-recurrent forecasters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and test one configuration over one or more seeds.
    Train(ExperimentArgs),
    /// Test-split metrics of a saved checkpoint.
    Evaluate {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Sweep one configuration axis with shared seeds.
    Ablate {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// seg_len, decode_mode, lookback, cell or pe.
        #[arg(long)]
        axis: Axis,
        /// Comma-separated values; defaults depend on the axis.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
    /// Finite-difference check of the analytic gradients on random small models.
    Gradcheck {
        #[arg(long, default_value_t = 20)]
        configs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Number of learnable parameters of a configuration.
    ParamsCount(ExperimentArgs),
    /// Mean inference wall time of a randomly initialized model.
    Time {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 256)]
        batch: usize,
    },
}

#[derive(Args, Clone, Default)]
struct ExperimentArgs {
    /// TOML file with experiment fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    lookback: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    seg_len: Option<usize>,
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long)]
    cell: Option<CellKind>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    decode_mode: Option<DecodeMode>,
    #[arg(long)]
    relative_pe: Option<bool>,
    #[arg(long)]
    channel_pe: Option<bool>,
    /// Channel count, read from the dataset when omitted.
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// TOML dataset registry replacing the built-in one.
    #[arg(long)]
    registry: Option<PathBuf>,
    #[arg(long)]
    max_rows: Option<usize>,
    #[arg(long)]
    timing_repeats: Option<usize>,
}

impl ExperimentArgs {
    fn layer(&self) -> Result<SpecLayer> {
        let flags = SpecLayer {
            dataset: self.dataset.clone(),
            lookback: self.lookback,
            horizon: self.horizon,
            seg_len: self.seg_len,
            hidden_dim: self.hidden_dim,
            cell: self.cell,
            dropout: self.dropout,
            decode_mode: self.decode_mode,
            relative_pe: self.relative_pe,
            channel_pe: self.channel_pe,
            num_channels: self.channels,
            epochs: self.epochs,
            patience: self.patience,
            batch_size: self.batch_size,
            lr: self.lr,
            seed: self.seed,
            repeats: self.repeats,
            out: self.out.clone(),
            data_dir: self.data_dir.clone(),
            registry: self.registry.clone(),
            max_rows: self.max_rows,
            timing_repeats: self.timing_repeats,
            ..SpecLayer::default()
        };
        Ok(match &self.config {
            Some(path) => SpecLayer::from_toml_file(path)?.overlay(flags),
            None => flags,
        })
    }

    fn spec(&self) -> Result<segrnn_cli::ExperimentSpec> {
        Ok(self.layer()?.resolve_from_data()?)
    }

    /// Model configuration without touching any data; seven channels unless given.
    fn model(&self) -> Result<ModelConfig> {
        let cfg = self.layer()?.model_config(Some(7))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let spec = args.spec()?;
            let report = run_experiment_with(&spec, |seed, e| {
                eprintln!(
                    "seed {seed} epoch {:>3}  train {:.5}  val {:.5}  lr {:.2e}  {:.1}s",
                    e.epoch, e.train_loss, e.val_loss, e.lr, e.seconds
                );
            })?;
            print_json(&report.aggregate)?;
            eprintln!(
                "report written to {}",
                spec.out.join("report.json").display()
            );
        }
        Command::Evaluate { exp, checkpoint } => {
            let spec = exp.spec()?;
            let (_, metrics) = evaluate_checkpoint(&spec, &checkpoint)?;
            print_json(&metrics)?;
        }
        Command::Ablate { exp, axis, values } => {
            let spec = exp.spec()?;
            let values = if values.is_empty() {
                axis.default_values()
            } else {
                values
            };
            let sweep = run_ablation_with(&spec, axis, &values, |v, seed, e| {
                eprintln!(
                    "{axis}={v} seed {seed} epoch {:>3}  val {:.5}",
                    e.epoch, e.val_loss
                );
            })?;
            for p in &sweep.points {
                let a = &p.report.aggregate;
                println!(
                    "{axis}={:<8} mse {:.4} ± {:.4}  mae {:.4} ± {:.4}  infer {:.4}s",
                    p.value, a.mse.mean, a.mse.std, a.mae.mean, a.mae.std, a.inference_seconds.mean
                );
            }
        }
        Command::Gradcheck {
            configs,
            seed,
            eps,
            tolerance,
        } => {
            let cases = gradcheck_suite(configs, seed, eps)?;
            let mut worst: f64 = 0.0;
            for c in &cases {
                let m = &c.config;
                println!(
                    "L={:<2} H={} w={} d={} C={} {} {}  max rel err {:.3e}  ({} entries, {} at kinks)",
                    m.lookback, m.horizon, m.seg_len, m.hidden_dim, m.num_channels, m.cell,
                    m.decode_mode, c.max_relative_error, c.checked, c.kinks
                );
                worst = worst.max(c.max_relative_error);
            }
            println!("worst {worst:.3e} (tolerance {tolerance:.0e})");
            if worst > tolerance {
                bail!("gradient check exceeded tolerance");
            }
        }
        Command::ParamsCount(args) => {
            let cfg = args.model().context("resolving the model configuration")?;
            println!("{}", count_parameters_for(&cfg));
        }
        Command::Time { exp, batch } => {
            let cfg = exp.model()?;
            let repeats = exp.timing_repeats.unwrap_or(10);
            let params = SegRnnParams::init(&cfg, &mut Rng::new(exp.seed.unwrap_or(0)))?;
            print_json(&time_inference(&params, &cfg, batch, repeats)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
