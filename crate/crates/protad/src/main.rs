use std::{
    path::PathBuf,
    process::ExitCode,
};

use clap::{Args, Parser, Subcommand};
use protad::{
    commands,
    config::PipelineConfig,
    Result,
};
use protad_core::detect::DetectorKind;

/// Proactive time-series anomaly detection: forecast the next step, then
/// threshold the forecast.
#[derive(Parser)]
#[command(name = "protad", version, after_help = concat!(
    "The output directory comes from the config and can be overridden with ",
    "the PROTAD_OUT_DIR environment variable.\n",
    "Exit status: 0 success, 2 config error, 3 data error, 4 numeric failure."
))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Pipeline config (JSON). Defaults apply when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic train/test pair with labeled anomalies.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train the forecaster on the training series.
    Train {
        #[command(flatten)]
        common: Common,
        /// Number of Adam updates (default: five epochs).
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit a threshold detector on the raw training rows.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// gmm, ecod or svdd.
        #[arg(long)]
        detector: Option<DetectorKind>,
        /// GMM component count.
        #[arg(long)]
        components: Option<usize>,
    },
    /// Forecast the test series and flag anomalous forecasts.
    Detect {
        #[command(flatten)]
        common: Common,
        /// Steps before a labeled segment in which a flag counts as early.
        #[arg(long)]
        lookback: Option<usize>,
    },
    /// Score predictions against labels.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Prediction CSV with a `flag` column (default: flags.csv in the output directory).
        #[arg(long)]
        pred: Option<PathBuf>,
        /// Label CSV with a `label` column.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Fourier forecastability analysis of the labeled anomalies.
    Spectral {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        segment_length: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

fn load(common: &Common) -> Result<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    cfg.apply_env();
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { common, seed } => {
            let mut cfg = load(&common)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let (train, test) = commands::synth(&cfg)?;
            println!(
                "wrote {} training and {} test rows to {}",
                train.timesteps(),
                test.timesteps(),
                cfg.output_dir.display()
            );
        }
        Command::Train {
            common,
            iterations,
            seed,
        } => {
            let mut cfg = load(&common)?;
            if iterations.is_some() {
                cfg.train.iterations = iterations;
            }
            if let Some(s) = seed {
                cfg.train.seed = s;
            }
            cfg.validate()?;
            let out = commands::train(&cfg)?;
            match out.loss_trace.last() {
                Some(l) => println!(
                    "trained {} iterations: loss_C {:.6} loss_D {:.6}",
                    out.loss_trace.len(),
                    l.continuous,
                    l.discrete
                ),
                None => println!("wrote the untrained initialization"),
            }
        }
        Command::Calibrate {
            common,
            detector,
            components,
        } => {
            let mut cfg = load(&common)?;
            if let Some(k) = detector {
                cfg.detector.kind = k;
            }
            if let Some(k) = components {
                cfg.detector.gmm.components = k;
            }
            let det = commands::calibrate(&cfg)?;
            println!("{} threshold {}", det.kind(), det.threshold.value);
        }
        Command::Detect { common, lookback } => {
            let mut cfg = load(&common)?;
            if let Some(l) = lookback {
                cfg.metrics.lookback = l;
            }
            let res = commands::detect(&cfg)?;
            println!("flagged {} of {} forecasts", res.flagged(), res.flags.len());
        }
        Command::Eval {
            common,
            pred,
            labels,
        } => {
            let cfg = load(&common)?;
            let m = commands::eval(&cfg, pred.as_deref(), labels.as_deref())?;
            println!(
                "F1-@K {:.4}  F1-Composite {:.4}  F1-Range {:.4}",
                m.f1_at_k, m.f1_composite, m.f1_range
            );
        }
        Command::Spectral {
            common,
            segment_length,
            epsilon,
        } => {
            let mut cfg = load(&common)?;
            if let Some(n) = segment_length {
                cfg.spectral.segment_length = n;
            }
            if let Some(e) = epsilon {
                cfg.spectral.epsilon = e;
            }
            cfg.validate()?;
            let r = commands::spectral(&cfg)?;
            println!(
                "{} of {} anomaly segments outside the training hull ({:.2}%)",
                r.outside,
                r.anomaly_samples,
                100.0 * r.pooled_outside_fraction
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

