use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use texcollect_cli::commands::{cmd_classify, cmd_crop, cmd_curate, cmd_extract, cmd_fisher};
use texcollect_cli::{Outcome, Overrides, RunConfig};
use texcollect_core::Metric;

#[derive(Parser, Debug)]
#[command(
    name = "texcollect",
    version,
    about = "Texture features, dataset curation and KNN evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Intensity levels images are quantized to.
    #[arg(long, global = true)]
    levels: Option<u32>,
    /// Levels used by the gray-tone difference matrix.
    #[arg(long, global = true)]
    gtdm_levels: Option<u32>,
    /// GTDM window half-size.
    #[arg(long = "gtdm-k", global = true)]
    gtdm_k: Option<usize>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// LBP ring radius in pixels.
    #[arg(long, global = true)]
    lbp_radius: Option<usize>,
    /// Crop window side in pixels.
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long, global = true)]
    stride: Option<usize>,
    /// Number of candidates to select.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Neighbor counts, e.g. `--k 1,3,5`.
    #[arg(long, global = true, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long = "train-frac", global = true)]
    train_frac: Option<f64>,
    #[arg(long, global = true, value_parser = parse_metric)]
    metric: Option<Metric>,
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: texcollect_core::Error| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cut every image in a directory into overlapping square windows.
    Crop {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the 18-dimensional descriptor of every image to a CSV table.
    Extract {
        input: PathBuf,
        #[arg(long, default_value = "features.csv")]
        out: PathBuf,
        /// Take each image's class from its first sub-directory and add a `label` column.
        #[arg(long)]
        labeled: bool,
    },
    /// Select N maximally diverse rows of a feature table.
    Curate {
        features: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the Fisher spread of a feature table.
    Fisher {
        features: PathBuf,
        /// Min-max normalize the rows with the table's own bounds first.
        #[arg(long)]
        normalize: bool,
    },
    /// Repeated stratified KNN evaluation of a labeled feature table.
    Classify {
        features: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            levels: self.levels,
            gtdm_levels: self.gtdm_levels,
            gtdm_k: self.gtdm_k,
            eps: self.eps,
            lbp_radius: self.lbp_radius,
            window: self.window,
            stride: self.stride,
            n: self.n,
            seed: self.seed,
            max_iter: self.max_iter,
            k: self.k.clone(),
            trials: self.trials,
            train_fraction: self.train_frac,
            metric: self.metric,
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let cfg = RunConfig::resolve(cli.config.as_deref(), &cli.flags.overrides())?;
    match cli.command {
        Command::Crop { input, out } => cmd_crop(&input, &out, &cfg),
        Command::Extract {
            input,
            out,
            labeled,
        } => cmd_extract(&input, &out, &cfg, labeled),
        Command::Curate { features, out } => cmd_curate(&features, &cfg, out.as_deref()),
        Command::Fisher {
            features,
            normalize,
        } => cmd_fisher(&features, normalize),
        Command::Classify { features, out } => cmd_classify(&features, &cfg, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.failures {
                eprintln!("error: {f}");
            }
            if outcome.success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
