use std::path::PathBuf;

use cancelput_core::McMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::parse_mode;

#[derive(Debug, Parser)]
#[command(
    name = "cancelput",
    version,
    about = "Perpetual American puts cancelled at the last passage above a barrier"
)]
pub struct Cli {
    /// Worker threads for Monte Carlo (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price the contract at the spot.
    Price {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Optimal exercise threshold and the scale-function data behind it.
    Threshold {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Write payoff and value on a uniform spot grid to CSV.
    Curve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        smin: f64,
        #[arg(long)]
        smax: f64,
        #[arg(long, default_value_t = 261)]
        points: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the analytic and/or Monte Carlo check suites.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, value_enum, default_value_t = Suite::Analytic)]
        suite: Suite,
    },
    /// Monte Carlo estimate of the value of a threshold rule.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        /// Stopping threshold (default: the optimal one).
        #[arg(long)]
        threshold: Option<f64>,
        /// Write one `path_index,tau,s_tau,crossing_type` row per path.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Analytic,
    Mc,
    All,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Analytic => "analytic",
            Suite::Mc => "mc",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Volatility; squared into sigma2.
    #[arg(long, conflicts_with = "sigma2")]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub strike: Option<f64>,
    #[arg(long)]
    pub barrier: Option<f64>,
    #[arg(long)]
    pub spot: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, overrides_with = "no_bridge")]
    bridge: bool,
    #[arg(long, overrides_with = "bridge")]
    no_bridge: bool,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<McMode>,
}

impl McArgs {
    pub fn bridge(&self) -> Option<bool> {
        match (self.bridge, self.no_bridge) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        }
    }
}
