use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod bundle;
mod commands;
mod output;

use commands::Failure;

/// Distributed control-estimation synthesis for networked multi-agent systems.
#[derive(Parser, Debug)]
#[command(name = "distctl", version)]
struct Cli {
    /// Worker threads for the parallel parts (defaults to all cores).
    #[arg(long, env = "DISTCTL_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML problem description.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides `[synthesis] seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replace the configured topology: complete, isolated, path, ring,
    /// links:K or edges:1-2,2-3.
    #[arg(long)]
    pub topology_override: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the co-design loop and write the selected law, gains and history.
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-loop Monte Carlo of a synthesized bundle.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        /// Defaults to `<out>/bundle`.
        #[arg(long)]
        bundle: Option<PathBuf>,
        /// Defaults to `[synthesis] mc_runs`.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        runs: Option<u64>,
    },
    /// One closed-loop trajectory of a synthesized bundle.
    Rollout {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bundle: Option<PathBuf>,
    },
    /// Proposed law against the fully connected and topology-restricted baselines.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        runs: Option<u64>,
    },
    /// Synthesize over graphs with increasing link counts.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated link counts; defaults to ring through complete.
        #[arg(long, value_delimiter = ',')]
        links: Option<Vec<usize>>,
    },
    /// Affine-map and Lyapunov-decrement checks under a static gain.
    Stability {
        #[command(flatten)]
        common: Common,
        /// Diagonal gain `u_i = −k ⁱx̂_i`.
        #[arg(long, conflicts_with = "bundle")]
        gain: Option<f64>,
        /// Use the time-0 block of a bundle's law as the static gain.
        #[arg(long)]
        bundle: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Verify the artifacts listed in the manifests of an output directory.
    Report {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("cannot size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Synth { common } => commands::synth(&common),
        Command::Montecarlo { common, bundle, runs } => commands::montecarlo(&common, bundle, runs),
        Command::Rollout { common, bundle } => commands::rollout(&common, bundle),
        Command::Compare { common, runs } => commands::compare(&common, runs),
        Command::Sweep { common, links } => commands::sweep(&common, links),
        Command::Stability { common, gain, bundle, steps } => commands::stability(&common, gain, bundle, steps),
        Command::Report { out } => commands::report(&out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let failure = Failure::classify(&e);
            eprintln!("error: {e:#}");
            ExitCode::from(failure.code())
        }
    }
}
