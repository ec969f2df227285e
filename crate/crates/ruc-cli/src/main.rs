use std::path::PathBuf;
use std::process::exit;

use clap::{Args, Parser, Subcommand};

use ruc_cli::config::{load_config, RawConfig};
use ruc_cli::runner::run;

#[derive(Parser)]
#[command(
    name = "ruc",
    about = "Random unitary channels: sampling, sphere nets, and randomizing-property certification",
    version
)]
struct Cli {
    /// Master seed; echoed into every output record.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: $RUC_OUT_DIR or ./ruc-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = auto). Never affects output bytes.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Config file with flat `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// Flags mirror config keys one-to-one; each experiment reads the subset it
/// needs and validates before running.
#[derive(Args, Default)]
struct ExperimentFlags {
    /// Channel input dimension (also the net/sphere dimension).
    #[arg(long)]
    d_a: Option<usize>,
    /// Output-side dimension for reduced-state experiments.
    #[arg(long)]
    d_b: Option<usize>,
    /// Environment dimension / number of channel unitaries.
    #[arg(long)]
    d_e: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Covering-net radius.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    /// Projector rank.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    subspace_dim: Option<usize>,
    /// Net kind: measure | covering.
    #[arg(long)]
    net_kind: Option<String>,
    #[arg(long)]
    net_constant_c: Option<f64>,
    #[arg(long)]
    adversarial_restarts: Option<usize>,
    /// Channel source: haar | pauli | single.
    #[arg(long)]
    channel: Option<String>,
    /// Load the channel from a file instead of sampling.
    #[arg(long)]
    channel_file: Option<String>,
    /// Load the net from a file instead of building.
    #[arg(long)]
    net_file: Option<String>,
    /// Comma-separated channel dimensions for the scaling scan.
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    success_target: Option<f64>,
    #[arg(long)]
    seeds_per_point: Option<u64>,
    #[arg(long)]
    max_d_e: Option<usize>,
    /// Bernoulli trial count for the binomial floor check.
    #[arg(long)]
    t: Option<u64>,
    /// Point-configuration size for the shatter search.
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a channel's randomizing deficits over a net.
    Certify(ExperimentFlags),
    /// Build a measure or covering net and write it to a file.
    NetBuild(ExperimentFlags),
    /// Verify a stored net against sampled caps of a given measure.
    NetVerify(ExperimentFlags),
    /// Large-deviation tail of the averaged projector statistic.
    Lde(ExperimentFlags),
    /// Reduced-state expectation tail over random bipartite states.
    Cramer(ExperimentFlags),
    /// End-to-end supremum-deficit concentration with adversarial search.
    Concentration(ExperimentFlags),
    /// Reduced-entropy statistics of random subspace states.
    Entanglement(ExperimentFlags),
    /// Minimal certified environment size per channel dimension.
    Scaling(ExperimentFlags),
    /// Exact binomial floor check, single point or full grid.
    Chernoff(ExperimentFlags),
    /// Randomized probe of the cap VC dimension.
    ShatterSearch(ExperimentFlags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Certify(_) => "certify",
            Command::NetBuild(_) => "net-build",
            Command::NetVerify(_) => "net-verify",
            Command::Lde(_) => "lde",
            Command::Cramer(_) => "cramer",
            Command::Concentration(_) => "concentration",
            Command::Entanglement(_) => "entanglement",
            Command::Scaling(_) => "scaling",
            Command::Chernoff(_) => "chernoff",
            Command::ShatterSearch(_) => "shatter-search",
        }
    }

    fn flags(self) -> ExperimentFlags {
        match self {
            Command::Certify(f)
            | Command::NetBuild(f)
            | Command::NetVerify(f)
            | Command::Lde(f)
            | Command::Cramer(f)
            | Command::Concentration(f)
            | Command::Entanglement(f)
            | Command::Scaling(f)
            | Command::Chernoff(f)
            | Command::ShatterSearch(f) => f,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let experiment = cli.command.name().to_string();
    let f = cli.command.flags();
    let overlay = RawConfig {
        experiment: Some(experiment),
        seed: cli.seed,
        out: cli.out.map(|p| p.display().to_string()),
        workers: cli.workers,
        d_a: f.d_a,
        d_b: f.d_b,
        d_e: f.d_e,
        epsilon: f.epsilon,
        delta: f.delta,
        trials: f.trials,
        samples: f.samples,
        p: f.p,
        subspace_dim: f.subspace_dim,
        net_kind: f.net_kind,
        net_constant_c: f.net_constant_c,
        adversarial_restarts: f.adversarial_restarts,
        channel: f.channel,
        channel_file: f.channel_file,
        net_file: f.net_file,
        dims: f.dims,
        success_target: f.success_target,
        seeds_per_point: f.seeds_per_point,
        max_d_e: f.max_d_e,
        t: f.t,
        m: f.m,
    };
    match load_config(cli.config.as_deref(), overlay) {
        Ok(config) => exit(run(&config)),
        Err(e) => {
            eprintln!("config error: {e}");
            exit(2);
        }
    }
}
