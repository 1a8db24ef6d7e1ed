//! `sybiledge` — file-driven front end for the fake-account scoring
//! toolkit: generate synthetic scenarios, estimate per-target rates, score
//! accounts, evaluate detectors, and run experiment sweeps.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 data error.

mod commands;
mod config;
mod iofmt;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// A failure with its exit-code class.
#[derive(Debug)]
pub enum AppError {
    /// Bad flags or config files: exit code 1.
    Usage(String),
    /// Unreadable or invalid data files, or a computation the data cannot
    /// support: exit code 2.
    Data(String),
}

#[derive(Parser)]
#[command(
    name = "sybiledge",
    version,
    about = "Fake-account scoring from friend-request targets and responses",
    propagate_version = true
)]
struct Cli {
    /// Cap the worker-thread count (default: one per CPU).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic friend-request scenario from a config file.
    Generate {
        /// Flat key=value config (n, generator, mean_degree, ...).
        #[arg(long)]
        config: PathBuf,
        /// Overrides the `seed` key from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for edges.tsv, truth.tsv, training.tsv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate per-target selection and accept rates from labeled traffic.
    Train {
        /// Request edges: TSV source, target, response (0/1).
        #[arg(long)]
        edges: PathBuf,
        /// Training labels: TSV node, p_fake; absent node = unknown.
        #[arg(long)]
        labels: PathBuf,
        /// Selection confidence strength: a number, or `inf` to disable
        /// per-class selection signal.
        #[arg(long, default_value = "100000")]
        sigma: String,
        /// Accept confidence strength: a number, or `inf` to disable
        /// per-class response signal.
        #[arg(long, default_value = "1")]
        phi: String,
        /// Per-target selection strengths (TSV node, value); listed nodes
        /// override --sigma.
        #[arg(long)]
        sigma_file: Option<PathBuf>,
        /// Per-target accept strengths (TSV node, value); listed nodes
        /// override --phi.
        #[arg(long)]
        phi_file: Option<PathBuf>,
        /// Clamp keeping estimated rates inside [eps, 1-eps].
        #[arg(long, default_value_t = sybiledge::rates::DEFAULT_CLAMP_EPS)]
        clamp_eps: f64,
        /// Output rate table file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score accounts from their sent requests and a trained rate table.
    Score {
        /// Request edges: TSV source, target, response (0/1).
        #[arg(long)]
        edges: PathBuf,
        /// Rate table from `train`.
        #[arg(long)]
        rates: PathBuf,
        /// Prior fake probability applied to every node.
        #[arg(long)]
        prior: Option<f64>,
        /// Per-node priors (TSV node, p_fake); listed nodes override
        /// --prior.
        #[arg(long)]
        prior_file: Option<PathBuf>,
        /// Evidence to use: full, selection_only, or response_only.
        #[arg(long, default_value = "full")]
        variant: String,
        /// Clamp re-applied to loaded rates at scoring time.
        #[arg(long, default_value_t = sybiledge::rates::DEFAULT_CLAMP_EPS)]
        clamp_eps: f64,
        /// Also write per-request contributions to <out>.explain.tsv.
        #[arg(long)]
        explain: bool,
        /// Output score file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank score files against ground truth: AUC overall and per degree
    /// bucket.
    Eval {
        /// One or more score files (first two columns: node, score).
        #[arg(long, required = true, num_args = 1..)]
        scores: Vec<PathBuf>,
        /// Ground-truth labels: TSV node, p_fake.
        #[arg(long)]
        truth: PathBuf,
        /// Request edges; enables the by-out-degree breakdown.
        #[arg(long)]
        edges: Option<PathBuf>,
        /// `fine`, `coarse`, `none`, or ranges like `0:5,6:10,46:`.
        #[arg(long)]
        buckets: Option<String>,
        /// Output report file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a multi-seed sweep (generator grid or label-noise ladder) from a
    /// config file.
    Experiment {
        /// Flat key=value sweep config (mode=grid|noise, seeds, ...).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for report.json, rows.tsv, summary.tsv.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };

    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("sybiledge: --threads must be at least 1");
            return 1;
        }
        // Only fails if a pool already exists, in which case the default is
        // already running and the cap cannot be applied retroactively.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let result = match &cli.command {
        Command::Generate { config, seed, out } => commands::cmd_generate(config, *seed, out),
        Command::Train {
            edges,
            labels,
            sigma,
            phi,
            sigma_file,
            phi_file,
            clamp_eps,
            out,
        } => commands::cmd_train(
            edges,
            labels,
            sigma,
            phi,
            sigma_file.as_deref(),
            phi_file.as_deref(),
            *clamp_eps,
            out,
        ),
        Command::Score {
            edges,
            rates,
            prior,
            prior_file,
            variant,
            clamp_eps,
            explain,
            out,
        } => commands::cmd_score(
            edges,
            rates,
            *prior,
            prior_file.as_deref(),
            variant,
            *clamp_eps,
            *explain,
            out,
        ),
        Command::Eval {
            scores,
            truth,
            edges,
            buckets,
            out,
        } => commands::cmd_eval(scores, truth, edges.as_deref(), buckets.as_deref(), out),
        Command::Experiment { config, out } => commands::cmd_experiment(config, out),
    };

    match result {
        Ok(()) => 0,
        Err(AppError::Usage(msg)) => {
            eprintln!("sybiledge: {msg}");
            1
        }
        Err(AppError::Data(msg)) => {
            eprintln!("sybiledge: {msg}");
            2
        }
    }
}
