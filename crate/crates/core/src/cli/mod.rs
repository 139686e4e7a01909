//! Command-line entry points and the file formats they read and write.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime
//! failure. Every output file is written atomically.

mod commands;
pub mod config;
pub mod dataset;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{DomainReport, EvalReport, SignificanceLine};
pub use config::RunConfigFile;

use crate::training::Algorithm;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "zsparse", version, about = "Zero-shot semantic parser for application instructions")]
pub struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by the experiment commands. Flags override the config.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset file; overrides `dataset` in the config.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub target_domain: Option<String>,
    #[arg(long)]
    pub algorithm: Option<Algorithm>,
    #[arg(long)]
    pub no_new_features: bool,
    #[arg(long)]
    pub no_logic_filter: bool,
    /// Train and test on the target domain's own splits.
    #[arg(long)]
    pub in_domain: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample (initial, desired) state pairs; utterances are left empty.
    Generate {
        #[arg(long)]
        domain: String,
        /// Pairs per interface method.
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Config whose `generation` table overrides the domain's ranges.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train on every non-target domain (or the target, with --in-domain).
    Train {
        #[command(flatten)]
        common: Common,
        /// Hyper-parameters written by `tune`.
        #[arg(long)]
        train_config: Option<PathBuf>,
    },
    /// Grid search; writes the selected hyper-parameters.
    Tune {
        #[command(flatten)]
        common: Common,
    },
    /// Tune, train and test, or test a saved model with --model.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        /// All eight ablations on every domain, in the ablation-table layout.
        #[arg(long)]
        table: bool,
    },
    /// Print the n-best derivations for one utterance and state.
    Parse {
        #[arg(long)]
        domain: String,
        /// State in the dataset's state shape (`entities`, `triples`).
        #[arg(long)]
        state: PathBuf,
        /// Trained model file.
        #[arg(long, conflicts_with = "weights")]
        model: Option<PathBuf>,
        /// JSON object of feature weights.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        n_best: usize,
        /// Show each candidate's contributing features.
        #[arg(long)]
        explain: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        no_new_features: bool,
        #[arg(long)]
        no_logic_filter: bool,
        utterance: String,
    },
    /// Paired bootstrap between two evaluation reports.
    Significance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Generate {
            domain,
            count,
            seed,
            out: path,
            config,
        } => commands::generate(&domain, count, seed, &path, config.as_deref(), out),
        Command::Train { common, train_config } => commands::train(&common, train_config.as_deref(), out),
        Command::Tune { common } => commands::tune(&common, out),
        Command::Eval { common, model, table } => commands::eval(&common, model.as_deref(), table, out),
        Command::Parse {
            domain,
            state,
            model,
            weights,
            n_best,
            explain,
            config,
            no_new_features,
            no_logic_filter,
            utterance,
        } => commands::parse(
            &commands::ParseRequest {
                domain,
                state,
                model,
                weights,
                n_best,
                explain,
                config,
                no_new_features,
                no_logic_filter,
                utterance,
            },
            out,
        ),
        Command::Significance {
            a,
            b,
            config,
            seed,
            out: path,
        } => commands::significance(&a, &b, config.as_deref(), seed, path.as_deref(), out),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("zsparse: {e}");
            e.exit_code()
        }
    }
}
