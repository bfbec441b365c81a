use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dpm_cli::{Format, RunConfig, Scope};
use dpm_core::predict::{FeatureKind, TreeParams};
use dpm_core::spm::MiningParams;

#[derive(Parser)]
#[command(
    name = "dpm",
    version,
    about = "Dialogue-act pattern mining over learner–chatbot transcripts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse transcripts, build sessions and write the session store
    Ingest(Common),
    /// Turns per session and words per turn, per group
    Stats(Common),
    /// Check act codes against the coding scheme
    Validate(Common),
    /// Mine frequent gap-constrained patterns (per group or pooled)
    Mine(Common),
    /// Patterns unique to each of two groups, and shared ones
    Contrast(Common),
    /// Train a decision tree on pattern features, with leave-one-out accuracy
    Train(Common),
    /// Combined Markdown summary
    Report(Common),
    /// Every stage in order
    Run(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    PerGroup,
    Pooled,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeatureArg {
    Presence,
    Frequency,
}

#[derive(Args)]
struct Common {
    /// JSONL transcript file
    #[arg(long)]
    transcripts: Option<PathBuf>,
    /// Session store written by `ingest` (used instead of --transcripts)
    #[arg(long)]
    sessions: Option<PathBuf>,
    /// `session_id<TAB>group_label` file
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Coding scheme (TOML); the built-in scheme when omitted
    #[arg(long)]
    scheme: Option<PathBuf>,
    /// Pattern file for `train` (pattern set or contrast JSON)
    #[arg(long)]
    patterns: Option<PathBuf>,
    /// Sessions split where consecutive turns are this many minutes apart or more
    #[arg(long, default_value_t = 15.0)]
    gap_minutes: f64,
    /// Recompute sessions even when the transcript carries session ids
    #[arg(long)]
    resessionize: bool,
    /// Relative minimum support in (0, 1]
    #[arg(long, default_value_t = 0.5)]
    minsup: f64,
    /// Maximum position gap between matched symbols, or `none`
    #[arg(long, default_value = "1")]
    maxgap: String,
    #[arg(long, default_value_t = 2)]
    minlen: usize,
    /// Maximum pattern length, or `none`
    #[arg(long, default_value = "none")]
    maxlen: String,
    #[arg(long, value_enum, default_value = "per-group")]
    scope: ScopeArg,
    /// Groups to contrast, as `A,B`
    #[arg(long)]
    groups: Option<String>,
    #[arg(long, default_value_t = 3)]
    max_depth: usize,
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,
    #[arg(long, value_enum, default_value = "frequency")]
    feature: FeatureArg,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated output formats: json, tsv, md
    #[arg(long, default_value = "json", value_delimiter = ',')]
    format: Vec<String>,
    /// Rows per section in Markdown output
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    /// Disable internal parallelism
    #[arg(long)]
    serial: bool,
}

fn bound(s: &str, flag: &str) -> Result<Option<usize>> {
    match s {
        "none" | "inf" | "unbounded" => Ok(None),
        n => n
            .parse()
            .map(Some)
            .map_err(|_| anyhow!("--{flag}: expected a positive integer or `none`, got `{n}`")),
    }
}

impl Common {
    fn into_config(self) -> Result<RunConfig> {
        let formats = self
            .format
            .iter()
            .map(|f| Format::parse(f).ok_or_else(|| anyhow!("--format: unknown format `{f}`")))
            .collect::<Result<Vec<_>>>()?;
        let groups = match self.groups {
            None => None,
            Some(g) => match g.split_once(',') {
                Some((a, b)) if !a.is_empty() && !b.is_empty() && a != b => Some((a.to_string(), b.to_string())),
                _ => bail!("--groups: expected two distinct labels as `A,B`"),
            },
        };
        if self.gap_minutes.is_nan() || self.gap_minutes <= 0.0 {
            bail!("--gap-minutes must be positive");
        }
        let params = MiningParams {
            min_support: self.minsup,
            max_gap: bound(&self.maxgap, "maxgap")?,
            min_len: self.minlen,
            max_len: bound(&self.maxlen, "maxlen")?,
        };
        params.validate()?;
        Ok(RunConfig {
            transcripts: self.transcripts,
            sessions: self.sessions,
            labels: self.labels,
            scheme: self.scheme,
            patterns: self.patterns,
            gap_minutes: self.gap_minutes,
            resessionize: self.resessionize,
            params,
            scope: match self.scope {
                ScopeArg::PerGroup => Scope::PerGroup,
                ScopeArg::Pooled => Scope::Pooled,
            },
            groups,
            tree: TreeParams {
                max_depth: self.max_depth,
                min_leaf_size: self.min_leaf,
                feature: match self.feature {
                    FeatureArg::Presence => FeatureKind::Presence,
                    FeatureArg::Frequency => FeatureKind::Frequency,
                },
            },
            out: self.out,
            formats,
            top_k: self.top_k,
            parallel: !self.serial,
        })
    }
}

type Handler = fn(&RunConfig) -> Result<Vec<PathBuf>>;

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let (cmd, common): (Handler, Common) = match cli.command {
        Command::Ingest(c) => (dpm_cli::cmd_ingest, c),
        Command::Stats(c) => (dpm_cli::cmd_stats, c),
        Command::Validate(c) => (dpm_cli::cmd_validate, c),
        Command::Mine(c) => (dpm_cli::cmd_mine, c),
        Command::Contrast(c) => (dpm_cli::cmd_contrast, c),
        Command::Train(c) => (dpm_cli::cmd_train, c),
        Command::Report(c) => (dpm_cli::cmd_report, c),
        Command::Run(c) => (dpm_cli::cmd_run, c),
    };
    let config = common.into_config()?;
    cmd(&config)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(written) => {
            for p in written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
