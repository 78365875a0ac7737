use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clauseroute::dirkey::Mode;
use clauseroute::prior::DEFAULT_GRID;

#[derive(Debug, Parser)]
#[command(name = "clauseroute", version, about = "Constraint-based routing over a pool of LLM endpoints")]
pub struct Cli {
    /// Zoo CSV. Defaults to the bundled 25-endpoint table.
    #[arg(long, global = true)]
    pub zoo: Option<PathBuf>,
    /// Direction-key compiler config (TOML). Defaults to the bundled one.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run direction keys against an agent and append the runs to a store.
    RunBatch(RunBatchArgs),
    /// Write outcome, coverage, frequency, set-size, percentile and prior tables.
    Report(ReportArgs),
    /// Fit the sparse no-feedback prior on Case S runs and write its report.
    FitPrior(FitArgs),
    /// Run only the permutation test and print its summary.
    Permtest(FitArgs),
    /// Compile one key and solve the selection problem.
    Solve(SolveArgs),
    /// Interactive session: set the current endpoint, type direction keys.
    Repl(ReplArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Shortlist,
    Completeness,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Shortlist => Mode::Shortlist,
            ModeArg::Completeness => Mode::Completeness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AgentKind {
    /// Exact solver output.
    Oracle,
    /// Samples from a logistic prior over the predicate library.
    Prior,
    /// Oracle output with random bit flips.
    Noisy,
    /// A chat-completion endpoint over HTTP.
    Live,
}

#[derive(Debug, Clone, Args)]
pub struct AgentArgs {
    #[arg(long, value_enum, default_value = "oracle")]
    pub agent: AgentKind,
    /// Prior parameters: `intercept <b>` and `<predicate> <w>` lines.
    /// A fit-prior report is accepted as is.
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// Flip probability for the noisy agent.
    #[arg(long, default_value_t = 0.1)]
    pub flip: f64,
    /// Endpoint config (TOML) for the live agent.
    #[arg(long)]
    pub endpoint: Option<PathBuf>,
    /// Prompt template overriding the bundled one.
    #[arg(long)]
    pub template: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "shortlist")]
    pub mode: ModeArg,
}

#[derive(Debug, Clone, Args)]
pub struct RunBatchArgs {
    /// One key per line, optionally `key<TAB>count<TAB>current`.
    #[arg(long)]
    pub keys: PathBuf,
    /// Runs per key when the line gives no count.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Run store to append to; completed run ids are skipped.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Current endpoint (id, name or model id) for lines that name none.
    #[arg(long)]
    pub current: Option<String>,
    /// Free-form prompt; the key is added as its DIRECTION line.
    #[arg(long, default_value = "")]
    pub prompt: String,
    /// Provenance tag stored with every run.
    #[arg(long)]
    pub tag: Option<String>,
    /// Fixed timestamp (Unix seconds) instead of the clock.
    #[arg(long)]
    pub timestamp: Option<u64>,
    #[command(flatten)]
    pub agent: AgentArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PriorArgs {
    /// Regularization grid, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_GRID.to_vec())]
    pub grid: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// k of the top-k recovery.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use Case S runs of every key, not only no-feedback keys.
    #[arg(long)]
    pub all_keys: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Permutations for the prior report; 0 skips the test.
    #[arg(long, default_value_t = 0)]
    pub n_perm: usize,
    #[command(flatten)]
    pub prior: PriorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub store: PathBuf,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Permutations; 0 skips the test (fit-prior only).
    #[arg(long, default_value_t = 199)]
    pub n_perm: usize,
    #[command(flatten)]
    pub prior: PriorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Direction key.
    #[arg(long, required_unless_present = "from_dump")]
    pub key: Option<String>,
    #[arg(long)]
    pub current: Option<String>,
    #[arg(long, value_enum, default_value = "shortlist")]
    pub mode: ModeArg,
    /// Also solve exhaustively and compare objectives.
    #[arg(long)]
    pub oracle: bool,
    /// Print every clause literal per endpoint.
    #[arg(long)]
    pub explain: bool,
    /// Write the instance in dump format.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Solve a dumped instance instead of compiling a key.
    #[arg(long, conflicts_with_all = ["key", "current", "dump", "explain"])]
    pub from_dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplArgs {
    /// Ask an agent after every key; solver-only when omitted.
    #[arg(long)]
    pub with_agent: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub agent: AgentArgs,
}
