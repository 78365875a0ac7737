//! Command implementations behind the `clauseroute` binary.
//!
//! Every command writes its human-readable output to a caller-supplied
//! writer so it can be driven from tests.

use std::io::Write;
use std::path::Path;

use clauseroute::dirkey::{Compiler, CompilerConfig};
use clauseroute::zoo::{bundled_zoo, load_zoo, Endpoint, Zoo};

pub mod agent;
pub mod args;
pub mod batch;
pub mod error;
pub mod fit;
pub mod repl;
pub mod report;
pub mod solve;

pub use args::{Cli, Command};
pub use error::CliError;

/// Zoo and compiler shared by all commands.
pub struct Context {
    pub zoo: Zoo,
    pub compiler: Compiler,
}

impl Context {
    pub fn load(zoo: Option<&Path>, config: Option<&Path>) -> Result<Self, CliError> {
        let zoo = match zoo {
            None => bundled_zoo(),
            Some(path) => {
                let file = std::fs::File::open(path)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                load_zoo(file)?
            }
        };
        let compiler = match config {
            None => Compiler::default(),
            Some(path) => Compiler::new(CompilerConfig::from_path(path)?),
        };
        Ok(Context { zoo, compiler })
    }

    pub fn bundled() -> Self {
        Context {
            zoo: bundled_zoo(),
            compiler: Compiler::default(),
        }
    }

    /// Resolves `none`, an id, a name or a model id.
    pub fn endpoint(&self, needle: Option<&str>) -> Result<Option<&Endpoint>, CliError> {
        match needle.map(str::trim) {
            None | Some("") => Ok(None),
            Some(s) if s.eq_ignore_ascii_case("none") => Ok(None),
            Some(s) => self
                .zoo
                .find(s)
                .map(Some)
                .ok_or_else(|| CliError::Usage(format!("no endpoint matches `{s}`"))),
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = Context::load(cli.zoo.as_deref(), cli.config.as_deref())?;
    match cli.command {
        Command::RunBatch(args) => batch::cmd_run_batch(&ctx, &args, out).map(|_| ()),
        Command::Report(args) => report::cmd_report(&ctx, &args, out).map(|_| ()),
        Command::FitPrior(args) => fit::cmd_fit_prior(&ctx, &args, out),
        Command::Permtest(args) => fit::cmd_permtest(&ctx, &args, out),
        Command::Solve(args) => solve::cmd_solve(&ctx, &args, out),
        Command::Repl(args) => {
            let stdin = std::io::stdin();
            repl::cmd_repl(&ctx, &args, stdin.lock(), out)
        }
    }
}
