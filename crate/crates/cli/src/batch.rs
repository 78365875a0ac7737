//! Batch driver: every key line runs `count` times against the agent.

use std::collections::HashSet;
use std::io::Write;

use clauseroute::agentio::{append_runs, load_runs, unix_now, Interaction, RunRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::agent::AgentRunner;
use crate::args::RunBatchArgs;
use crate::{CliError, Context};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySpec {
    pub key: String,
    pub count: usize,
    pub current: Option<String>,
}

/// Parses a keys file: `key[<TAB>count[<TAB>current]]` per line; blank
/// lines and `#` comments are skipped.
pub fn parse_keys(text: &str, default_count: usize) -> Result<Vec<KeySpec>, CliError> {
    let mut specs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let key = fields.next().unwrap_or_default().trim().to_string();
        let count = match fields.next().map(str::trim) {
            None | Some("") => default_count,
            Some(c) => c
                .parse()
                .map_err(|_| CliError::Usage(format!("keys line {}: bad count `{c}`", i + 1)))?,
        };
        let current = fields.next().map(str::trim).filter(|s| !s.is_empty()).map(String::from);
        specs.push(KeySpec { key, count, current });
    }
    Ok(specs)
}

fn digest(key: &str, current: Option<&str>, index: usize, seed: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    for part in [key, current.unwrap_or("-")] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.update((index as u64).to_le_bytes());
    h.update(seed.to_le_bytes());
    h.finalize().into()
}

/// Content hash of (key, current endpoint, index, seed); stable across
/// reruns, which makes batches resumable.
pub fn run_id(key: &str, current: Option<&str>, index: usize, seed: u64) -> String {
    hex::encode(&digest(key, current, index, seed)[..16])
}

/// Per-run generator, independent of which runs were already stored.
pub fn run_rng(key: &str, current: Option<&str>, index: usize, seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(digest(key, current, index, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BatchSummary {
    pub written: usize,
    pub skipped: usize,
}

pub fn cmd_run_batch(ctx: &Context, args: &RunBatchArgs, out: &mut dyn Write) -> Result<BatchSummary, CliError> {
    let text = std::fs::read_to_string(&args.keys)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.keys.display())))?;
    let specs = parse_keys(&text, args.count)?;
    let agent = AgentRunner::build(ctx, &args.agent)?;
    let tag = args.tag.clone().unwrap_or_else(|| agent.tag().to_string());
    let m = ctx.zoo.len();

    let done: HashSet<String> = if args.out.exists() {
        load_runs(&args.out, m)?.records.into_iter().map(|r| r.run_id).collect()
    } else {
        std::fs::File::create(&args.out)?;
        HashSet::new()
    };

    let mut summary = BatchSummary::default();
    for spec in &specs {
        let current_name = spec.current.as_deref().or(args.current.as_deref());
        let current = ctx.endpoint(current_name)?;
        let current_tag = current.map(|ep| ep.id.to_string());
        for index in 0..spec.count {
            let id = run_id(&spec.key, current_tag.as_deref(), index, args.seed);
            if done.contains(&id) {
                summary.skipped += 1;
                continue;
            }
            let mut rng = run_rng(&spec.key, current_tag.as_deref(), index, args.seed);
            let reply = agent.reply(current, &args.prompt, &spec.key, &mut rng).map_err(|e| match e {
                CliError::Transport(msg) => CliError::Transport(format!(
                    "{msg}; {} runs are stored in {}, rerun the same command to resume",
                    summary.written,
                    args.out.display()
                )),
                other => other,
            })?;
            let record = RunRecord::new(
                Interaction {
                    run_id: id,
                    prompt: args.prompt.clone(),
                    direction_key: spec.key.clone(),
                    current_endpoint: current.map(|ep| ep.id),
                    agent_tag: tag.clone(),
                    timestamp: args.timestamp.unwrap_or_else(unix_now),
                },
                reply,
                m,
            );
            append_runs(&args.out, std::slice::from_ref(&record))?;
            summary.written += 1;
        }
    }
    writeln!(
        out,
        "{} runs written, {} already present, store {}",
        summary.written,
        summary.skipped,
        args.out.display()
    )?;
    Ok(summary)
}
