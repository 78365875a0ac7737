//! Line-oriented interactive session.

use std::io::{BufRead, Write};

use clauseroute::dirkey::{KeyKind, Mode};
use clauseroute::postcond::{classify, coverage_precision, process_mask, render_bits};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent::AgentRunner;
use crate::args::ReplArgs;
use crate::report::num;
use crate::solve::solve_key;
use crate::{CliError, Context};

const HELP: &str = "\
commands:
  current <id|name|none>    set the current endpoint
  mode shortlist|completeness
  explain                   clause literals per endpoint for the last key
  forms                     accepted direction-key forms
  help
  quit
anything else is read as a direction key";

struct State<'c> {
    current: Option<&'c clauseroute::zoo::Endpoint>,
    mode: Mode,
    last_key: Option<String>,
}

/// Runs until `quit` or end of input. Errors inside a command are printed
/// and the session continues.
pub fn cmd_repl<R: BufRead>(ctx: &Context, args: &ReplArgs, input: R, out: &mut dyn Write) -> Result<(), CliError> {
    let agent = if args.with_agent {
        Some(AgentRunner::build(ctx, &args.agent)?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut state = State {
        current: None,
        mode: args.agent.mode.into(),
        last_key: None,
    };
    writeln!(out, "{} endpoints loaded; type `help` for commands", ctx.zoo.len())?;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        let (cmd, rest) = line.split_once(' ').unwrap_or((line, ""));
        let rest = rest.trim();
        let result = match cmd {
            "quit" | "exit" => break,
            "" => Ok(String::new()),
            "help" => Ok(format!("{HELP}\n")),
            "forms" => Ok(format!("{}\n", ctx.compiler.config().accepted_forms())),
            "current" => ctx.endpoint(Some(rest)).map(|ep| {
                state.current = ep;
                match ep {
                    Some(ep) => format!("current endpoint: {} {}\n", ep.id, ep.name),
                    None => "current endpoint cleared\n".to_string(),
                }
            }),
            "mode" => match rest {
                "shortlist" => {
                    state.mode = Mode::Shortlist;
                    Ok("mode: SHORTLIST\n".to_string())
                }
                "completeness" => {
                    state.mode = Mode::Completeness;
                    Ok("mode: COMPLETENESS\n".to_string())
                }
                _ => Err(CliError::Usage("mode is shortlist or completeness".to_string())),
            },
            "explain" => match &state.last_key {
                Some(key) => solve_key(ctx, key, state.current, state.mode, true).map(|s| s.text),
                None => Err(CliError::Usage("no direction key entered yet".to_string())),
            },
            _ => route(ctx, &mut state, agent.as_ref(), line, &mut rng),
        };
        match result {
            Ok(text) => out.write_all(text.as_bytes())?,
            Err(e) => writeln!(out, "error: {e}")?,
        }
        out.flush()?;
    }
    writeln!(out, "bye")?;
    Ok(())
}

fn route(
    ctx: &Context,
    state: &mut State<'_>,
    agent: Option<&AgentRunner<'_>>,
    key: &str,
    rng: &mut ChaCha8Rng,
) -> Result<String, CliError> {
    let solved = solve_key(ctx, key, state.current, state.mode, false)?;
    state.last_key = Some(key.to_string());
    let mut text = solved.text;
    if let Some(agent) = agent {
        let reply = agent.reply(state.current, "", key, rng)?;
        let mask = process_mask(&reply, ctx.zoo.len());
        let post = classify(&mask);
        text.push_str(&format!(
            "agent mask: {}\nagent postcondition: {}{}\n",
            render_bits(&mask.bits),
            post.label,
            if post.fail_flag { " (format violation)" } else { "" }
        ));
        let dk = ctx.compiler.classify(key);
        if matches!(dk.kind, KeyKind::LfPd | KeyKind::LfGd) {
            if let Ok(Some(target)) = ctx.compiler.target_predicate(&dk, &ctx.zoo) {
                let t: Vec<bool> = ctx
                    .zoo
                    .endpoints()
                    .iter()
                    .map(|ep| target.eval(ep, state.current, &ctx.zoo))
                    .collect();
                if let Ok(cp) = coverage_precision::<f64>(&mask.bits, &t) {
                    text.push_str(&format!(
                        "coverage: {}  precision: {}\n",
                        num(cp.coverage),
                        cp.precision.map_or_else(|| "undefined (empty selection)".to_string(), num)
                    ));
                }
            }
        }
    }
    Ok(text)
}
