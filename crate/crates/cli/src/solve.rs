//! One-shot compile and solve, shared with the REPL.

use std::fmt::Write as _;
use std::io::Write;

use clauseroute::dirkey::{KeyKind, Mode};
use clauseroute::postcond::Label;
use clauseroute::solver::{build_instance, solve, solve_oracle, MaxSmtInstance, Selection, ORACLE_MAX_ENDPOINTS};
use clauseroute::zoo::Endpoint;

use crate::args::SolveArgs;
use crate::report::num;
use crate::{CliError, Context};

/// A compiled and solved key.
pub struct Solved {
    pub kind: KeyKind,
    pub instance: MaxSmtInstance<f64>,
    pub selection: Selection<f64>,
    pub text: String,
}

/// Compiles `key`, solves it and renders the constraint set, the
/// per-endpoint utilities and the selection. `explain` adds every clause
/// literal.
pub fn solve_key(
    ctx: &Context,
    key: &str,
    current: Option<&Endpoint>,
    mode: Mode,
    explain: bool,
) -> Result<Solved, CliError> {
    let dk = ctx.compiler.classify(key);
    if dk.kind == KeyKind::Unrecognized {
        return Err(CliError::Usage(format!(
            "unrecognized direction key `{key}`; accepted forms:\n{}",
            ctx.compiler.config().accepted_forms()
        )));
    }
    let cs = ctx.compiler.compile::<f64>(&dk, &ctx.zoo, mode)?;
    let inst = build_instance(&cs, &ctx.zoo, current)?;
    let sel = solve(&inst);

    let mut s = String::new();
    let _ = writeln!(s, "key: {key} [{}]", dk.kind);
    match current {
        Some(ep) => {
            let _ = writeln!(s, "current: {} {}", ep.id, ep.name);
        }
        None => s.push_str("current: (none yet)\n"),
    }
    let _ = writeln!(s, "{cs}");
    if cs.is_vacuous() {
        s.push_str("vacuous constraint set: a neutral router returns Zero(C) or All(C)\n");
    }
    if explain {
        for (j, p) in cs.hard.iter().enumerate() {
            let _ = writeln!(s, "H{}: {p}", j + 1);
        }
        for (j, c) in cs.soft.iter().enumerate() {
            let _ = writeln!(s, "S{}: {}", j + 1, c.predicate);
        }
    }
    s.push_str("id\tmodel\thard_ok\tutility\tchosen");
    if explain {
        for j in 0..cs.hard.len() {
            let _ = write!(s, "\tH{}", j + 1);
        }
        for j in 0..cs.soft.len() {
            let _ = write!(s, "\tS{}", j + 1);
        }
    }
    s.push('\n');
    for (m, ep) in ctx.zoo.endpoints().iter().enumerate() {
        let _ = write!(
            s,
            "{}\t{}\t{}\t{}\t{}",
            ep.id,
            ep.name,
            u8::from(inst.hard_ok(m)),
            num(sel.utilities[m]),
            u8::from(sel.chosen[m])
        );
        if explain {
            for &lit in inst.hard_lits().row(m).iter().chain(inst.soft_lits().row(m)) {
                let _ = write!(s, "\t{}", u8::from(lit));
            }
        }
        s.push('\n');
    }
    write_outcome(&mut s, &sel);
    Ok(Solved {
        kind: dk.kind,
        instance: inst,
        selection: sel,
        text: s,
    })
}

fn write_outcome(s: &mut String, sel: &Selection<f64>) {
    let ids: Vec<String> = sel.chosen_ids().iter().map(ToString::to_string).collect();
    let _ = writeln!(s, "selected ({}): {}", ids.len(), ids.join(" "));
    let _ = writeln!(s, "objective: {}", num(sel.objective));
    let _ = writeln!(s, "feasible: {}", sel.feasible);
    let _ = writeln!(s, "postcondition: {}", Label::of_count(sel.count(), sel.chosen.len()));
}

fn oracle_line(inst: &MaxSmtInstance<f64>, sel: &Selection<f64>) -> String {
    match solve_oracle(inst) {
        Ok(o) => format!(
            "oracle objective: {} ({})\n",
            num(o.objective),
            if (o.objective - sel.objective).abs() <= 1e-9 { "agrees" } else { "DISAGREES" }
        ),
        Err(_) => format!(
            "oracle skipped: {} endpoints exceed the limit of {ORACLE_MAX_ENDPOINTS}\n",
            inst.endpoints()
        ),
    }
}

pub fn cmd_solve(ctx: &Context, args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(path) = &args.from_dump {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let inst = MaxSmtInstance::<f64>::from_dump(&text)?;
        let sel = solve(&inst);
        let mut s = String::from("id\tutility\tchosen\n");
        for m in 0..inst.endpoints() {
            let _ = writeln!(s, "{}\t{}\t{}", m + 1, num(sel.utilities[m]), u8::from(sel.chosen[m]));
        }
        write_outcome(&mut s, &sel);
        if args.oracle {
            s.push_str(&oracle_line(&inst, &sel));
        }
        out.write_all(s.as_bytes())?;
        return Ok(());
    }
    let key = args.key.as_deref().unwrap_or_default();
    let current = ctx.endpoint(args.current.as_deref())?;
    let solved = solve_key(ctx, key, current, args.mode.into(), args.explain)?;
    out.write_all(solved.text.as_bytes())?;
    if args.oracle {
        out.write_all(oracle_line(&solved.instance, &solved.selection).as_bytes())?;
    }
    if let Some(path) = &args.dump {
        std::fs::write(path, solved.instance.to_dump())?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}
