//! fit-prior and permtest.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use clauseroute::agentio::{load_runs, RunRecord};
use clauseroute::dirkey::KeyKind;
use clauseroute::prior::{
    build_library, diagnose, permutation_test, render_report, PermutationOptions, PermutationTest, PriorReport,
    RunMatrix, SelectOptions, MIN_PERMUTATIONS,
};

use crate::args::{FitArgs, PriorArgs};
use crate::{CliError, Context};

/// Loads a store for the context's zoo; flagged records are reported on
/// stderr and kept.
pub fn load_store(ctx: &Context, path: &Path) -> Result<Vec<RunRecord>, CliError> {
    let loaded = load_runs(path, ctx.zoo.len())?;
    for flag in &loaded.flags {
        eprintln!("warning: line {} ({}): {}", flag.line, flag.run_id, flag.reason);
    }
    Ok(loaded.records)
}

/// Case S runs, restricted to no-feedback keys unless `all_keys`.
pub fn case_s_runs(ctx: &Context, records: &[RunRecord], all_keys: bool) -> Result<RunMatrix, CliError> {
    let kept = records
        .iter()
        .filter(|r| all_keys || ctx.compiler.classify(&r.direction_key).kind == KeyKind::Nf)
        .map(|r| (r.run_id.clone(), r.bits()));
    let runs = RunMatrix::case_s(ctx.zoo.len(), kept)?;
    if runs.is_empty() {
        return Err(CliError::Data(
            "no CASE_S runs to condition on (Zero, One and All runs carry no preference information)".to_string(),
        ));
    }
    Ok(runs)
}

fn select_options(args: &PriorArgs) -> SelectOptions {
    SelectOptions {
        folds: args.folds,
        ..SelectOptions::default()
    }
}

/// The full prior pipeline as report text. `n_perm = 0` skips the
/// permutation test.
pub fn prior_report_text(
    ctx: &Context,
    records: &[RunRecord],
    args: &PriorArgs,
    n_perm: usize,
) -> Result<String, CliError> {
    let runs = case_s_runs(ctx, records, args.all_keys)?;
    let lib = build_library(&ctx.zoo)?;
    let opts = select_options(args);
    let (selection, metrics) = diagnose(&runs, &lib, &args.grid, args.k, &opts)?;
    let test = if n_perm > 0 {
        Some(run_permutations(&runs, &lib, args, n_perm)?)
    } else {
        None
    };
    Ok(render_report(&PriorReport {
        selection: &selection,
        metrics: &metrics,
        runs: runs.len(),
        endpoints: runs.endpoints(),
        k: args.k,
        permutation: test.as_ref().map(|t| (t, args.seed)),
    }))
}

fn run_permutations(
    runs: &RunMatrix,
    lib: &clauseroute::prior::PredicateLibrary,
    args: &PriorArgs,
    n_perm: usize,
) -> Result<PermutationTest<f64>, CliError> {
    if n_perm < MIN_PERMUTATIONS {
        return Err(CliError::Usage(format!("--n-perm must be 0 or at least {MIN_PERMUTATIONS}")));
    }
    let opts = PermutationOptions {
        n_perm,
        seed: args.seed,
        k: args.k,
        select: select_options(args),
    };
    Ok(permutation_test(runs, lib, &args.grid, &opts)?)
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, text)?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn cmd_fit_prior(ctx: &Context, args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let records = load_store(ctx, &args.store)?;
    let text = prior_report_text(ctx, &records, &args.prior, args.n_perm)?;
    emit(&text, args.out.as_deref(), out)
}

pub fn permtest_text(test: &PermutationTest<f64>, k: usize, seed: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "n_perm\t{}\nseed\t{seed}", test.null.len());
    s.push_str("metric\tobserved\tnull_mean\tp\n");
    let _ = writeln!(
        s,
        "pair_auc\t{:.4}\t{:.4}\t{:.3}",
        test.observed.pair_auc, test.null_mean_auc, test.p_auc
    );
    let _ = writeln!(
        s,
        "top{k}\t{}\t{:.2}\t{:.3}",
        test.observed.topk, test.null_mean_topk, test.p_topk
    );
    let _ = writeln!(
        s,
        "spearman\t{:.4}\t{:.4}\t{:.3}",
        test.observed.spearman_or_zero(),
        test.null_mean_spearman,
        test.p_spearman
    );
    s
}

pub fn cmd_permtest(ctx: &Context, args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let records = load_store(ctx, &args.store)?;
    let runs = case_s_runs(ctx, &records, args.prior.all_keys)?;
    let lib = build_library(&ctx.zoo)?;
    let test = run_permutations(&runs, &lib, &args.prior, args.n_perm)?;
    emit(
        &permtest_text(&test, args.prior.k, args.prior.seed),
        args.out.as_deref(),
        out,
    )
}
