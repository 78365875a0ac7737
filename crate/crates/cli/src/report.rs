//! Report bundle: plain-text tables recomputed from a run store.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clauseroute::agentio::RunRecord;
use clauseroute::dirkey::KeyKind;
use clauseroute::postcond::{coverage_precision, tally_outcomes, Label};
use clauseroute::zoo::nearest_rank;

use crate::args::{PriorArgs, ReportArgs};
use crate::fit::{load_store, prior_report_text};
use crate::{CliError, Context};

/// Attributes compared between the no-feedback selections and the zoo.
pub const PERCENTILE_ATTRIBUTES: [&str; 7] = [
    "Intelligence",
    "Speed",
    "Input Price",
    "Cached Price",
    "Output Price",
    "Context Window",
    "Max Output",
];

/// Shortest decimal rendering with at most 4 fractional digits.
pub fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn outcome_table(records: &[RunRecord]) -> String {
    tally_outcomes(records.iter().map(|r| (r.direction_key.as_str(), r.postcondition()))).to_text()
}

#[derive(Default)]
struct CoverageAcc {
    runs: usize,
    scored: usize,
    coverage: f64,
    precision: f64,
    precision_defined: usize,
    no_target: usize,
}

/// Mean coverage and precision per key group against the ground-truth
/// target set of each run's key and current endpoint.
pub fn coverage_table(ctx: &Context, records: &[RunRecord]) -> String {
    let mut groups: BTreeMap<KeyKind, CoverageAcc> = BTreeMap::new();
    for r in records {
        let key = ctx.compiler.classify(&r.direction_key);
        let acc = groups.entry(key.kind).or_default();
        acc.runs += 1;
        let Ok(Some(target)) = ctx.compiler.target_predicate(&key, &ctx.zoo) else {
            acc.no_target += 1;
            continue;
        };
        let current = r.current_endpoint.and_then(|id| ctx.zoo.endpoint(id));
        let t: Vec<bool> = ctx
            .zoo
            .endpoints()
            .iter()
            .map(|ep| target.eval(ep, current, &ctx.zoo))
            .collect();
        match coverage_precision::<f64>(&r.bits(), &t) {
            Ok(cp) => {
                acc.scored += 1;
                acc.coverage += cp.coverage;
                if let Some(p) = cp.precision {
                    acc.precision += p;
                    acc.precision_defined += 1;
                }
            }
            Err(_) => acc.no_target += 1,
        }
    }
    let mut s = String::from("group\truns\tscored\tcoverage_mean_pct\tprecision_mean_pct\tprecision_undefined\tno_target\n");
    for (kind, acc) in &groups {
        let pct = |sum: f64, n: usize| {
            if n == 0 {
                "-".to_string()
            } else {
                format!("{:.2}", 100.0 * sum / n as f64)
            }
        };
        let _ = writeln!(
            s,
            "{kind}\t{}\t{}\t{}\t{}\t{}\t{}",
            acc.runs,
            acc.scored,
            pct(acc.coverage, acc.scored),
            pct(acc.precision, acc.precision_defined),
            acc.scored - acc.precision_defined,
            acc.no_target
        );
    }
    s
}

fn is_nf(ctx: &Context, r: &RunRecord) -> bool {
    ctx.compiler.classify(&r.direction_key).kind == KeyKind::Nf
}

/// Per-endpoint selection counts over no-feedback runs, all labels and
/// Case S only.
pub fn selection_frequencies(ctx: &Context, records: &[RunRecord]) -> String {
    let m = ctx.zoo.len();
    let (mut all, mut case_s) = (vec![0usize; m], vec![0usize; m]);
    let (mut n_all, mut n_case_s) = (0usize, 0usize);
    for r in records.iter().filter(|r| is_nf(ctx, r)) {
        let bits = r.bits();
        n_all += 1;
        let s = r.label == Label::CaseS;
        n_case_s += usize::from(s);
        for i in (0..m).filter(|&i| bits[i]) {
            all[i] += 1;
            if s {
                case_s[i] += 1;
            }
        }
    }
    let rate = |k: usize, n: usize| if n == 0 { "-".to_string() } else { format!("{:.4}", k as f64 / n as f64) };
    let mut s = String::from("id\tmodel\tnf_selected\tnf_rate\tcase_s_selected\tcase_s_rate\n");
    for (i, ep) in ctx.zoo.endpoints().iter().enumerate() {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}",
            ep.id,
            ep.name,
            all[i],
            rate(all[i], n_all),
            case_s[i],
            rate(case_s[i], n_case_s)
        );
    }
    s
}

fn median(sorted: &[usize]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

/// Set-size summary and histogram per key.
pub fn set_sizes(records: &[RunRecord]) -> String {
    let mut by_key: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for r in records {
        by_key
            .entry(r.direction_key.as_str())
            .or_default()
            .push(r.bits().iter().filter(|b| **b).count());
    }
    let mut s = String::from("key\truns\tmean\tmedian\tmin\tmax\n");
    for (key, sizes) in by_key.iter_mut() {
        sizes.sort_unstable();
        let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
        let _ = writeln!(
            s,
            "{key}\t{}\t{:.2}\t{}\t{}\t{}",
            sizes.len(),
            mean,
            num(median(sizes)),
            sizes[0],
            sizes[sizes.len() - 1]
        );
    }
    s.push_str("\nkey\tsize\tcount\n");
    for (key, sizes) in &by_key {
        let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
        for &k in sizes {
            *hist.entry(k).or_default() += 1;
        }
        for (size, count) in hist {
            let _ = writeln!(s, "{key}\t{size}\t{count}");
        }
    }
    s
}

fn summary(values: &mut [f64]) -> [String; 4] {
    if values.is_empty() {
        return ["-", "-", "-", "-"].map(String::from);
    }
    values.sort_by(f64::total_cmp);
    let q = |p: f64| num(nearest_rank(values, p).expect("non-empty"));
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    [q(0.25), q(0.5), q(0.75), num(mean)]
}

/// Quartiles and means of each attribute over the zoo and over the pooled
/// endpoints selected in no-feedback Case S runs.
pub fn attribute_percentiles(ctx: &Context, records: &[RunRecord]) -> String {
    let mut picks = vec![0usize; ctx.zoo.len()];
    for r in records.iter().filter(|r| r.label == Label::CaseS && is_nf(ctx, r)) {
        for (i, b) in r.bits().iter().enumerate() {
            picks[i] += usize::from(*b);
        }
    }
    let mut s = String::from("attribute\tzoo_q25\tzoo_median\tzoo_q75\tzoo_mean\tnf_q25\tnf_median\tnf_q75\tnf_mean\tnf_n\n");
    for attr in PERCENTILE_ATTRIBUTES {
        if ctx.zoo.attr_index(attr).is_none() {
            continue;
        }
        let mut zoo_vals = Vec::new();
        let mut nf_vals = Vec::new();
        for (i, ep) in ctx.zoo.endpoints().iter().enumerate() {
            if let Some(v) = ctx.zoo.value(ep, attr).and_then(|v| v.as_f64()) {
                zoo_vals.push(v);
                nf_vals.extend(std::iter::repeat_n(v, picks[i]));
            }
        }
        let n = nf_vals.len();
        let z = summary(&mut zoo_vals);
        let f = summary(&mut nf_vals);
        let _ = writeln!(s, "{attr}\t{}\t{}\t{n}", z.join("\t"), f.join("\t"));
    }
    s
}

pub const REPORT_FILES: [&str; 6] = [
    "outcomes.tsv",
    "coverage_precision.tsv",
    "selection_frequencies.tsv",
    "set_sizes.tsv",
    "attribute_percentiles.tsv",
    "prior_report.txt",
];

/// Every report table as `(file name, contents)`.
pub fn build_report(
    ctx: &Context,
    records: &[RunRecord],
    prior: &PriorArgs,
    n_perm: usize,
) -> Result<Vec<(&'static str, String)>, CliError> {
    let prior_text = match prior_report_text(ctx, records, prior, n_perm) {
        Ok(text) => text,
        Err(CliError::Data(msg)) => format!("prior fit skipped: {msg}\n"),
        Err(e) => return Err(e),
    };
    Ok(REPORT_FILES
        .into_iter()
        .zip([
            outcome_table(records),
            coverage_table(ctx, records),
            selection_frequencies(ctx, records),
            set_sizes(records),
            attribute_percentiles(ctx, records),
            prior_text,
        ])
        .collect())
}

pub fn cmd_report(ctx: &Context, args: &ReportArgs, out: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    let records = load_store(ctx, &args.store)?;
    if records.is_empty() {
        writeln!(out, "empty store {}: nothing to report", args.store.display())?;
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(&args.out_dir)?;
    let mut written = Vec::new();
    for (name, text) in build_report(ctx, &records, &args.prior, args.n_perm)? {
        let path = args.out_dir.join(name);
        std::fs::write(&path, text)?;
        writeln!(out, "wrote {}", path.display())?;
        written.push(path);
    }
    Ok(written)
}
