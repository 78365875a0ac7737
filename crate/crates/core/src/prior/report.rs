//! Plain-text prior report: nonzero clause weights in descending order,
//! then diagnostics, the permutation test and the CV table.

use std::fmt::Write as _;

use crate::scalar::Real;

use super::permutation::{Metrics, PermutationTest};
use super::select::ModelSelection;

pub struct PriorReport<'a, T> {
    pub selection: &'a ModelSelection<T>,
    pub metrics: &'a Metrics<T>,
    /// Number of runs the model was fitted on.
    pub runs: usize,
    pub endpoints: usize,
    pub k: usize,
    /// The test and the seed it ran with.
    pub permutation: Option<(&'a PermutationTest<T>, u64)>,
}

fn f<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Nonzero `(name, weight)` pairs, largest weight first.
pub fn nonzero_weights<T: Real>(selection: &ModelSelection<T>) -> Vec<(&str, T)> {
    let model = &selection.model;
    let mut rows: Vec<(&str, T)> = model
        .names
        .iter()
        .zip(&model.weights)
        .filter(|(_, w)| **w != T::zero())
        .map(|(n, w)| (n.as_str(), *w))
        .collect();
    // Stable sort keeps library order among equal weights.
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    rows
}

pub fn render_report<T: Real>(report: &PriorReport<'_, T>) -> String {
    let sel = report.selection;
    let model = &sel.model;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# Sparse implicit clause weights ({} Case S runs, M = {}, J = {})",
        report.runs,
        report.endpoints,
        model.weights.len()
    );
    let _ = writeln!(out, "R\t{}", f(sel.chosen));
    let _ = writeln!(out, "intercept\t{:.4}", f(model.intercept));
    let _ = writeln!(out, "nonzero\t{}/{}", model.nonzero(), model.weights.len());
    out.push('\n');

    out.push_str("Clause\tWeight\n");
    for (name, w) in nonzero_weights(sel) {
        let _ = writeln!(out, "{name}\t{:.4}", f(w));
    }
    out.push('\n');

    let m = report.metrics;
    out.push_str("# Diagnostics\n");
    let _ = writeln!(out, "pair_auc\t{:.4}", f(m.pair_auc));
    match m.spearman {
        Some(rho) => {
            let _ = writeln!(out, "spearman\t{:.4}", f(rho));
        }
        None => out.push_str("spearman\tundefined\n"),
    }
    let _ = writeln!(out, "top{}\t{}/{}", report.k, m.topk, report.k);

    if let Some((test, seed)) = report.permutation {
        out.push('\n');
        let _ = writeln!(
            out,
            "# Permutation test (n_perm = {}, seed = {seed})",
            test.null.len()
        );
        out.push_str("metric\tobserved\tnull_mean\tp\n");
        let _ = writeln!(
            out,
            "pair_auc\t{:.4}\t{:.4}\t{:.3}",
            f(test.observed.pair_auc),
            f(test.null_mean_auc),
            test.p_auc
        );
        let _ = writeln!(
            out,
            "top{}\t{}\t{:.2}\t{:.3}",
            report.k, test.observed.topk, test.null_mean_topk, test.p_topk
        );
        let _ = writeln!(
            out,
            "spearman\t{:.4}\t{:.4}\t{:.3}",
            f(test.observed.spearman_or_zero()),
            f(test.null_mean_spearman),
            test.p_spearman
        );
    }

    out.push('\n');
    out.push_str("# Cross-validation\nR\tcv_auc\tfolds\tnonzero\n");
    for row in &sel.cv_table {
        let auc = row
            .cv_auc
            .map_or_else(|| "undefined".to_string(), |a| format!("{:.4}", f(a)));
        let _ = writeln!(
            out,
            "{}\t{auc}\t{}\t{}",
            f(row.reg_strength),
            row.folds_scored,
            row.nonzero
        );
    }
    out
}
