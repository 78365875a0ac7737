//! Group cross-validated choice of the regularization strength.

use crate::scalar::{cast, Real};

use super::fit::{check_shapes, counts_as, fit_counts, model_from, Design, FitOptions, PriorModel};
use super::library::PredicateLibrary;
use super::metrics::auc_from_counts;
use super::runs::RunMatrix;
use super::PriorError;

/// The regularization grid scanned by default.
pub const DEFAULT_GRID: [f64; 10] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SelectOptions {
    /// Number of cross-validation folds; runs are never split across folds.
    pub folds: usize,
    /// Models within this much of the best CV AUC compete on sparsity.
    pub auc_window: f64,
    pub fit: FitOptions,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions {
            folds: 5,
            auc_window: 0.02,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvRow<T> {
    pub reg_strength: T,
    /// Mean held-out pair AUC over the folds where it is defined.
    pub cv_auc: Option<T>,
    pub folds_scored: usize,
    /// Nonzero weights of the model refitted on all runs.
    pub nonzero: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSelection<T> {
    pub chosen: T,
    pub model: PriorModel<T>,
    pub cv_table: Vec<CvRow<T>>,
}

/// Fold of run `i` under round-robin assignment.
pub fn fold_of(run: usize, folds: usize) -> usize {
    run % folds
}

/// Scans `grid`, then picks the sparsest refitted model whose CV AUC is
/// within `auc_window` of the best (ties to the smaller strength).
pub fn select_model<T: Real>(
    runs: &RunMatrix,
    lib: &PredicateLibrary,
    grid: &[T],
    opts: &SelectOptions,
) -> Result<ModelSelection<T>, PriorError> {
    check_shapes(runs, lib)?;
    if grid.is_empty() {
        return Err(PriorError::InvalidArgument("empty regularization grid".to_string()));
    }
    if opts.folds < 2 {
        return Err(PriorError::InvalidArgument(format!(
            "need at least 2 folds, got {}",
            opts.folds
        )));
    }
    if runs.len() < opts.folds {
        return Err(PriorError::FoldCount {
            runs: runs.len(),
            folds: opts.folds,
        });
    }

    let design = Design::new(lib);
    let (k_all, n_all) = runs.successes();
    let per_fold: Vec<(Vec<u64>, u64)> = (0..opts.folds)
        .map(|f| runs.successes_where(|i| fold_of(i, opts.folds) == f))
        .collect();

    let mut table = Vec::with_capacity(grid.len());
    let mut models = Vec::with_capacity(grid.len());
    for &r in grid {
        let mut auc_sum = T::zero();
        let mut scored = 0usize;
        for (k_out, n_out) in &per_fold {
            let k_in: Vec<u64> = k_all.iter().zip(k_out).map(|(a, b)| a - b).collect();
            let (kt, nt) = counts_as::<T>(&k_in, n_all - n_out);
            let fitted = fit_counts(&design, &kt, &nt, r, &opts.fit)?;
            let scores = model_from(fitted, r, lib).probabilities(lib);
            let neg: Vec<u64> = k_out.iter().map(|k| n_out - k).collect();
            if let Ok(auc) = auc_from_counts(&scores, k_out, &neg) {
                auc_sum = auc_sum + auc;
                scored += 1;
            }
        }
        let (kt, nt) = counts_as::<T>(&k_all, n_all);
        let model = model_from(fit_counts(&design, &kt, &nt, r, &opts.fit)?, r, lib);
        table.push(CvRow {
            reg_strength: r,
            cv_auc: (scored > 0).then(|| auc_sum / cast(scored as f64)),
            folds_scored: scored,
            nonzero: model.nonzero(),
        });
        models.push(model);
    }

    let best = table
        .iter()
        .filter_map(|row| row.cv_auc)
        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))))
        .ok_or(PriorError::UndefinedAuc)?;
    let threshold = best - cast(opts.auc_window) - cast(1e-12);
    let chosen = table
        .iter()
        .enumerate()
        .filter(|(_, row)| row.cv_auc.is_some_and(|auc| auc >= threshold))
        .min_by(|(_, a), (_, b)| {
            a.nonzero.cmp(&b.nonzero).then(
                a.reg_strength
                    .partial_cmp(&b.reg_strength)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
        })
        .map(|(i, _)| i)
        .expect("the best row is always a candidate");

    Ok(ModelSelection {
        chosen: grid[chosen],
        model: models.swap_remove(chosen),
        cv_table: table,
    })
}
