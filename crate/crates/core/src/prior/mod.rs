//! Sparse logistic explanation of no-feedback selections.
//!
//! A fixed library of boolean endpoint predicates is regressed against the
//! inclusion bits of Case S runs. Model strength is chosen by group
//! cross-validation and the fit is checked against a set-size-preserving
//! permutation null.

use thiserror::Error;

pub mod fit;
pub mod library;
pub mod metrics;
pub mod permutation;
pub mod report;
pub mod runs;
pub mod select;

pub use fit::{fit, fit_with, objective_at, FitOptions, PriorModel};
pub use library::{build_library, library_predicates, PredicateLibrary, LIBRARY_NAMES};
pub use metrics::{
    auc_from_counts, auc_from_labels, average_ranks, pair_auc, prior_score, spearman,
    spearman_selection_rate, top_k, topk_overlap, topk_recovery,
};
pub use permutation::{
    diagnose, permutation_test, Metrics, PermutationOptions, PermutationTest, MIN_PERMUTATIONS,
};
pub use report::{nonzero_weights, render_report, PriorReport};
pub use runs::{Run, RunMatrix};
pub use select::{select_model, CvRow, ModelSelection, SelectOptions, DEFAULT_GRID};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PriorError {
    #[error("predicate {predicate} references unknown attribute {attribute:?}")]
    Library { predicate: String, attribute: String },
    #[error("no runs to fit")]
    NoRuns,
    #[error("{0}")]
    InvalidArgument(String),
    #[error("AUC is undefined without both selected and unselected pairs")]
    UndefinedAuc,
    #[error("correlation is undefined for a constant ranking")]
    UndefinedCorrelation,
    #[error("{runs} runs cannot fill {folds} folds")]
    FoldCount { runs: usize, folds: usize },
}
