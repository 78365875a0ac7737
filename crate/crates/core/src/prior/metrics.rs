//! Ranking diagnostics: pair AUC, Spearman correlation, top-k overlap.

use std::cmp::Ordering;

use crate::scalar::{cast, Real};

use super::fit::PriorModel;
use super::library::PredicateLibrary;
use super::runs::RunMatrix;
use super::PriorError;

fn cmp_scores<T: Real>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Exact AUC from per-item scores with positive and negative label counts.
///
/// Equals the probability that a random positive outranks a random
/// negative, ties counting one half.
pub fn auc_from_counts<T: Real>(scores: &[T], pos: &[u64], neg: &[u64]) -> Result<T, PriorError> {
    let total_pos: u64 = pos.iter().sum();
    let total_neg: u64 = neg.iter().sum();
    if total_pos == 0 || total_neg == 0 {
        return Err(PriorError::UndefinedAuc);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| cmp_scores(&scores[a], &scores[b]));

    // Walk tie groups in ascending score order; u counts doubled pairs so
    // everything stays integral.
    let mut negatives_below: u128 = 0;
    let mut doubled: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut gp, mut gn) = (0u128, 0u128);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            gp += u128::from(pos[order[j]]);
            gn += u128::from(neg[order[j]]);
            j += 1;
        }
        doubled += 2 * gp * negatives_below + gp * gn;
        negatives_below += gn;
        i = j;
    }
    let denom = 2.0 * total_pos as f64 * total_neg as f64;
    Ok(cast(doubled as f64 / denom))
}

/// Exact AUC over individually labelled items.
pub fn auc_from_labels<T: Real>(scores: &[T], labels: &[bool]) -> Result<T, PriorError> {
    let pos: Vec<u64> = labels.iter().map(|l| u64::from(*l)).collect();
    let neg: Vec<u64> = labels.iter().map(|l| u64::from(!*l)).collect();
    auc_from_counts(scores, &pos, &neg)
}

/// Pair-level AUC of the model's probabilities against every
/// (run, endpoint) inclusion label.
pub fn pair_auc<T: Real>(model: &PriorModel<T>, runs: &RunMatrix, lib: &PredicateLibrary) -> Result<T, PriorError> {
    let scores = model.probabilities(lib);
    let (k, n) = runs.successes();
    let neg: Vec<u64> = k.iter().map(|k| n - k).collect();
    auc_from_counts(&scores, &k, &neg)
}

/// 1-based average ranks; tied values share the mean of their positions.
pub fn average_ranks<T: Real>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| cmp_scores(&values[a], &values[b]));
    let mut ranks = vec![T::zero(); values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // Positions i+1 ..= j share their mean.
        let mean: T = cast((i + 1 + j) as f64 / 2.0);
        for &idx in &order[i..j] {
            ranks[idx] = mean;
        }
        i = j;
    }
    ranks
}

/// Spearman correlation: Pearson correlation of average ranks.
pub fn spearman<T: Real>(x: &[T], y: &[T]) -> Result<T, PriorError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(PriorError::InvalidArgument(format!(
            "spearman needs two equal-length samples of size >= 2, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n: T = cast(x.len() as f64);
    let mx = rx.iter().fold(T::zero(), |a, v| a + *v) / n;
    let my = ry.iter().fold(T::zero(), |a, v| a + *v) / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (*a - mx, *b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(PriorError::UndefinedCorrelation);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman correlation between predicted probabilities and empirical
/// per-endpoint selection rates.
pub fn spearman_selection_rate<T: Real>(
    model: &PriorModel<T>,
    runs: &RunMatrix,
    lib: &PredicateLibrary,
) -> Result<T, PriorError> {
    let predicted = model.probabilities(lib);
    let rates: Vec<T> = runs.selection_rates().into_iter().map(cast).collect();
    spearman(&predicted, &rates)
}

/// Indices of the `k` largest values; ties go to the lower index.
pub fn top_k<T: Real>(values: &[T], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| cmp_scores(&values[b], &values[a]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// `|top-k(predicted) ∩ top-k(observed)|`.
pub fn topk_overlap<T: Real>(predicted: &[T], observed: &[T], k: usize) -> usize {
    let a = top_k(predicted, k);
    let b = top_k(observed, k);
    a.iter().filter(|i| b.contains(i)).count()
}

pub fn topk_recovery<T: Real>(
    model: &PriorModel<T>,
    runs: &RunMatrix,
    lib: &PredicateLibrary,
    k: usize,
) -> Result<usize, PriorError> {
    if k == 0 || k > lib.endpoints() {
        return Err(PriorError::InvalidArgument(format!(
            "k = {k} outside 1..={}",
            lib.endpoints()
        )));
    }
    let predicted = model.probabilities(lib);
    let rates: Vec<T> = runs.selection_rates().into_iter().map(cast).collect();
    Ok(topk_overlap(&predicted, &rates, k))
}

/// `s_m = sum_j w_j psi_j(m)`, intercept excluded.
pub fn prior_score<T: Real>(model: &PriorModel<T>, lib: &PredicateLibrary) -> Vec<T> {
    (0..lib.endpoints())
        .map(|m| {
            lib.row(m)
                .iter()
                .zip(&model.weights)
                .filter(|(f, _)| **f)
                .fold(T::zero(), |acc, (_, w)| acc + *w)
        })
        .collect()
}
