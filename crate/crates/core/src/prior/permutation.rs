//! Set-size-preserving permutation test for the fitted prior.
//!
//! Each trial shuffles endpoint identities independently within every run,
//! so every run keeps its set size, then reruns model selection and the
//! diagnostics. Trial `t` draws from a ChaCha8 stream `t` under the user
//! seed, so results do not depend on scheduling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::scalar::{cast, Real};

use super::library::PredicateLibrary;
use super::metrics::{pair_auc, spearman_selection_rate, topk_recovery};
use super::runs::RunMatrix;
use super::select::{select_model, ModelSelection, SelectOptions};
use super::PriorError;

/// Smallest accepted number of permutations.
pub const MIN_PERMUTATIONS: usize = 19;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics<T> {
    pub pair_auc: T,
    pub topk: usize,
    /// `None` when either ranking is constant.
    pub spearman: Option<T>,
}

impl<T: Real> Metrics<T> {
    /// Spearman value used for comparisons; an undefined correlation counts
    /// as no association.
    pub fn spearman_or_zero(&self) -> T {
        self.spearman.unwrap_or_else(T::zero)
    }
}

/// Runs model selection and computes the three diagnostics in-sample.
pub fn diagnose<T: Real>(
    runs: &RunMatrix,
    lib: &PredicateLibrary,
    grid: &[T],
    k: usize,
    opts: &SelectOptions,
) -> Result<(ModelSelection<T>, Metrics<T>), PriorError> {
    let selection = select_model(runs, lib, grid, opts)?;
    let metrics = Metrics {
        pair_auc: pair_auc(&selection.model, runs, lib)?,
        topk: topk_recovery(&selection.model, runs, lib, k)?,
        spearman: match spearman_selection_rate(&selection.model, runs, lib) {
            Ok(rho) => Some(rho),
            Err(PriorError::UndefinedCorrelation) => None,
            Err(e) => return Err(e),
        },
    };
    Ok((selection, metrics))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationOptions {
    pub n_perm: usize,
    pub seed: u64,
    /// `k` of the top-k overlap.
    pub k: usize,
    pub select: SelectOptions,
}

impl Default for PermutationOptions {
    fn default() -> Self {
        PermutationOptions {
            n_perm: 199,
            seed: 0,
            k: 8,
            select: SelectOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationTest<T> {
    pub observed: Metrics<T>,
    pub null: Vec<Metrics<T>>,
    pub p_auc: f64,
    pub p_topk: f64,
    pub p_spearman: f64,
    pub null_mean_auc: T,
    pub null_mean_topk: f64,
    pub null_mean_spearman: T,
}

/// Shuffles endpoint identities within every run.
pub fn permute_within_runs(runs: &RunMatrix, rng: &mut ChaCha8Rng) -> RunMatrix {
    runs.map_bits(|_, run| {
        let mut bits = run.bits.clone();
        bits.shuffle(rng);
        bits
    })
}

/// Generator for permutation trial `trial`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// `(1 + #{null >= observed}) / (1 + n)`.
pub fn add_one_p_value<I: IntoIterator<Item = bool>>(at_least_as_large: I, n: usize) -> f64 {
    let hits = at_least_as_large.into_iter().filter(|b| *b).count();
    (1 + hits) as f64 / (1 + n) as f64
}

pub fn permutation_test<T: Real>(
    runs: &RunMatrix,
    lib: &PredicateLibrary,
    grid: &[T],
    opts: &PermutationOptions,
) -> Result<PermutationTest<T>, PriorError> {
    if opts.n_perm < MIN_PERMUTATIONS {
        return Err(PriorError::InvalidArgument(format!(
            "n_perm = {} is below the minimum of {MIN_PERMUTATIONS}",
            opts.n_perm
        )));
    }
    let (_, observed) = diagnose(runs, lib, grid, opts.k, &opts.select)?;

    let null: Vec<Metrics<T>> = (0..opts.n_perm)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(opts.seed, trial);
            let permuted = permute_within_runs(runs, &mut rng);
            for (a, b) in runs.runs().iter().zip(permuted.runs()) {
                assert_eq!(a.size(), b.size(), "permutation changed a set size");
            }
            diagnose(&permuted, lib, grid, opts.k, &opts.select).map(|(_, m)| m)
        })
        .collect::<Result<_, _>>()?;

    let n = null.len();
    let count: T = cast(n as f64);
    Ok(PermutationTest {
        p_auc: add_one_p_value(null.iter().map(|m| m.pair_auc >= observed.pair_auc), n),
        p_topk: add_one_p_value(null.iter().map(|m| m.topk >= observed.topk), n),
        p_spearman: add_one_p_value(
            null.iter()
                .map(|m| m.spearman_or_zero() >= observed.spearman_or_zero()),
            n,
        ),
        null_mean_auc: null.iter().fold(T::zero(), |a, m| a + m.pair_auc) / count,
        null_mean_topk: null.iter().map(|m| m.topk as f64).sum::<f64>() / n as f64,
        null_mean_spearman: null.iter().fold(T::zero(), |a, m| a + m.spearman_or_zero()) / count,
        observed,
        null,
    })
}
