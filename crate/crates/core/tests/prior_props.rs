use clauseroute::prior::{
    auc_from_labels, fit, objective_at, pair_auc, permutation_test, select_model, spearman, top_k, PermutationOptions,
    PredicateLibrary, PriorError, PriorModel, RunMatrix, SelectOptions,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_auc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, li) in labels.iter().enumerate() {
        for (j, lj) in labels.iter().enumerate() {
            if *li && !*lj {
                den += 1.0;
                num += match scores[i].partial_cmp(&scores[j]).unwrap() {
                    std::cmp::Ordering::Greater => 1.0,
                    std::cmp::Ordering::Equal => 0.5,
                    std::cmp::Ordering::Less => 0.0,
                };
            }
        }
    }
    (den > 0.0).then(|| num / den)
}

/// Average ranks by counting, then Pearson.
fn brute_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let ranks = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let below = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}

/// Random library and Case S runs over `m` endpoints.
fn synthetic(seed: u64, m: usize, j: usize, n_runs: usize) -> (PredicateLibrary, RunMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features: Vec<Vec<bool>> = (0..m).map(|_| (0..j).map(|_| rng.random_bool(0.4)).collect()).collect();
    let names: Vec<String> = (0..j).map(|i| format!("p{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let lib = PredicateLibrary::from_features(&refs, features).unwrap();
    let mut runs = RunMatrix::case_s(m, std::iter::empty::<(String, Vec<bool>)>()).unwrap();
    let mut i = 0;
    while runs.len() < n_runs {
        let bits: Vec<bool> = (0..m)
            .map(|e| rng.random_bool(if lib.feature(e, 0) { 0.7 } else { 0.3 }))
            .collect();
        runs.offer(format!("r{i}"), bits).unwrap();
        i += 1;
    }
    (lib, runs)
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

proptest! {
    #[test]
    fn auc_matches_double_loop(pairs in prop::collection::vec((0u8..6, any::<bool>()), 2..60)) {
        let scores: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let labels: Vec<bool> = pairs.iter().map(|p| p.1).collect();
        match (auc_from_labels::<f64>(&scores, &labels), brute_auc(&scores, &labels)) {
            (Ok(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (Err(PriorError::UndefinedAuc), None) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn auc_is_flip_symmetric(pairs in prop::collection::vec((0u8..6, any::<bool>()), 2..60)) {
        let scores: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let labels: Vec<bool> = pairs.iter().map(|p| p.1).collect();
        let flipped: Vec<f64> = scores.iter().map(|s| -s).collect();
        if let (Ok(a), Ok(b)) = (auc_from_labels::<f64>(&scores, &labels), auc_from_labels::<f64>(&flipped, &labels)) {
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spearman_matches_rank_pearson(
        xy in prop::collection::vec((0u8..5, 0u8..5), 3..30)
    ) {
        let x: Vec<f64> = xy.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = xy.iter().map(|p| p.1 as f64).collect();
        match (spearman::<f64>(&x, &y), brute_spearman(&x, &y)) {
            (Ok(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (Err(PriorError::UndefinedCorrelation), None) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn top_k_picks_the_largest(v in prop::collection::vec(0u8..10, 1..30), k in 0usize..35) {
        let vals: Vec<f64> = v.iter().map(|x| *x as f64).collect();
        let picked = top_k(&vals, k);
        prop_assert_eq!(picked.len(), k.min(vals.len()));
        let min_in = picked.iter().map(|&i| vals[i]).fold(f64::INFINITY, f64::min);
        for (i, x) in vals.iter().enumerate() {
            if !picked.contains(&i) {
                prop_assert!(*x <= min_in);
            }
        }
    }
}

#[test]
fn pair_auc_matches_double_loop_over_runs() {
    let (lib, runs) = synthetic(11, 9, 3, 40);
    let model = PriorModel::planted(-0.3, vec![1.2, -0.4, 0.0], vec!["p0".into(), "p1".into(), "p2".into()]);
    let probs = model.probabilities(&lib);
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for run in runs.runs() {
        for (m, b) in run.bits.iter().enumerate() {
            scores.push(probs[m]);
            labels.push(*b);
        }
    }
    let expected = brute_auc(&scores, &labels).unwrap();
    assert!((pair_auc(&model, &runs, &lib).unwrap() - expected).abs() < 1e-12);
}

/// Direct minimization of the two-parameter objective by repeated grid
/// zooming, used as the reference for the solver.
fn grid_minimum(runs: &RunMatrix, lib: &PredicateLibrary, r: f64) -> (f64, f64, f64) {
    let f = |b: f64, w: f64| objective_at(runs, lib, r, b, &[w]);
    let (mut cb, mut cw, mut span) = (0.0, 0.0, 8.0);
    for _ in 0..40 {
        let mut best = (f(cb, cw), cb, cw);
        for i in -10..=10 {
            for j in -10..=10 {
                let (b, w) = (cb + span * i as f64 / 10.0, cw + span * j as f64 / 10.0);
                let v = f(b, w);
                if v < best.0 {
                    best = (v, b, w);
                }
            }
        }
        // Also try the kink at w = 0.
        for i in -10..=10 {
            let b = cb + span * i as f64 / 10.0;
            if f(b, 0.0) < best.0 {
                best = (f(b, 0.0), b, 0.0);
            }
        }
        (cb, cw) = (best.1, best.2);
        span *= 0.5;
    }
    (f(cb, cw), cb, cw)
}

#[test]
fn one_predicate_fit_matches_grid_search() {
    for (seed, r) in [(1, 0.05), (2, 0.5), (3, 5.0), (4, 0.01)] {
        let (lib, runs) = synthetic(seed, 7, 1, 30);
        let model = fit(&runs, &lib, r).unwrap();
        let (fmin, b, w) = grid_minimum(&runs, &lib, r);
        assert!(model.objective <= fmin + 1e-9, "seed {seed}: {} > {fmin}", model.objective);
        assert!((model.objective - fmin).abs() < 1e-6);
        assert!((model.intercept - b).abs() < 1e-4 && (model.weights[0] - w).abs() < 1e-4);
    }
}

/// Subgradient optimality of a fitted model, checked from the raw counts.
fn assert_kkt(model: &PriorModel<f64>, runs: &RunMatrix, lib: &PredicateLibrary, r: f64) {
    let (k, n) = runs.successes();
    let total = (n as usize * lib.endpoints()) as f64;
    let z = model.linear_predictor(lib);
    let resid: Vec<f64> = (0..lib.endpoints()).map(|m| (n as f64 * sigmoid(z[m]) - k[m] as f64) / total).collect();
    let grad_b: f64 = resid.iter().sum();
    assert!(grad_b.abs() < 1e-6, "intercept gradient {grad_b}");
    let lam = 1.0 / (r * total);
    for j in 0..lib.len() {
        let g: f64 = (0..lib.endpoints()).filter(|&m| lib.feature(m, j)).map(|m| resid[m]).sum();
        let w = model.weights[j];
        if w == 0.0 {
            assert!(g.abs() <= lam + 1e-6, "j={j}: |{g}| > {lam}");
        } else {
            assert!((g + lam * w.signum()).abs() < 1e-6, "j={j}: {g} vs {}", -lam * w.signum());
        }
    }
}

#[test]
fn fits_satisfy_optimality_conditions() {
    for seed in 0..6 {
        let (lib, runs) = synthetic(100 + seed, 12, 5, 60);
        for r in [0.01, 0.1, 1.0, 10.0] {
            let model = fit(&runs, &lib, r).unwrap();
            assert_kkt(&model, &runs, &lib, r);
        }
    }
}

#[test]
fn l1_norm_grows_along_the_path() {
    for seed in 0..4 {
        let (lib, runs) = synthetic(200 + seed, 12, 5, 60);
        let norms: Vec<f64> = [0.01f64, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|r| fit(&runs, &lib, *r).unwrap().weights.iter().map(|w: &f64| w.abs()).sum())
            .collect();
        for pair in norms.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-6, "seed {seed}: {norms:?}");
        }
    }
}

#[test]
fn singleton_grid_and_fold_errors() {
    let (lib, runs) = synthetic(5, 8, 3, 12);
    let sel = select_model(&runs, &lib, &[0.5], &SelectOptions::default()).unwrap();
    assert_eq!(sel.chosen, 0.5);
    assert_eq!(sel.cv_table.len(), 1);
    let (lib, few) = synthetic(6, 8, 3, 3);
    assert_eq!(
        select_model(&few, &lib, &[0.5], &SelectOptions::default()),
        Err(PriorError::FoldCount { runs: 3, folds: 5 })
    );
    assert!(select_model::<f64>(&runs, &lib, &[], &SelectOptions::default()).is_err());
}

#[test]
fn permutation_test_is_deterministic_and_bounded() {
    let (lib, runs) = synthetic(9, 10, 3, 30);
    let opts = PermutationOptions {
        n_perm: 19,
        seed: 42,
        k: 3,
        ..PermutationOptions::default()
    };
    let grid = [0.1, 1.0];
    let a = permutation_test(&runs, &lib, &grid, &opts).unwrap();
    let b = permutation_test(&runs, &lib, &grid, &opts).unwrap();
    assert_eq!(a, b);
    for p in [a.p_auc, a.p_topk, a.p_spearman] {
        assert!((1.0 / 20.0..=1.0).contains(&p));
    }
    let too_few = PermutationOptions { n_perm: 18, ..opts };
    assert!(matches!(
        permutation_test(&runs, &lib, &grid, &too_few),
        Err(PriorError::InvalidArgument(_))
    ));
}
