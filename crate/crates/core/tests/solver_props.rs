use clauseroute::dirkey::Mode;
use clauseroute::solver::{solve, solve_oracle, LitMatrix, MaxSmtInstance};
use num_rational::Ratio;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Raw {
    m: usize,
    hard: Vec<Vec<bool>>,
    soft: Vec<Vec<bool>>,
    weights: Vec<f64>,
    low: usize,
    high: usize,
    penalty: f64,
    mode: Mode,
}

fn raw_instance(max_m: usize) -> impl Strategy<Value = Raw> {
    (1..=max_m, 0..=3usize, 0..=4usize)
        .prop_flat_map(|(m, h, s)| {
            (
                Just(m),
                prop::collection::vec(prop::collection::vec(prop::bool::weighted(0.7), h), m),
                prop::collection::vec(prop::collection::vec(any::<bool>(), s), m),
                prop::collection::vec(0.0..=5.0f64, s),
                (0..=m, 0..=m),
                0.0..=2.0f64,
                prop_oneof![Just(Mode::Shortlist), Just(Mode::Completeness)],
            )
        })
        .prop_map(|(m, hard, soft, weights, (a, b), penalty, mode)| Raw {
            m,
            hard,
            soft,
            weights,
            low: a.min(b),
            high: a.max(b),
            penalty,
            mode,
        })
}

fn build(raw: &Raw) -> MaxSmtInstance<f64> {
    let h = raw.hard.first().map_or(0, Vec::len);
    let s = raw.soft.first().map_or(0, Vec::len);
    MaxSmtInstance::new(
        LitMatrix::from_rows(&raw.hard, h).unwrap(),
        LitMatrix::from_rows(&raw.soft, s).unwrap(),
        raw.weights.clone(),
        raw.low,
        raw.high,
        raw.penalty,
        raw.mode,
    )
    .unwrap()
}

/// Same instance with weights rounded to eighths, as exact rationals.
fn build_exact(raw: &Raw) -> MaxSmtInstance<Ratio<i64>> {
    let q = |x: f64| Ratio::new((x * 8.0).round() as i64, 8);
    let h = raw.hard.first().map_or(0, Vec::len);
    let s = raw.soft.first().map_or(0, Vec::len);
    MaxSmtInstance::new(
        LitMatrix::from_rows(&raw.hard, h).unwrap(),
        LitMatrix::from_rows(&raw.soft, s).unwrap(),
        raw.weights.iter().map(|w| q(*w)).collect(),
        raw.low,
        raw.high,
        q(raw.penalty),
        raw.mode,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn greedy_matches_exhaustive(raw in raw_instance(10)) {
        let inst = build(&raw);
        let fast = solve(&inst);
        let exact = solve_oracle(&inst).unwrap();
        prop_assert_eq!(fast.feasible, exact.feasible);
        if fast.feasible {
            prop_assert!((fast.objective - exact.objective).abs() <= 1e-9);
            prop_assert!(inst.is_feasible(&fast.chosen));
        }
    }

    #[test]
    fn exact_rationals_match_exhaustive(raw in raw_instance(9)) {
        let inst = build_exact(&raw);
        let fast = solve(&inst);
        let exact = solve_oracle(&inst).unwrap();
        prop_assert_eq!(fast.feasible, exact.feasible);
        prop_assert_eq!(fast.objective, exact.objective);
        // Zero utilities and ties may be resolved differently; without
        // them the optimum is unique.
        let u = inst.utilities();
        let mut sorted = u.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() == u.len() && !u.contains(&Ratio::from_integer(0)) {
            prop_assert_eq!(fast.chosen, exact.chosen);
        }
    }

    #[test]
    fn hard_clauses_dominate(raw in raw_instance(12)) {
        let inst = build(&raw);
        let sel = solve(&inst);
        for m in 0..raw.m {
            if sel.chosen[m] {
                prop_assert!(raw.hard[m].iter().all(|b| *b));
            }
        }
        if raw.mode == Mode::Completeness {
            for m in 0..raw.m {
                prop_assert_eq!(sel.chosen[m], inst.hard_ok(m));
            }
        }
    }

    #[test]
    fn larger_penalty_never_grows_the_set(raw in raw_instance(12), extra in 0.0..2.0f64) {
        let mut raw = raw;
        raw.mode = Mode::Shortlist;
        let before = solve(&build(&raw));
        raw.penalty += extra;
        let after = solve(&build(&raw));
        prop_assert_eq!(before.feasible, after.feasible);
        prop_assert!(after.count() <= before.count());
    }

    #[test]
    fn positive_scaling_keeps_selection(raw in raw_instance(12), c in 0.1..10.0f64) {
        let base = solve(&build(&raw));
        let mut scaled = raw.clone();
        scaled.weights.iter_mut().for_each(|w| *w *= c);
        scaled.penalty *= c;
        let sel = solve(&build(&scaled));
        // Utilities tied in the original can separate after rounding; compare
        // objectives rather than sets.
        prop_assert_eq!(base.feasible, sel.feasible);
        if base.feasible {
            let inst = build(&scaled);
            prop_assert!((inst.objective(&base.chosen) - sel.objective).abs() <= 1e-9 * c.max(1.0) * 100.0);
        }
    }

    #[test]
    fn selection_respects_budget(raw in raw_instance(12)) {
        let inst = build(&raw);
        let sel = solve(&inst);
        if sel.feasible && raw.mode == Mode::Shortlist {
            prop_assert!((raw.low..=raw.high).contains(&sel.count()));
        }
        if !sel.feasible {
            prop_assert!(sel.chosen.iter().all(|b| !b));
        }
    }
}
