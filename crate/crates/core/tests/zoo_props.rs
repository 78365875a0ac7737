use clauseroute::zoo::{bundled_zoo, load_zoo, nearest_rank};
use proptest::prelude::*;

const NUMERIC: [&str; 6] = [
    "Intelligence",
    "Input Price",
    "Output Price",
    "Context Window",
    "Max Output",
    "Cached Price",
];

/// A zoo CSV holding the bundled rows picked by `keep`, renumbered.
fn subset_csv(keep: &[bool]) -> String {
    let full = bundled_zoo().to_csv();
    let mut lines = full.lines();
    let mut out = format!("{}\n", lines.next().unwrap());
    let mut id = 0;
    for (line, k) in lines.zip(keep) {
        if *k {
            id += 1;
            let rest = line.split_once(',').unwrap().1;
            out.push_str(&format!("{id},{rest}\n"));
        }
    }
    out
}

fn keep_mask() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 25).prop_filter("at least two rows", |k| k.iter().filter(|b| **b).count() >= 2)
}

proptest! {
    #[test]
    fn nearest_rank_matches_integer_rank(mut xs in prop::collection::vec(-1e6..1e6f64, 1..60), pct in 0u32..=100) {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as u32;
        let rank = ((pct * n).div_ceil(100)).max(1) as usize;
        prop_assert_eq!(nearest_rank(&xs, pct as f64 / 100.0), Some(xs[rank - 1]));
    }

    #[test]
    fn quantile_is_monotone(mut xs in prop::collection::vec(-1e3..1e3f64, 1..40), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        xs.sort_by(f64::total_cmp);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(nearest_rank(&xs, lo).unwrap() <= nearest_rank(&xs, hi).unwrap());
    }

    #[test]
    fn csv_round_trip(keep in keep_mask()) {
        let text = subset_csv(&keep);
        let zoo = load_zoo(text.as_bytes()).unwrap();
        prop_assert_eq!(zoo.len(), keep.iter().filter(|b| **b).count());
        let again = load_zoo(zoo.to_csv().as_bytes()).unwrap();
        prop_assert_eq!(&again, &zoo);
        prop_assert_eq!(again.to_csv(), zoo.to_csv());
    }

    #[test]
    fn zoo_quantiles_match_sorted_columns(keep in keep_mask(), pct in 0u32..=100) {
        let zoo = load_zoo(subset_csv(&keep).as_bytes()).unwrap();
        for attr in NUMERIC {
            let mut col: Vec<f64> = zoo
                .endpoints()
                .iter()
                .filter_map(|ep| zoo.value(ep, attr).unwrap().as_f64())
                .collect();
            if col.is_empty() {
                prop_assert!(zoo.attribute_quantile(attr, 0.5).is_err());
                continue;
            }
            col.sort_by(f64::total_cmp);
            let n = col.len() as u32;
            let rank = ((pct * n).div_ceil(100)).max(1) as usize;
            prop_assert_eq!(zoo.attribute_quantile(attr, pct as f64 / 100.0).unwrap(), col[rank - 1]);
        }
    }
}

#[test]
fn rebuilding_the_cache_changes_nothing() {
    let zoo = bundled_zoo();
    let mut again = zoo.clone();
    again.rebuild_cache();
    assert_eq!(again, zoo);
}

#[test]
fn quantile_out_of_range_is_rejected() {
    let zoo = bundled_zoo();
    assert!(zoo.attribute_quantile("Output Price", 1.5).is_err());
    assert!(zoo.attribute_quantile("model", 0.5).is_err());
    assert!(zoo.attribute_quantile("No Such Column", 0.5).is_err());
}
