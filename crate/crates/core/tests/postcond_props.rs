use clauseroute::postcond::{classify, coverage_precision, process_mask, tally_outcomes, Label, MetricError};
use proptest::prelude::*;

/// Independent reading of the normalization rule: collect the binary
/// tokens by hand, then pad or cut.
fn oracle(raw: &str, m: usize) -> (Vec<bool>, bool) {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for ch in raw.chars().chain(std::iter::once(' ')) {
        if ch.is_whitespace() {
            if !cur.is_empty() {
                tokens.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(ch);
        }
    }
    let binary: Vec<bool> = tokens.iter().filter(|t| *t == "0" || *t == "1").map(|t| t == "1").collect();
    let fail = binary.len() != tokens.len() || binary.len() != m;
    let mut bits: Vec<bool> = binary.into_iter().take(m).collect();
    bits.resize(m, false);
    (bits, fail)
}

fn reply_token() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => Just("0".to_string()),
        4 => Just("1".to_string()),
        1 => Just("10".to_string()),
        1 => Just("2".to_string()),
        1 => Just("1,".to_string()),
        1 => "[a-z]{1,4}",
    ]
}

fn reply() -> impl Strategy<Value = String> {
    (
        prop::collection::vec(reply_token(), 0..40),
        prop::collection::vec(prop_oneof![Just(" "), Just("  "), Just("\n"), Just("\t")], 40),
    )
        .prop_map(|(toks, seps)| {
            let mut s = String::new();
            for (t, sep) in toks.iter().zip(seps.iter().cycle()) {
                s.push_str(t);
                s.push_str(sep);
            }
            s
        })
}

proptest! {
    #[test]
    fn processing_is_total_and_matches_oracle(raw in reply(), m in 1usize..30) {
        let mask = process_mask(&raw, m);
        prop_assert_eq!(mask.len(), m);
        let (bits, fail) = oracle(&raw, m);
        prop_assert_eq!(&mask.bits, &bits);
        prop_assert_eq!(mask.fail_flag, fail);
    }

    #[test]
    fn arbitrary_text_never_panics(raw in ".{0,200}", m in 1usize..30) {
        let mask = process_mask(&raw, m);
        prop_assert_eq!(mask.len(), m);
    }

    #[test]
    fn labels_partition_by_count(bits in prop::collection::vec(any::<bool>(), 2..40)) {
        let m = bits.len();
        let c = bits.iter().filter(|b| **b).count();
        let label = Label::of_count(c, m);
        let expected = match c {
            0 => Label::Zero,
            1 => Label::One,
            _ if c == m => Label::All,
            _ => Label::CaseS,
        };
        prop_assert_eq!(label, expected);
        // Exactly one label holds.
        let holds = [c == 0, c == 1, c == m && c > 1, c > 1 && c < m];
        prop_assert_eq!(holds.iter().filter(|h| **h).count(), 1);
    }

    #[test]
    fn failed_replies_still_get_a_label(raw in reply(), m in 1usize..30) {
        let mask = process_mask(&raw, m);
        let post = classify(&mask);
        prop_assert_eq!(post.label, Label::of_count(mask.count(), m));
        prop_assert_eq!(post.fail_flag, mask.fail_flag);
    }

    #[test]
    fn coverage_and_precision_bounds(
        pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..40)
    ) {
        let (chosen, target): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
        match coverage_precision::<f64>(&chosen, &target) {
            Err(MetricError::EmptyTarget) => prop_assert!(target.iter().all(|t| !t)),
            Err(e) => prop_assert!(false, "unexpected {e}"),
            Ok(cp) => {
                prop_assert!((0.0..=1.0).contains(&cp.coverage));
                if let Some(p) = cp.precision {
                    prop_assert!((0.0..=1.0).contains(&p));
                }
                prop_assert_eq!(cp.precision.is_none(), chosen.iter().all(|c| !c));
                // Selecting exactly the target is perfect on both.
                let perfect = coverage_precision::<f64>(&target, &target).unwrap();
                prop_assert_eq!(perfect.coverage, 1.0);
                prop_assert_eq!(perfect.precision, Some(1.0));
            }
        }
    }
}

#[test]
fn coverage_length_mismatch_is_an_error() {
    assert_eq!(
        coverage_precision::<f64>(&[true], &[true, false]),
        Err(MetricError::LengthMismatch { mask: 1, target: 2 })
    );
}

#[test]
fn tally_percentages_sum_to_one_hundred() {
    let runs: Vec<(&str, _)> = (0..37)
        .map(|i| {
            let bits: Vec<bool> = (0..5).map(|j| j < i % 6).collect();
            ("NONE", classify(&clauseroute::postcond::OutputMask::from_bits(bits)))
        })
        .collect();
    let table = tally_outcomes(runs);
    let row = table.row("NONE").unwrap();
    assert_eq!(row.total(), 37);
    let sum: f64 = Label::ALL_LABELS.iter().map(|l| row.percent(*l)).sum();
    assert!((sum - 100.0).abs() < 1e-9);
}
