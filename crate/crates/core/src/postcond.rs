//! Output masks, postcondition labels and coverage/precision metrics.
//!
//! Raw agent replies are normalized before anything reads them: every
//! whitespace-delimited token that is exactly `0` or `1` is kept, the
//! result is zero-padded or truncated to `M`, and any deviation from the
//! required format sets `fail_flag`. Labels read only the normalized bits,
//! so a failed reply still lands in Zero, One, Case S or All.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Weight;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputMask {
    pub bits: Vec<bool>,
    /// The reply violated the `M` binary tokens format.
    pub fail_flag: bool,
    /// Binary tokens found before padding or truncation.
    pub source_token_count: usize,
}

impl OutputMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let n = bits.len();
        OutputMask {
            bits,
            fail_flag: false,
            source_token_count: n,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Space-separated `0`/`1` rendering, the agent reply format.
    pub fn to_reply(&self) -> String {
        render_bits(&self.bits)
    }
}

pub fn render_bits(bits: &[bool]) -> String {
    let mut s = String::with_capacity(bits.len() * 2);
    for (i, b) in bits.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push(if *b { '1' } else { '0' });
    }
    s
}

/// Applies the mask processing rules to a raw reply.
pub fn process_mask(raw: &str, m: usize) -> OutputMask {
    let mut bits = Vec::with_capacity(m);
    let mut extracted = 0usize;
    let mut non_binary = false;
    for tok in raw.split_whitespace() {
        match tok {
            "0" | "1" => {
                extracted += 1;
                if bits.len() < m {
                    bits.push(tok == "1");
                }
            }
            _ => non_binary = true,
        }
    }
    bits.resize(m, false);
    OutputMask {
        bits,
        fail_flag: non_binary || extracted != m,
        source_token_count: extracted,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Label {
    Zero,
    One,
    /// `1 < |C| < M`: Some or Random, undecided until the prior analysis.
    CaseS,
    All,
}

impl Label {
    pub const ALL_LABELS: [Label; 4] = [Label::Zero, Label::One, Label::CaseS, Label::All];

    pub fn name(self) -> &'static str {
        match self {
            Label::Zero => "ZERO",
            Label::One => "ONE",
            Label::CaseS => "CASE_S",
            Label::All => "ALL",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        Label::ALL_LABELS.into_iter().find(|l| l.name() == s)
    }

    /// Cardinality rule, applied in order: 0, 1, M, otherwise Case S.
    pub fn of_count(count: usize, m: usize) -> Label {
        if count == 0 {
            Label::Zero
        } else if count == 1 {
            Label::One
        } else if count == m {
            Label::All
        } else {
            Label::CaseS
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Postcondition {
    pub label: Label,
    pub fail_flag: bool,
}

pub fn classify(mask: &OutputMask) -> Postcondition {
    Postcondition {
        label: Label::of_count(mask.count(), mask.len()),
        fail_flag: mask.fail_flag,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("target set is empty; coverage is undefined")]
    EmptyTarget,
    #[error("mask has {mask} bits but target has {target}")]
    LengthMismatch { mask: usize, target: usize },
}

/// Coverage `|C ∩ T| / |T|` and precision `|C ∩ T| / |C|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveragePrecision<W> {
    pub coverage: W,
    /// `None` when `C` is empty.
    pub precision: Option<W>,
    pub hits: usize,
    pub selected: usize,
    pub target: usize,
}

pub fn coverage_precision<W: Weight>(
    chosen: &[bool],
    target: &[bool],
) -> Result<CoveragePrecision<W>, MetricError> {
    if chosen.len() != target.len() {
        return Err(MetricError::LengthMismatch {
            mask: chosen.len(),
            target: target.len(),
        });
    }
    let t = target.iter().filter(|b| **b).count();
    if t == 0 {
        return Err(MetricError::EmptyTarget);
    }
    let c = chosen.iter().filter(|b| **b).count();
    let hits = chosen.iter().zip(target).filter(|(a, b)| **a && **b).count();
    let ratio = |num: usize, den: usize| -> W {
        W::from_usize(num).expect("count fits") / W::from_usize(den).expect("count fits")
    };
    Ok(CoveragePrecision {
        coverage: ratio(hits, t),
        precision: (c > 0).then(|| ratio(hits, c)),
        hits,
        selected: c,
        target: t,
    })
}

/// Counts per label for one direction key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeRow {
    pub key: String,
    /// Indexed like [`Label::ALL_LABELS`].
    pub counts: [usize; 4],
    /// Runs whose raw reply was fail-flagged (already counted in a label).
    pub failed: usize,
}

impl OutcomeRow {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn count(&self, label: Label) -> usize {
        self.counts[label as usize]
    }

    pub fn percent(&self, label: Label) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            100.0 * self.count(label) as f64 / total as f64
        }
    }

    fn cell(&self, label: Label) -> String {
        match self.count(label) {
            0 => "0".to_string(),
            n => format!("{n} ({:.2}%)", self.percent(label)),
        }
    }
}

/// Outcome counts per key, ordered by key then label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OutcomeTable {
    pub rows: Vec<OutcomeRow>,
}

impl OutcomeTable {
    pub fn row(&self, key: &str) -> Option<&OutcomeRow> {
        self.rows.iter().find(|r| r.key == key)
    }

    /// Layout: key, Zero, One, Case S, All, Count. Non-zero cells carry the
    /// per-key percentage to two decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::from("Direction Key\tZero (%)\tOne (%)\tCase S (%)\tAll (%)\tCount\tFail\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.key,
                r.cell(Label::Zero),
                r.cell(Label::One),
                r.cell(Label::CaseS),
                r.cell(Label::All),
                r.total(),
                r.failed
            );
        }
        out
    }
}

pub fn tally_outcomes<'a, I>(runs: I) -> OutcomeTable
where
    I: IntoIterator<Item = (&'a str, Postcondition)>,
{
    let mut by_key: BTreeMap<&str, OutcomeRow> = BTreeMap::new();
    for (key, post) in runs {
        let row = by_key.entry(key).or_insert_with(|| OutcomeRow {
            key: key.to_string(),
            counts: [0; 4],
            failed: 0,
        });
        row.counts[post.label as usize] += 1;
        row.failed += usize::from(post.fail_flag);
    }
    OutcomeTable {
        rows: by_key.into_values().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn pads_short_replies() {
        let m = process_mask("1 0 1", 5);
        assert_eq!(m.bits, bits("10100"));
        assert!(m.fail_flag);
        assert_eq!(m.source_token_count, 3);
    }

    #[test]
    fn truncates_long_replies() {
        let raw = vec!["1"; 27].join(" ");
        let m = process_mask(&raw, 25);
        assert_eq!(m.bits, vec![true; 25]);
        assert!(m.fail_flag);
        assert_eq!(classify(&m).label, Label::All);
    }

    #[test]
    fn garbage_is_zero_with_fail() {
        let m = process_mask("no recommendation", 25);
        assert_eq!(m.count(), 0);
        assert!(m.fail_flag);
        assert_eq!(classify(&m).label, Label::Zero);
        assert!(classify(&m).fail_flag);
    }

    #[test]
    fn multi_digit_tokens_are_not_split() {
        let m = process_mask("10 1 0", 2);
        assert_eq!(m.bits, bits("10"));
        assert!(m.fail_flag);
    }

    #[test]
    fn exact_reply_passes() {
        let m = process_mask(" 0 1\n1\t0 ", 4);
        assert_eq!(m.bits, bits("0110"));
        assert!(!m.fail_flag);
        assert_eq!(m.to_reply(), "0 1 1 0");
    }

    #[test]
    fn labels() {
        assert_eq!(Label::of_count(0, 25), Label::Zero);
        assert_eq!(Label::of_count(1, 25), Label::One);
        assert_eq!(Label::of_count(8, 25), Label::CaseS);
        assert_eq!(Label::of_count(25, 25), Label::All);
        assert_eq!(Label::parse("CASE_S"), Some(Label::CaseS));
    }

    #[test]
    fn coverage_precision_examples() {
        let c = bits("1100");
        let t = bits("0111");
        let cp: CoveragePrecision<f64> = coverage_precision(&c, &t).unwrap();
        assert_eq!(cp.coverage, 1.0 / 3.0);
        assert_eq!(cp.precision, Some(0.5));

        let same: CoveragePrecision<f64> = coverage_precision(&t, &t).unwrap();
        assert_eq!((same.coverage, same.precision), (1.0, Some(1.0)));

        let empty: CoveragePrecision<f64> = coverage_precision(&bits("0000"), &t).unwrap();
        assert_eq!(empty.precision, None);
        assert_eq!(empty.coverage, 0.0);

        assert_eq!(
            coverage_precision::<f64>(&c, &bits("0000")),
            Err(MetricError::EmptyTarget)
        );
        assert!(matches!(
            coverage_precision::<f64>(&c, &bits("01")),
            Err(MetricError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn tally_single_run_and_table_one_rows() {
        let post = |label| Postcondition {
            label,
            fail_flag: false,
        };
        let t = tally_outcomes([("x", post(Label::One))]);
        assert_eq!(t.rows[0].percent(Label::One), 100.0);

        let mut runs = Vec::new();
        runs.extend(std::iter::repeat_n(("NONE", post(Label::CaseS)), 101));
        runs.extend(std::iter::repeat_n(("NONE", post(Label::All)), 97));
        runs.extend(std::iter::repeat_n(("NONE.", post(Label::CaseS)), 10));
        runs.extend(std::iter::repeat_n(("NONE.", post(Label::All)), 10));
        let t = tally_outcomes(runs);
        let text = t.to_text();
        assert!(text.contains("NONE\t0\t0\t101 (51.01%)\t97 (48.99%)\t198\t0\n"), "{text}");
        assert!(text.contains("NONE.\t0\t0\t10 (50.00%)\t10 (50.00%)\t20\t0\n"), "{text}");
    }
}
