//! Direction keys: classification and compilation into constraint sets.
//!
//! A key is matched against a small pattern table: a direction word
//! ("cheaper", "faster", ...) optionally followed by an attribute phrase.
//! A named attribute yields one hard clause against the current endpoint;
//! a bare direction yields the weighted soft clauses configured for that
//! word. No-feedback keys yield the empty set.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;
use thiserror::Error;

use crate::scalar::{cast, Weight};
use crate::zoo::{nearest_rank, Endpoint, Zoo};

pub const DEFAULT_COMPILER_TOML: &str = include_str!("../data/compiler.toml");

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("unrecognized direction key `{0}`")]
    Unrecognized(String),
    #[error("unknown attribute phrase `{0}`")]
    UnknownPhrase(String),
    #[error("attribute `{0}` is not in the zoo schema")]
    UnknownAttribute(String),
    #[error("invalid compiler config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KeyKind {
    /// No feedback.
    Nf,
    /// Language feedback naming a precise attribute.
    LfPd,
    /// Language feedback stating only a general direction.
    LfGd,
    Unrecognized,
}

impl KeyKind {
    pub fn label(self) -> &'static str {
        match self {
            KeyKind::Nf => "NF",
            KeyKind::LfPd => "LF-PD",
            KeyKind::LfGd => "LF-GD",
            KeyKind::Unrecognized => "UNRECOGNIZED",
        }
    }
}

impl fmt::Display for KeyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A classified direction key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionKey {
    pub raw: String,
    pub kind: KeyKind,
    /// Matched direction word, for LF keys.
    pub direction: Option<String>,
    /// Attribute phrase following the direction word, for LF-PD keys.
    pub phrase: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

/// Right-hand side of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// The same attribute of the current endpoint.
    Current,
    /// Nearest-rank quantile of the attribute over the whole zoo.
    Quantile(f64),
    /// Nearest-rank quantile over endpoints sharing the candidate's value of
    /// `group_by`.
    TierQuantile { group_by: String, q: f64 },
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub attribute: String,
    pub relation: Relation,
    pub reference: Reference,
}

impl Comparison {
    pub fn new(attribute: impl Into<String>, relation: Relation, reference: Reference) -> Self {
        Comparison {
            attribute: attribute.into(),
            relation,
            reference,
        }
    }

    fn holds(&self, candidate: &Endpoint, current: Option<&Endpoint>, zoo: &Zoo) -> bool {
        let Some(k) = zoo.attr_index(&self.attribute) else {
            return false;
        };
        let Some(lhs) = candidate.value(k).as_f64() else {
            return false;
        };
        let rhs = match &self.reference {
            Reference::Current => current.and_then(|c| c.value(k).as_f64()),
            Reference::Quantile(q) => zoo.attribute_quantile(&self.attribute, *q).ok(),
            Reference::TierQuantile { group_by, q } => tier_quantile(zoo, candidate, k, group_by, *q),
            Reference::Constant(c) => Some(*c),
        };
        rhs.is_some_and(|rhs| self.relation.holds(lhs, rhs))
    }
}

fn tier_quantile(zoo: &Zoo, candidate: &Endpoint, k: usize, group_by: &str, q: f64) -> Option<f64> {
    let g = zoo.attr_index(group_by)?;
    let tier = candidate.value(g).as_f64()?;
    let mut col: Vec<f64> = zoo
        .endpoints()
        .iter()
        .filter(|ep| ep.value(g).as_f64() == Some(tier))
        .filter_map(|ep| ep.value(k).as_f64())
        .collect();
    col.sort_by(f64::total_cmp);
    nearest_rank(&col, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    /// Reads only the candidate.
    Unary,
    /// Compares the candidate with the current endpoint.
    Binary,
}

/// A conjunction of attribute comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub name: String,
    pub comparisons: Vec<Comparison>,
}

impl Predicate {
    pub fn new(name: impl Into<String>, comparisons: Vec<Comparison>) -> Self {
        Predicate {
            name: name.into(),
            comparisons,
        }
    }

    pub fn arity(&self) -> Arity {
        if self
            .comparisons
            .iter()
            .any(|c| c.reference == Reference::Current)
        {
            Arity::Binary
        } else {
            Arity::Unary
        }
    }

    /// Attributes the predicate reads.
    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.comparisons.iter().flat_map(|c| {
            let group = match &c.reference {
                Reference::TierQuantile { group_by, .. } => Some(group_by.as_str()),
                _ => None,
            };
            std::iter::once(c.attribute.as_str()).chain(group)
        })
    }

    /// Whether every comparison holds. Total: unknown attributes, missing
    /// values and an absent current endpoint all make a comparison false.
    pub fn eval(&self, candidate: &Endpoint, current: Option<&Endpoint>, zoo: &Zoo) -> bool {
        self.comparisons
            .iter()
            .all(|c| c.holds(candidate, current, zoo))
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.comparisons.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            let rel = c.relation.symbol();
            match &c.reference {
                Reference::Current => {
                    write!(f, "{a}(candidate) {rel} {a}(current)", a = c.attribute)?
                }
                Reference::Quantile(q) => write!(f, "{a} {rel} q{q}({a})", a = c.attribute)?,
                Reference::TierQuantile { group_by, q } => {
                    write!(f, "{a} {rel} q{q}({a} | {group_by})", a = c.attribute)?
                }
                Reference::Constant(v) => write!(f, "{} {rel} {v}", c.attribute)?,
            }
        }
        Ok(())
    }
}

/// `eval_predicate(p, candidate, current, zoo)` as a free function.
pub fn eval_predicate(p: &Predicate, candidate: &Endpoint, current: Option<&Endpoint>, zoo: &Zoo) -> bool {
    p.eval(candidate, current, zoo)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// User-facing shortlist: budget and size penalty active.
    Shortlist,
    /// Every hard-satisfying endpoint is selected; no budget, no penalty.
    Completeness,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Shortlist => "SHORTLIST",
            Mode::Completeness => "COMPLETENESS",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftClause<W> {
    pub predicate: Predicate,
    pub weight: W,
}

/// Hard clauses, weighted soft clauses, budget and size penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet<W> {
    pub hard: Vec<Predicate>,
    pub soft: Vec<SoftClause<W>>,
    pub budget_low: usize,
    pub budget_high: usize,
    pub penalty: W,
    pub mode: Mode,
}

impl<W: Weight> ConstraintSet<W> {
    pub fn is_vacuous(&self) -> bool {
        self.hard.is_empty() && self.soft.is_empty()
    }
}

impl<W: Weight> fmt::Display for ConstraintSet<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: {}", self.mode)?;
        if self.hard.is_empty() {
            writeln!(f, "hard: (none)")?;
        }
        for p in &self.hard {
            writeln!(f, "hard: {p}")?;
        }
        if self.soft.is_empty() {
            writeln!(f, "soft: (none)")?;
        }
        for s in &self.soft {
            writeln!(f, "soft: {}  w={:?}", s.predicate, s.weight)?;
        }
        writeln!(f, "budget: {} <= |C| <= {}", self.budget_low, self.budget_high)?;
        write!(f, "penalty: {:?}", self.penalty)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoftDefault {
    pub attribute: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionRule {
    pub word: String,
    pub relation: Relation,
    pub baseline: String,
    #[serde(default)]
    pub soft: Vec<SoftDefault>,
}

/// Pattern table, lexicon and default weights. See `data/compiler.toml`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompilerConfig {
    pub nf_tokens: Vec<String>,
    #[serde(default)]
    pub generic_nouns: Vec<String>,
    #[serde(default)]
    pub filler_words: Vec<String>,
    pub penalty: f64,
    pub budget_low: usize,
    #[serde(default)]
    pub nf_budget_low: usize,
    #[serde(default)]
    pub budget_high: Option<usize>,
    pub lexicon: BTreeMap<String, String>,
    #[serde(rename = "direction")]
    pub directions: Vec<DirectionRule>,
}

impl CompilerConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CompileError> {
        let cfg: CompilerConfig =
            toml::from_str(text).map_err(|e| CompileError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CompileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CompileError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn validate(&self) -> Result<(), CompileError> {
        if !(self.penalty.is_finite() && self.penalty >= 0.0) {
            return Err(CompileError::Config(format!("penalty {} must be >= 0", self.penalty)));
        }
        if let Some(high) = self.budget_high {
            if high < self.budget_low || high < self.nf_budget_low {
                return Err(CompileError::Config(format!(
                    "budget_high {high} is below a lower budget"
                )));
            }
        }
        for rule in &self.directions {
            if normalize(&rule.word).is_empty() {
                return Err(CompileError::Config("empty direction word".to_string()));
            }
            if let Some(s) = rule.soft.iter().find(|s| !(s.weight.is_finite() && s.weight >= 0.0)) {
                return Err(CompileError::Config(format!(
                    "weight {} for `{}` must be >= 0",
                    s.weight, s.attribute
                )));
            }
        }
        Ok(())
    }

    /// Human-readable list of accepted key forms.
    pub fn accepted_forms(&self) -> String {
        let words: Vec<&str> = self.directions.iter().map(|d| d.word.as_str()).collect();
        let phrases: Vec<&str> = self.lexicon.keys().map(String::as_str).collect();
        format!(
            "no feedback: {:?}\ndirection words: {}\nattribute phrases: {}\nexamples: \"I want a cheaper model.\", \"I want a model with cheaper output prices.\"",
            self.nf_tokens,
            words.join(", "),
            phrases.join(", ")
        )
    }
}

impl Default for CompilerConfig {
    fn default() -> Self {
        static DEFAULT: OnceLock<CompilerConfig> = OnceLock::new();
        DEFAULT
            .get_or_init(|| {
                CompilerConfig::from_toml_str(DEFAULT_COMPILER_TOML).expect("bundled compiler config")
            })
            .clone()
    }
}

/// Lower-case, collapse whitespace, straighten apostrophes and strip
/// trailing punctuation.
pub fn normalize(raw: &str) -> String {
    let text = raw.replace(['\u{2019}', '\u{2018}'], "'").to_lowercase();
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_end_matches(|c: char| matches!(c, '.' | '!' | '?' | ',' | ';') || c.is_whitespace())
        .to_string()
}

/// Classifies and compiles direction keys against a config.
#[derive(Debug, Clone, Default)]
pub struct Compiler {
    config: CompilerConfig,
}

impl Compiler {
    pub fn new(config: CompilerConfig) -> Self {
        Compiler { config }
    }

    pub fn config(&self) -> &CompilerConfig {
        &self.config
    }

    pub fn classify(&self, raw: &str) -> DirectionKey {
        let norm = normalize(raw);
        let unrecognized = || DirectionKey {
            raw: raw.to_string(),
            kind: KeyKind::Unrecognized,
            direction: None,
            phrase: None,
        };
        if self.config.nf_tokens.iter().any(|t| normalize(t) == norm) {
            return DirectionKey {
                raw: raw.to_string(),
                kind: KeyKind::Nf,
                direction: None,
                phrase: None,
            };
        }

        let words: Vec<&str> = norm.split(' ').collect();
        // Earliest match wins; on equal position the longer direction word.
        let mut best: Option<(usize, usize, &DirectionRule)> = None;
        for rule in &self.config.directions {
            let pattern = normalize(&rule.word);
            let pattern: Vec<&str> = pattern.split(' ').collect();
            if let Some(pos) = words.windows(pattern.len()).position(|w| w == pattern.as_slice()) {
                let better = match best {
                    None => true,
                    Some((p, len, _)) => pos < p || (pos == p && pattern.len() > len),
                };
                if better {
                    best = Some((pos, pattern.len(), rule));
                }
            }
        }
        let Some((pos, len, rule)) = best else {
            return unrecognized();
        };

        let rest: Vec<&str> = words[pos + len..]
            .iter()
            .copied()
            .skip_while(|w| self.config.filler_words.iter().any(|f| f == w))
            .collect();
        let phrase = rest.join(" ");
        let generic = phrase.is_empty() || self.config.generic_nouns.contains(&phrase);
        DirectionKey {
            raw: raw.to_string(),
            kind: if generic { KeyKind::LfGd } else { KeyKind::LfPd },
            direction: Some(rule.word.clone()),
            phrase: (!generic).then_some(phrase),
        }
    }

    fn rule(&self, key: &DirectionKey) -> Result<&DirectionRule, CompileError> {
        let word = key
            .direction
            .as_deref()
            .ok_or_else(|| CompileError::Unrecognized(key.raw.clone()))?;
        self.config
            .directions
            .iter()
            .find(|r| r.word == word)
            .ok_or_else(|| CompileError::Unrecognized(key.raw.clone()))
    }

    fn resolve_phrase<'a>(&'a self, phrase: &str, zoo: &Zoo) -> Result<&'a str, CompileError> {
        let attr = self
            .config
            .lexicon
            .get(phrase)
            .ok_or_else(|| CompileError::UnknownPhrase(phrase.to_string()))?;
        zoo.attr_index(attr)
            .ok_or_else(|| CompileError::UnknownAttribute(attr.clone()))?;
        Ok(attr)
    }

    fn comparison_predicate(rule: &DirectionRule, attr: &str) -> Predicate {
        Predicate::new(
            format!("{}_{}", slug(&rule.word), slug(attr)),
            vec![Comparison::new(attr, rule.relation, Reference::Current)],
        )
    }

    /// Compiles a classified key. Weights and penalty come from the config.
    pub fn compile<W: Weight>(
        &self,
        key: &DirectionKey,
        zoo: &Zoo,
        mode: Mode,
    ) -> Result<ConstraintSet<W>, CompileError> {
        let m = zoo.len();
        let (hard, soft) = match key.kind {
            KeyKind::Unrecognized => return Err(CompileError::Unrecognized(key.raw.clone())),
            KeyKind::Nf => (Vec::new(), Vec::new()),
            KeyKind::LfPd => {
                let rule = self.rule(key)?;
                let phrase = key.phrase.as_deref().unwrap_or_default();
                let attr = self.resolve_phrase(phrase, zoo)?;
                (vec![Self::comparison_predicate(rule, attr)], Vec::new())
            }
            KeyKind::LfGd => {
                let rule = self.rule(key)?;
                let soft = rule
                    .soft
                    .iter()
                    .map(|s| {
                        zoo.attr_index(&s.attribute)
                            .ok_or_else(|| CompileError::UnknownAttribute(s.attribute.clone()))?;
                        Ok(SoftClause {
                            predicate: Self::comparison_predicate(rule, &s.attribute),
                            weight: cast(s.weight),
                        })
                    })
                    .collect::<Result<Vec<_>, CompileError>>()?;
                (Vec::new(), soft)
            }
        };

        let (budget_low, budget_high, penalty) = match mode {
            Mode::Completeness => (0, m, W::zero()),
            Mode::Shortlist => {
                let low = if key.kind == KeyKind::Nf {
                    self.config.nf_budget_low
                } else {
                    self.config.budget_low
                };
                let high = self.config.budget_high.unwrap_or(m).min(m);
                (low.min(high), high, cast(self.config.penalty))
            }
        };
        Ok(ConstraintSet {
            hard,
            soft,
            budget_low,
            budget_high,
            penalty,
            mode,
        })
    }

    /// Ground-truth target predicate `T(d)`: the named attribute for LF-PD
    /// keys, the direction's baseline attribute for LF-GD keys, `None` for
    /// no-feedback keys.
    pub fn target_predicate(&self, key: &DirectionKey, zoo: &Zoo) -> Result<Option<Predicate>, CompileError> {
        match key.kind {
            KeyKind::Nf => Ok(None),
            KeyKind::Unrecognized => Err(CompileError::Unrecognized(key.raw.clone())),
            KeyKind::LfPd => {
                let rule = self.rule(key)?;
                let attr = self.resolve_phrase(key.phrase.as_deref().unwrap_or_default(), zoo)?;
                Ok(Some(Self::comparison_predicate(rule, attr)))
            }
            KeyKind::LfGd => {
                let rule = self.rule(key)?;
                zoo.attr_index(&rule.baseline)
                    .ok_or_else(|| CompileError::UnknownAttribute(rule.baseline.clone()))?;
                Ok(Some(Self::comparison_predicate(rule, &rule.baseline)))
            }
        }
    }
}

fn slug(s: &str) -> String {
    s.to_lowercase()
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

/// Classifies with the bundled config.
pub fn classify(raw: &str) -> DirectionKey {
    Compiler::default().classify(raw)
}

/// Compiles with the bundled config.
pub fn compile<W: Weight>(key: &DirectionKey, zoo: &Zoo, mode: Mode) -> Result<ConstraintSet<W>, CompileError> {
    Compiler::default().compile(key, zoo, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::bundled_zoo;

    #[test]
    fn classifies_reference_keys() {
        assert_eq!(classify("NONE.").kind, KeyKind::Nf);
        assert_eq!(classify("NONE").kind, KeyKind::Nf);
        assert_eq!(classify("").kind, KeyKind::Nf);
        assert_eq!(classify("  none!! ").kind, KeyKind::Nf);
        assert_eq!(classify("I don’t have any feedback").kind, KeyKind::Nf);
        let pd = classify("I want a model with cheaper cached input.");
        assert_eq!(pd.kind, KeyKind::LfPd);
        assert_eq!(pd.phrase.as_deref(), Some("cached input"));
        assert_eq!(classify("I want a model with cheaper output prices.").kind, KeyKind::LfPd);
        let gd = classify("I want a cheaper model.");
        assert_eq!(gd.kind, KeyKind::LfGd);
        assert_eq!(gd.direction.as_deref(), Some("cheaper"));
        assert_eq!(classify("I want a model that is cheaper").kind, KeyKind::LfGd);
        assert_eq!(classify("surprise me").kind, KeyKind::Unrecognized);
    }

    #[test]
    fn classification_ignores_case_and_trailing_punctuation() {
        let a = classify("I WANT A CHEAPER MODEL!!");
        let b = classify("i want a cheaper model");
        assert_eq!(a.kind, b.kind);
        assert_eq!(a.direction, b.direction);
    }

    #[test]
    fn multiword_direction_preferred() {
        let k = classify("I want a more expensive model");
        assert_eq!(k.direction.as_deref(), Some("more expensive"));
        assert_eq!(k.kind, KeyKind::LfGd);
    }

    #[test]
    fn nf_compiles_vacuous_in_both_modes() {
        let zoo = bundled_zoo();
        for mode in [Mode::Shortlist, Mode::Completeness] {
            let cs: ConstraintSet<f64> = compile(&classify("NONE"), &zoo, mode).unwrap();
            assert!(cs.is_vacuous());
        }
    }

    #[test]
    fn pd_compiles_one_hard_clause() {
        let zoo = bundled_zoo();
        let key = classify("I want a model with cheaper output prices.");
        let cs: ConstraintSet<f64> = compile(&key, &zoo, Mode::Completeness).unwrap();
        assert_eq!(cs.hard.len(), 1);
        assert!(cs.soft.is_empty());
        assert_eq!(cs.penalty, 0.0);
        assert_eq!((cs.budget_low, cs.budget_high), (0, 25));
        let c = &cs.hard[0].comparisons[0];
        assert_eq!(c.attribute, "Output Price");
        assert_eq!(c.relation, Relation::Lt);
        assert_eq!(c.reference, Reference::Current);
        assert_eq!(cs.hard[0].arity(), Arity::Binary);
    }

    #[test]
    fn gd_compiles_default_weights() {
        let zoo = bundled_zoo();
        let cs: ConstraintSet<f64> =
            compile(&classify("I want a cheaper model."), &zoo, Mode::Shortlist).unwrap();
        assert!(cs.hard.is_empty());
        let got: Vec<(&str, f64)> = cs
            .soft
            .iter()
            .map(|s| (s.predicate.comparisons[0].attribute.as_str(), s.weight))
            .collect();
        assert_eq!(
            got,
            vec![("Output Price", 1.0), ("Input Price", 1.0), ("Cached Price", 0.5)]
        );
        assert_eq!((cs.budget_low, cs.budget_high), (1, 25));
        assert_eq!(cs.penalty, 0.25);
    }

    #[test]
    fn unknown_phrase_and_unrecognized_are_errors() {
        let zoo = bundled_zoo();
        let err = compile::<f64>(&classify("I want a model with cheaper vibes"), &zoo, Mode::Shortlist);
        assert!(matches!(err, Err(CompileError::UnknownPhrase(p)) if p == "vibes"));
        let err = compile::<f64>(&classify("what is this"), &zoo, Mode::Shortlist);
        assert!(matches!(err, Err(CompileError::Unrecognized(r)) if r == "what is this"));
    }

    #[test]
    fn eval_examples_on_bundled_zoo() {
        let zoo = bundled_zoo();
        let key = classify("I want a model with cheaper output prices.");
        let p = &compile::<f64>(&key, &zoo, Mode::Completeness).unwrap().hard[0];
        let gpt4 = zoo.endpoint(11).unwrap();
        let o3 = zoo.endpoint(23).unwrap();
        assert!(p.eval(o3, Some(gpt4), &zoo));
        assert!(!p.eval(gpt4, Some(gpt4), &zoo));
        assert!(!p.eval(o3, None, &zoo));

        let cached = classify("I want a model with cheaper cached input.");
        let p = &compile::<f64>(&cached, &zoo, Mode::Completeness).unwrap().hard[0];
        let gpt41 = zoo.endpoint(2).unwrap();
        let chatgpt4o = zoo.endpoint(1).unwrap();
        assert!(!p.eval(chatgpt4o, Some(gpt41), &zoo));
        // A missing current value also fails.
        assert!(!p.eval(gpt41, Some(chatgpt4o), &zoo));
    }

    #[test]
    fn quantile_references() {
        let zoo = bundled_zoo();
        let is_max = Predicate::new(
            "int_is_max",
            vec![Comparison::new("Intelligence", Relation::Ge, Reference::Quantile(1.0))],
        );
        assert_eq!(is_max.arity(), Arity::Unary);
        let hits: Vec<usize> = zoo
            .endpoints()
            .iter()
            .filter(|e| is_max.eval(e, None, &zoo))
            .map(|e| e.id)
            .collect();
        assert_eq!(hits, vec![23]);
    }

    #[test]
    fn config_rejects_negative_weights() {
        let text = DEFAULT_COMPILER_TOML.replace("weight = 0.5", "weight = -0.5");
        assert!(matches!(
            CompilerConfig::from_toml_str(&text),
            Err(CompileError::Config(_))
        ));
    }

    #[test]
    fn config_is_extensible() {
        let text = DEFAULT_COMPILER_TOML.replace("\"no feedback\",", "\"no feedback\", \"whatever\",");
        let c = Compiler::new(CompilerConfig::from_toml_str(&text).unwrap());
        assert_eq!(c.classify("Whatever.").kind, KeyKind::Nf);
    }

    #[test]
    fn predicate_display() {
        let zoo = bundled_zoo();
        let key = classify("I want a model with cheaper output prices.");
        let cs: ConstraintSet<f64> = compile(&key, &zoo, Mode::Completeness).unwrap();
        assert_eq!(
            cs.hard[0].to_string(),
            "Output Price(candidate) < Output Price(current)"
        );
    }
}
