//! The fixed 19-predicate clause library over endpoint metadata.

use crate::dirkey::{Comparison, Predicate, Reference, Relation};
use crate::zoo::Zoo;

use super::PriorError;

/// Library names in column order.
pub const LIBRARY_NAMES: [&str; 19] = [
    "cached_input_available",
    "reasoning_enabled",
    "cached_and_reasoning",
    "int_ge_4",
    "int_is_max",
    "speed_gt_3",
    "speed_ge_4",
    "cheap_output_global_q0.25",
    "cheap_input_global_q0.25",
    "cheap_output_in_int_tier_q0.25",
    "ctx_ge_median",
    "ctx_ge_p75",
    "maxout_ge_median",
    "maxout_ge_p75",
    "cheap_cached_price_global_q0.25",
    "int_ge_4_and_cached",
    "cached_and_cheap_output_in_tier",
    "int_ge_4_and_cheap_output_in_tier",
    "ctx_p75_and_cached",
];

fn cmp(attr: &str, relation: Relation, reference: Reference) -> Comparison {
    Comparison::new(attr, relation, reference)
}

fn cached() -> Comparison {
    // A listed cached-input price, zero included, means caching is offered.
    cmp("Cached Price", Relation::Ge, Reference::Constant(0.0))
}

fn reasoning() -> Comparison {
    cmp("Reasoning", Relation::Eq, Reference::Constant(1.0))
}

fn int_ge_4() -> Comparison {
    cmp("Intelligence", Relation::Ge, Reference::Constant(4.0))
}

fn cheap_output_in_tier() -> Comparison {
    cmp(
        "Output Price",
        Relation::Le,
        Reference::TierQuantile {
            group_by: "Intelligence".to_string(),
            q: 0.25,
        },
    )
}

fn ctx_ge_p75() -> Comparison {
    cmp("Context Window", Relation::Ge, Reference::Quantile(0.75))
}

/// Predicate definitions, aligned with [`LIBRARY_NAMES`].
///
/// "cheap" means at or below the lower quartile; "ge" thresholds are
/// inclusive. Quantiles are nearest-rank over the whole zoo, except the
/// `in_tier` variants which use the candidate's intelligence group.
pub fn library_predicates() -> Vec<Predicate> {
    use Reference::{Constant, Quantile};
    use Relation::{Ge, Gt, Le};
    let defs: Vec<Vec<Comparison>> = vec![
        vec![cached()],
        vec![reasoning()],
        vec![cached(), reasoning()],
        vec![int_ge_4()],
        vec![cmp("Intelligence", Ge, Quantile(1.0))],
        vec![cmp("Speed", Gt, Constant(3.0))],
        vec![cmp("Speed", Ge, Constant(4.0))],
        vec![cmp("Output Price", Le, Quantile(0.25))],
        vec![cmp("Input Price", Le, Quantile(0.25))],
        vec![cheap_output_in_tier()],
        vec![cmp("Context Window", Ge, Quantile(0.5))],
        vec![ctx_ge_p75()],
        vec![cmp("Max Output", Ge, Quantile(0.5))],
        vec![cmp("Max Output", Ge, Quantile(0.75))],
        vec![cmp("Cached Price", Le, Quantile(0.25))],
        vec![int_ge_4(), cached()],
        vec![cached(), cheap_output_in_tier()],
        vec![int_ge_4(), cheap_output_in_tier()],
        vec![ctx_ge_p75(), cached()],
    ];
    LIBRARY_NAMES
        .iter()
        .zip(defs)
        .map(|(name, comparisons)| Predicate::new(*name, comparisons))
        .collect()
}

/// Predicates plus their materialized `M x J` feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PredicateLibrary {
    predicates: Vec<Predicate>,
    features: Vec<Vec<bool>>,
}

impl PredicateLibrary {
    /// Evaluates `predicates` on every endpoint of `zoo`.
    pub fn new(predicates: Vec<Predicate>, zoo: &Zoo) -> Result<Self, PriorError> {
        for p in &predicates {
            if let Some(attr) = p.attributes().find(|a| zoo.attr_index(a).is_none()) {
                return Err(PriorError::Library {
                    predicate: p.name.clone(),
                    attribute: attr.to_string(),
                });
            }
        }
        let features = zoo
            .endpoints()
            .iter()
            .map(|ep| predicates.iter().map(|p| p.eval(ep, None, zoo)).collect())
            .collect();
        Ok(PredicateLibrary {
            predicates,
            features,
        })
    }

    /// Library built from an explicit feature matrix, for synthetic studies.
    pub fn from_features(names: &[&str], features: Vec<Vec<bool>>) -> Result<Self, PriorError> {
        if let Some(row) = features.iter().find(|r| r.len() != names.len()) {
            return Err(PriorError::InvalidArgument(format!(
                "feature row has {} entries for {} predicates",
                row.len(),
                names.len()
            )));
        }
        Ok(PredicateLibrary {
            predicates: names.iter().map(|n| Predicate::new(*n, Vec::new())).collect(),
            features,
        })
    }

    /// Number of predicates `J`.
    pub fn len(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    /// Number of endpoints `M`.
    pub fn endpoints(&self) -> usize {
        self.features.len()
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn names(&self) -> Vec<&str> {
        self.predicates.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p.name == name)
    }

    /// Row `m` of the feature matrix.
    pub fn row(&self, m: usize) -> &[bool] {
        &self.features[m]
    }

    pub fn feature(&self, m: usize, j: usize) -> bool {
        self.features[m][j]
    }

    pub fn features(&self) -> &[Vec<bool>] {
        &self.features
    }

    pub fn column(&self, j: usize) -> Vec<bool> {
        self.features.iter().map(|r| r[j]).collect()
    }
}

/// Builds the bundled 19-predicate library on `zoo`.
pub fn build_library(zoo: &Zoo) -> Result<PredicateLibrary, PriorError> {
    PredicateLibrary::new(library_predicates(), zoo)
}
