use std::collections::BTreeMap;

use super::idf::IdfSource;

/// Sparse non-negative term weights with a cached Euclidean norm.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TermVector {
    weights: BTreeMap<String, f64>,
    norm: f64,
}

impl TermVector {
    /// Negative and non-finite weights are clamped to zero.
    pub fn from_weights(weights: BTreeMap<String, f64>) -> TermVector {
        let weights: BTreeMap<String, f64> = weights
            .into_iter()
            .map(|(t, w)| (t, if w.is_finite() && w > 0.0 { w } else { 0.0 }))
            .collect();
        let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        TermVector { weights, norm }
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn weight(&self, term: &str) -> f64 {
        self.weights.get(term).copied().unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dot(&self, other: &TermVector) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .weights
            .iter()
            .filter_map(|(t, w)| large.weights.get(t).map(|v| w * v))
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> TermVector {
        TermVector::from_weights(
            self.weights
                .iter()
                .map(|(t, w)| (t.clone(), w * factor))
                .collect(),
        )
    }

    /// Multiplies each weight by `f(term)`; the term set is unchanged.
    pub fn map_weights(&self, mut f: impl FnMut(&str) -> f64) -> TermVector {
        TermVector::from_weights(
            self.weights
                .iter()
                .map(|(t, w)| (t.clone(), w * f(t)))
                .collect(),
        )
    }
}

/// How raw term counts are turned into the TF factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TfScheme {
    #[default]
    Raw,
    /// 1 + ln(count)
    Log,
}

impl TfScheme {
    fn apply(self, count: u32) -> f64 {
        match self {
            TfScheme::Raw => count as f64,
            TfScheme::Log => 1.0 + (count as f64).ln(),
        }
    }
}

/// Unigrams followed by adjacent-pair bigrams (joined with one space), with
/// multiplicity.
pub fn terms(tokens: &[String]) -> impl Iterator<Item = String> + '_ {
    tokens
        .iter()
        .cloned()
        .chain(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])))
}

pub fn term_counts(tokens: &[String]) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    for t in terms(tokens) {
        *counts.entry(t).or_insert(0) += 1;
    }
    counts
}

/// TF-IDF vector over unigrams and bigrams with raw-count TF.
pub fn vectorize(tokens: &[String], idf: &impl IdfSource) -> TermVector {
    vectorize_with(tokens, idf, TfScheme::Raw)
}

pub fn vectorize_with(tokens: &[String], idf: &impl IdfSource, tf: TfScheme) -> TermVector {
    TermVector::from_weights(
        term_counts(tokens)
            .into_iter()
            .map(|(term, count)| {
                let w = tf.apply(count) * idf.idf(&term);
                (term, w)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::idf::{DefaultIdf, IdfDictionary};
    use proptest::prelude::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    struct FixedIdf(BTreeMap<&'static str, f64>);

    impl IdfSource for FixedIdf {
        fn idf(&self, term: &str) -> f64 {
            self.0[term]
        }
    }

    #[test]
    fn hand_computed_example() {
        let idf = FixedIdf([("a", 1.0), ("b", 2.0), ("a a", 1.0), ("a b", 1.0)].into_iter().collect());
        let v = vectorize(&toks(&["a", "a", "b"]), &idf);
        let expected: BTreeMap<String, f64> = [("a", 2.0), ("b", 2.0), ("a a", 1.0), ("a b", 1.0)]
            .into_iter()
            .map(|(t, w)| (t.to_string(), w))
            .collect();
        assert_eq!(v.weights(), &expected);
        assert!((v.norm() - 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_and_single() {
        let idf = IdfDictionary::uniform(10);
        let v = vectorize(&[], &idf);
        assert!(v.is_empty());
        assert_eq!(v.norm(), 0.0);
        let v = vectorize(&toks(&["x"]), &idf);
        assert_eq!(v.len(), 1);
        assert!(v.weights().keys().all(|t| !t.contains(' ')));
    }

    proptest! {
        #[test]
        fn weights_nonnegative_norm_cached(words in prop::collection::vec("[a-e]{1,2}", 0..40)) {
            let idf = IdfDictionary::from_doc_frequencies(
                [("a".to_string(), 3), ("b".to_string(), 10)].into_iter().collect(), 10, DefaultIdf::MaxObserved,
            ).unwrap();
            let v = vectorize(&words, &idf);
            prop_assert!(v.weights().values().all(|w| *w >= 0.0));
            let recomputed = v.weights().values().map(|w| w * w).sum::<f64>().sqrt();
            prop_assert!((v.norm() - recomputed).abs() <= 1e-9 * recomputed.max(1.0));
        }

        #[test]
        fn bigram_multiplicity(words in prop::collection::vec("[a-c]", 0..30)) {
            let bigrams = terms(&words).filter(|t| t.contains(' ')).count();
            prop_assert_eq!(bigrams, words.len().saturating_sub(1));
        }
    }
}
