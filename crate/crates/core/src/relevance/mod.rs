//! Temporal, topical and combined relevance of a document to a collection
//! specification.

mod doctime;

pub use doctime::{extract_document_time, extract_document_time_from_page, DocumentTime, TimeSource};

use chrono::{DateTime, Utc};

use crate::collection_spec::TemporalScope;
use crate::text::TermVector;

/// How the lead and cool-down durations act as decay constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GammaMode {
    /// `exp(-dt / gamma)`: relevance is e^-1 at `dt = gamma`.
    #[default]
    Literal,
    /// `gamma' = gamma / ln 2`: relevance is 0.5 at `dt = gamma`.
    HalfLife,
}

impl GammaMode {
    pub fn from_half_life_flag(half_life: bool) -> GammaMode {
        if half_life {
            GammaMode::HalfLife
        } else {
            GammaMode::Literal
        }
    }
}

fn decay(delta_seconds: f64, gamma_seconds: i64, mode: GammaMode) -> f64 {
    if gamma_seconds <= 0 {
        return 0.0;
    }
    let gamma = match mode {
        GammaMode::Literal => gamma_seconds as f64,
        GammaMode::HalfLife => gamma_seconds as f64 / std::f64::consts::LN_2,
    };
    (-delta_seconds / gamma).exp()
}

/// 1 inside the event interval, exponential decay outside it with the lead
/// time before and the cool-down time after. A zero decay constant gives 0
/// on that side.
pub fn temporal_relevance(t_d: DateTime<Utc>, scope: &TemporalScope) -> f64 {
    temporal_relevance_with(t_d, scope, GammaMode::Literal)
}

pub fn temporal_relevance_with(t_d: DateTime<Utc>, scope: &TemporalScope, mode: GammaMode) -> f64 {
    if t_d < scope.event_start {
        let dt = (scope.event_start - t_d).num_seconds() as f64;
        decay(dt, scope.lead_time, mode)
    } else if t_d > scope.event_end {
        let dt = (t_d - scope.event_end).num_seconds() as f64;
        decay(dt, scope.cool_down_time, mode)
    } else {
        1.0
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn topical_relevance(doc_vector: &TermVector, reference: &TermVector) -> f64 {
    let denom = doc_vector.norm() * reference.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (doc_vector.dot(reference) / denom).clamp(0.0, 1.0)
}

pub fn combined_relevance(topical: f64, temporal: f64, alpha: f64) -> f64 {
    alpha * topical + (1.0 - alpha) * temporal
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevanceScore {
    pub topical: f64,
    pub temporal: f64,
    pub combined: f64,
}

impl RelevanceScore {
    pub fn new(topical: f64, temporal: f64, alpha: f64) -> RelevanceScore {
        RelevanceScore {
            topical,
            temporal,
            combined: combined_relevance(topical, temporal, alpha),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone};
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn scope(lead: i64, cool: i64) -> TemporalScope {
        TemporalScope::new(
            Utc.with_ymd_and_hms(2010, 6, 1, 0, 0, 0).unwrap(),
            Utc.with_ymd_and_hms(2010, 6, 30, 23, 59, 59).unwrap(),
            lead,
            cool,
        )
    }

    fn vec_of(pairs: &[(&str, f64)]) -> TermVector {
        TermVector::from_weights(pairs.iter().map(|(t, w)| (t.to_string(), *w)).collect::<BTreeMap<_, _>>())
    }

    #[test]
    fn temporal_cases() {
        let s = scope(86_400 * 7, 86_400 * 14);
        assert_eq!(temporal_relevance(s.event_start, &s), 1.0);
        assert_eq!(temporal_relevance(s.event_end, &s), 1.0);
        let after = s.event_end + Duration::seconds(s.cool_down_time);
        assert!((temporal_relevance(after, &s) - (-1f64).exp()).abs() < 1e-12);
        assert!((temporal_relevance(after, &s) - 0.367879).abs() < 1e-6);
        let half = temporal_relevance_with(after, &s, GammaMode::HalfLife);
        assert!((half - 0.5).abs() < 1e-12);

        let no_lead = scope(0, 86_400);
        assert_eq!(temporal_relevance(no_lead.event_start - Duration::seconds(1), &no_lead), 0.0);
        assert_eq!(temporal_relevance(no_lead.event_start, &no_lead), 1.0);
    }

    #[test]
    fn cosine_examples() {
        let r = vec_of(&[("a", 1.0), ("b", 2.0)]);
        assert!((topical_relevance(&r, &r) - 1.0).abs() < 1e-12);
        assert_eq!(topical_relevance(&vec_of(&[("a", 1.0)]), &vec_of(&[("c", 1.0)])), 0.0);
        let v = topical_relevance(&vec_of(&[("a", 1.0), ("b", 1.0)]), &vec_of(&[("a", 1.0)]));
        assert!((v - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(topical_relevance(&TermVector::default(), &r), 0.0);
    }

    #[test]
    fn combined_examples() {
        assert_eq!(combined_relevance(1.0, 1.0, 0.5), 1.0);
        assert_eq!(combined_relevance(0.3, 0.9, 1.0), 0.3);
        assert_eq!(combined_relevance(0.3, 0.9, 0.0), 0.9);
        assert!((combined_relevance(0.8, 0.4, 0.5) - 0.6).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn continuous_at_boundaries(lead in 1i64..10_000_000, cool in 1i64..10_000_000) {
            let s = scope(lead, cool);
            let before = temporal_relevance(s.event_start - Duration::seconds(1), &s);
            let after = temporal_relevance(s.event_end + Duration::seconds(1), &s);
            prop_assert!((1.0 - before) <= 1.0 / lead as f64 + 1e-12);
            prop_assert!((1.0 - after) <= 1.0 / cool as f64 + 1e-12);
        }

        #[test]
        fn combined_alpha_endpoints(t in 0.0f64..=1.0, x in 0.0f64..=1.0) {
            prop_assert_eq!(combined_relevance(t, x, 1.0), t);
            prop_assert_eq!(combined_relevance(t, x, 0.0), x);
        }
    }
}
