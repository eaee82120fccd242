//! Priority-driven focused crawl over the archive's link graph.
//!
//! Seeds are queued first at maximal priority. Each popped URL is looked
//! up in the index; absent URLs go to the missing set, present ones have a
//! snapshot selected, scored and added to the collection, and their
//! not-yet-seen outlinks are queued at the linking document's relevance.

mod frontier;
mod snapshot;

pub use frontier::{Frontier, FrontierEntry, PushOutcome};
pub use snapshot::select_snapshot;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use log::{debug, warn};

use crate::archive::{format_timestamp14, ArchiveIndex, ArchivedDocument, SnapshotRecord};
use crate::collection_spec::CollectionSpecification;
use crate::error::{AnalysisError, CrawlError};
use crate::html::Page;
use crate::relevance::{
    extract_document_time_from_page, temporal_relevance_with, topical_relevance, DocumentTime, GammaMode,
    RelevanceScore,
};
use crate::text::{build_reference_vector, vectorize, Analyzer, ArchiveContext, IdfDictionary, KeywordBoost, TermVector};

/// Queue priority of seed URLs.
pub const SEED_PRIORITY: f64 = f64::MAX;
/// Priority of every outlink in an unfocused crawl.
pub const UNFOCUSED_PRIORITY: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CrawlStrategy {
    Unfocused,
    /// Topical relevance only.
    ContentFocused,
    /// Temporal relevance only.
    TimeFocused,
    /// Linear combination with the specification's alpha.
    Combined,
}

impl CrawlStrategy {
    pub const ALL: [CrawlStrategy; 4] = [
        CrawlStrategy::Unfocused,
        CrawlStrategy::ContentFocused,
        CrawlStrategy::TimeFocused,
        CrawlStrategy::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CrawlStrategy::Unfocused => "unfocused",
            CrawlStrategy::ContentFocused => "c-f",
            CrawlStrategy::TimeFocused => "t-f",
            CrawlStrategy::Combined => "ct-f",
        }
    }

    /// Alpha used for the combined score; `None` for the unfocused crawl.
    pub fn effective_alpha(self, spec_alpha: f64) -> Option<f64> {
        match self {
            CrawlStrategy::Unfocused => None,
            CrawlStrategy::ContentFocused => Some(1.0),
            CrawlStrategy::TimeFocused => Some(0.0),
            CrawlStrategy::Combined => Some(spec_alpha),
        }
    }

    pub fn score(self, topical: f64, temporal: f64, spec_alpha: f64) -> RelevanceScore {
        RelevanceScore::new(topical, temporal, self.effective_alpha(spec_alpha).unwrap_or(spec_alpha))
    }

    /// Priority given to the outlinks of a document with this score.
    pub fn outlink_priority(self, score: &RelevanceScore) -> f64 {
        match self {
            CrawlStrategy::Unfocused => UNFOCUSED_PRIORITY,
            _ => score.combined,
        }
    }
}

impl fmt::Display for CrawlStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownStrategy(pub String);

impl fmt::Display for UnknownStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown strategy {:?}; valid names: unfocused, c-f, t-f, ct-f",
            self.0
        )
    }
}

impl std::error::Error for UnknownStrategy {}

impl FromStr for CrawlStrategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unfocused" => Ok(CrawlStrategy::Unfocused),
            "c-f" | "cf" => Ok(CrawlStrategy::ContentFocused),
            "t-f" | "tf" => Ok(CrawlStrategy::TimeFocused),
            "ct-f" | "ctf" => Ok(CrawlStrategy::Combined),
            _ => Err(UnknownStrategy(s.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrawlConfig {
    pub gamma_mode: GammaMode,
    pub boost: KeywordBoost,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            gamma_mode: GammaMode::Literal,
            boost: KeywordBoost::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceAction {
    Fetch,
    Miss,
    /// Snapshot found but its payload could not be read.
    Skip,
}

impl TraceAction {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceAction::Fetch => "fetch",
            TraceAction::Miss => "miss",
            TraceAction::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    pub action: TraceAction,
    pub url: String,
    pub priority: f64,
    pub snapshot_time: Option<DateTime<Utc>>,
    pub score: Option<RelevanceScore>,
}

#[derive(Debug, Clone)]
pub struct CollectedDocument {
    pub snapshot: SnapshotRecord,
    pub score: RelevanceScore,
    pub document_time: DocumentTime,
    pub outlinks: Vec<String>,
    /// Priority the URL had when it was popped.
    pub priority: f64,
}

#[derive(Debug, Clone)]
pub struct CrawlResult {
    pub strategy: CrawlStrategy,
    pub collection: Vec<CollectedDocument>,
    pub missing: BTreeSet<String>,
    pub trace: Vec<TraceEntry>,
    /// Frontier contents at termination, in pop order.
    pub queued_at_end: Vec<FrontierEntry>,
}

impl CrawlResult {
    pub fn fetched_urls(&self) -> Vec<&str> {
        self.collection
            .iter()
            .map(|d| d.snapshot.canonical_url.as_str())
            .collect()
    }

    /// Fetched + missing + still queued.
    pub fn urls_considered(&self) -> usize {
        self.collection.len() + self.missing.len() + self.queued_at_end.len()
    }

    /// Trace as `step,action,url,priority,snapshot_time,topical,temporal,combined`.
    pub fn write_trace(&self, mut out: impl Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(&mut out);
        let io = |e: csv::Error| std::io::Error::other(e);
        w.write_record([
            "step",
            "action",
            "url",
            "priority",
            "snapshot_time",
            "topical",
            "temporal",
            "combined",
        ])
        .map_err(io)?;
        for t in &self.trace {
            let (topical, temporal, combined) = match t.score {
                Some(s) => (
                    format!("{:.6}", s.topical),
                    format!("{:.6}", s.temporal),
                    format!("{:.6}", s.combined),
                ),
                None => Default::default(),
            };
            w.write_record([
                t.step.to_string(),
                t.action.as_str().to_string(),
                t.url.clone(),
                format_priority(t.priority),
                t.snapshot_time.map(format_timestamp14).unwrap_or_default(),
                topical,
                temporal,
                combined,
            ])
            .map_err(io)?;
        }
        w.flush()
    }

    pub fn write_trace_file(&self, path: &Path) -> std::io::Result<()> {
        self.write_trace(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

pub fn format_priority(p: f64) -> String {
    if p == SEED_PRIORITY {
        "seed".to_string()
    } else {
        format!("{p:.6}")
    }
}

/// Scores of one fetched document.
#[derive(Debug, Clone)]
pub struct DocumentAssessment {
    pub topical: f64,
    pub temporal: f64,
    pub document_time: DocumentTime,
    pub outlinks: Vec<String>,
}

/// Holds everything needed to score documents against one specification.
pub struct Crawler<'a> {
    spec: &'a CollectionSpecification,
    index: &'a ArchiveIndex,
    idf: &'a IdfDictionary,
    analyzer: Analyzer,
    reference: TermVector,
    config: CrawlConfig,
}

impl<'a> Crawler<'a> {
    /// Builds the reference vector; fails if a reference document cannot be
    /// resolved.
    pub fn new(
        spec: &'a CollectionSpecification,
        index: &'a ArchiveIndex,
        idf: &'a IdfDictionary,
        config: CrawlConfig,
    ) -> Result<Crawler<'a>, CrawlError> {
        let analyzer = Analyzer::for_code(&spec.topical.language)?;
        let reference = build_reference_vector(
            &spec.topical,
            idf,
            &config.boost,
            Some(ArchiveContext {
                index,
                scope: &spec.temporal,
            }),
        )?;
        if reference.is_empty() {
            return Err(AnalysisError::UnresolvableReference {
                reference: spec.name.clone(),
                reason: "reference documents contain no terms".into(),
            }
            .into());
        }
        Ok(Crawler {
            spec,
            index,
            idf,
            analyzer,
            reference,
            config,
        })
    }

    pub fn reference(&self) -> &TermVector {
        &self.reference
    }

    pub fn document_vector(&self, page: &Page) -> TermVector {
        vectorize(&self.analyzer.analyze(&page.text()), self.idf)
    }

    pub fn assess(&self, doc: &ArchivedDocument) -> DocumentAssessment {
        let page = Page::parse(doc);
        let topical = topical_relevance(&self.document_vector(&page), &self.reference);
        let document_time = extract_document_time_from_page(&page, doc.url(), doc.snapshot.capture_time);
        let temporal = temporal_relevance_with(document_time.time_point, &self.spec.temporal, self.config.gamma_mode);
        DocumentAssessment {
            topical,
            temporal,
            document_time,
            outlinks: page.outlinks(),
        }
    }

    pub fn run(&self, strategy: CrawlStrategy) -> CrawlResult {
        let spec = self.spec;
        let mut frontier = Frontier::new();
        for seed in &spec.seeds {
            match crate::archive::canonicalize_url(seed, None) {
                Ok(url) => {
                    frontier.push(&url, SEED_PRIORITY);
                }
                Err(e) => warn!("ignoring seed {seed:?}: {e}"),
            }
        }

        let mut collection = Vec::new();
        let mut collected: HashSet<String> = HashSet::new();
        let mut missing = BTreeSet::new();
        let mut trace = Vec::new();
        let mut step = 0usize;

        while collection.len() < spec.target_size {
            let Some(entry) = frontier.pop() else { break };
            step += 1;
            let snapshots = self.index.snapshots(&entry.url);
            let Some(snapshot) = select_snapshot(snapshots, &spec.temporal) else {
                debug!("miss {}", entry.url);
                trace.push(TraceEntry {
                    step,
                    action: TraceAction::Miss,
                    url: entry.url.clone(),
                    priority: entry.priority,
                    snapshot_time: None,
                    score: None,
                });
                missing.insert(entry.url);
                continue;
            };
            let doc = match self.index.fetch_document(snapshot) {
                Ok(doc) => doc,
                Err(e) => {
                    warn!("treating {} as missing: {e}", entry.url);
                    trace.push(TraceEntry {
                        step,
                        action: TraceAction::Skip,
                        url: entry.url.clone(),
                        priority: entry.priority,
                        snapshot_time: Some(snapshot.capture_time),
                        score: None,
                    });
                    missing.insert(entry.url);
                    continue;
                }
            };

            let assessment = self.assess(&doc);
            let score = strategy.score(assessment.topical, assessment.temporal, spec.alpha);
            let priority = strategy.outlink_priority(&score);
            collected.insert(entry.url.clone());
            for link in &assessment.outlinks {
                if collected.contains(link) || missing.contains(link) {
                    continue;
                }
                frontier.push(link, priority);
            }
            trace.push(TraceEntry {
                step,
                action: TraceAction::Fetch,
                url: entry.url.clone(),
                priority: entry.priority,
                snapshot_time: Some(snapshot.capture_time),
                score: Some(score),
            });
            collection.push(CollectedDocument {
                snapshot: snapshot.clone(),
                score,
                document_time: assessment.document_time,
                outlinks: assessment.outlinks,
                priority: entry.priority,
            });
        }

        CrawlResult {
            strategy,
            collection,
            missing,
            trace,
            queued_at_end: frontier.entries(),
        }
    }
}

/// Runs one focused crawl for `spec` over `index`.
pub fn run_crawl(
    spec: &CollectionSpecification,
    index: &ArchiveIndex,
    strategy: CrawlStrategy,
    idf: &IdfDictionary,
    config: &CrawlConfig,
) -> Result<CrawlResult, CrawlError> {
    Ok(Crawler::new(spec, index, idf, config.clone())?.run(strategy))
}

/// Canonical http(s) anchor targets of an archived HTML document.
pub fn extract_outlinks(document: &ArchivedDocument) -> Vec<String> {
    Page::parse(document).outlinks()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for s in CrawlStrategy::ALL {
            assert_eq!(s.name().parse::<CrawlStrategy>().unwrap(), s);
        }
        let err = "bfs".parse::<CrawlStrategy>().unwrap_err();
        assert!(err.to_string().contains("unfocused, c-f, t-f, ct-f"));
    }

    #[test]
    fn strategy_scores() {
        let s = CrawlStrategy::ContentFocused.score(0.3, 0.9, 0.5);
        assert_eq!(s.combined, 0.3);
        let s = CrawlStrategy::TimeFocused.score(0.3, 0.9, 0.5);
        assert_eq!(s.combined, 0.9);
        let s = CrawlStrategy::Combined.score(0.8, 0.4, 0.5);
        assert!((s.combined - 0.6).abs() < 1e-15);
        assert_eq!(CrawlStrategy::Unfocused.outlink_priority(&s), UNFOCUSED_PRIORITY);
    }
}
