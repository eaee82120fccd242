use std::collections::HashSet;
use std::path::Path;

use super::analyzer::Analyzer;
use super::idf::IdfSource;
use super::vector::{vectorize, TermVector};
use crate::archive::ArchiveIndex;
use crate::collection_spec::{ReferenceDocument, TemporalScope, TopicalScope};
use crate::crawler::select_snapshot;
use crate::error::AnalysisError;
use crate::html::{html_to_text, Page};

/// Term weight multipliers for full, partial and no keyword overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeywordBoost {
    pub full_overlap_weight: f64,
    pub partial_overlap_weight: f64,
    pub no_overlap_weight: f64,
}

impl Default for KeywordBoost {
    fn default() -> Self {
        KeywordBoost {
            full_overlap_weight: 2.0,
            partial_overlap_weight: 1.5,
            no_overlap_weight: 1.0,
        }
    }
}

impl KeywordBoost {
    /// Requires `full >= partial >= none > 0`.
    pub fn new(full: f64, partial: f64, none: f64) -> Option<KeywordBoost> {
        (full >= partial && partial >= none && none > 0.0).then_some(KeywordBoost {
            full_overlap_weight: full,
            partial_overlap_weight: partial,
            no_overlap_weight: none,
        })
    }

    pub fn neutral() -> KeywordBoost {
        KeywordBoost {
            full_overlap_weight: 1.0,
            partial_overlap_weight: 1.0,
            no_overlap_weight: 1.0,
        }
    }

    /// Multiplier for `term` given the analyzed keyword tokens.
    pub fn term_weight(&self, term: &str, keyword_tokens: &HashSet<String>) -> f64 {
        let mut total = 0;
        let mut hits = 0;
        for tok in term.split(' ') {
            total += 1;
            if keyword_tokens.contains(tok) {
                hits += 1;
            }
        }
        if hits == 0 {
            self.no_overlap_weight
        } else if hits == total {
            self.full_overlap_weight
        } else {
            self.partial_overlap_weight
        }
    }
}

/// Where archive-url reference documents are looked up.
#[derive(Clone, Copy)]
pub struct ArchiveContext<'a> {
    pub index: &'a ArchiveIndex,
    pub scope: &'a TemporalScope,
}

fn looks_like_html(path: &Path, text: &str) -> bool {
    let by_ext = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "html" | "htm" | "xhtml"));
    by_ext || text.trim_start().starts_with('<')
}

/// Plain text of a reference document.
pub fn resolve_reference_text(
    doc: &ReferenceDocument,
    archive: Option<ArchiveContext<'_>>,
) -> Result<String, AnalysisError> {
    let unresolvable = |reason: String| AnalysisError::UnresolvableReference {
        reference: doc.to_string(),
        reason,
    };
    match doc {
        ReferenceDocument::Inline(text) => Ok(text.clone()),
        ReferenceDocument::File(path) => {
            let bytes = std::fs::read(path).map_err(|e| unresolvable(e.to_string()))?;
            let text = String::from_utf8_lossy(&bytes).into_owned();
            Ok(if looks_like_html(path, &text) {
                html_to_text(&text)
            } else {
                text
            })
        }
        ReferenceDocument::ArchiveUrl(url) => {
            let ctx = archive.ok_or_else(|| unresolvable("no archive index available".into()))?;
            let snapshots = ctx.index.resolve_snapshots(url);
            let snap = select_snapshot(&snapshots, ctx.scope)
                .ok_or_else(|| unresolvable("url not found in archive".into()))?;
            let doc = ctx
                .index
                .fetch_document(snap)
                .map_err(|e| unresolvable(e.to_string()))?;
            Ok(Page::parse(&doc).text())
        }
    }
}

/// Analyzed, de-duplicated tokens of all keywords.
pub fn keyword_tokens(keywords: &[String], analyzer: &Analyzer) -> HashSet<String> {
    keywords
        .iter()
        .flat_map(|k| analyzer.analyze(k))
        .collect()
}

/// Concatenates the reference documents, vectorizes them, then scales each
/// term by its keyword overlap weight.
pub fn build_reference_vector(
    topical: &TopicalScope,
    idf: &impl IdfSource,
    boost: &KeywordBoost,
    archive: Option<ArchiveContext<'_>>,
) -> Result<TermVector, AnalysisError> {
    let analyzer = Analyzer::for_code(&topical.language)?;
    let texts = topical
        .reference_documents
        .iter()
        .map(|d| resolve_reference_text(d, archive))
        .collect::<Result<Vec<_>, _>>()?;
    let tokens = analyzer.analyze(&texts.join("\n"));
    let base = vectorize(&tokens, idf);
    let kw = keyword_tokens(&topical.keywords, &analyzer);
    Ok(base.map_weights(|term| boost.term_weight(term, &kw)))
}
