//! Text extraction, analysis and TF-IDF term vectors over unigrams and
//! bigrams.

mod analyzer;
mod idf;
mod reference;
mod vector;

pub use analyzer::{analyze, Analyzer, Language};
pub use idf::{build_idf_dictionary, DefaultIdf, IdfDictionary, IdfSource};
pub use reference::{
    build_reference_vector, keyword_tokens, resolve_reference_text, ArchiveContext, KeywordBoost,
};
pub use vector::{term_counts, terms, vectorize, vectorize_with, TermVector, TfScheme};

use crate::archive::ArchivedDocument;
use crate::html::Page;

/// Visible text of an archived HTML document.
pub fn extract_text(document: &ArchivedDocument) -> String {
    Page::parse(document).text()
}
