//! Extraction of event-centric, interlinked document collections from WARC
//! web archives by focused crawling over the archive's link graph.

pub mod archive;
pub mod cli;
pub mod collection_spec;
pub mod crawler;
pub mod error;
pub mod eval;
pub mod html;
pub mod relevance;
pub mod text;

pub use collection_spec::{parse_spec, validate_spec, CollectionSpecification, TemporalScope, TopicalScope};
pub use crawler::{run_crawl, CrawlResult, CrawlStrategy};
