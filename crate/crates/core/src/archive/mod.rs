//! WARC reading and writing, the URL to snapshot index, and collection
//! output.

mod canonical;
mod collection;
mod index;
pub mod warc;

pub use canonical::{canonicalize, canonicalize_url};
pub use collection::{
    write_collection, CollectionManifest, ManifestEntry, COLLECTION_WARC, EDGES_CSV, MANIFEST_CSV,
};
pub use index::{
    build_index, fetch_document, format_timestamp14, is_html_media_type, parse_timestamp14,
    parse_warc_date, ArchiveIndex, ArchivedDocument, IndexSummary, SkippedRecord, SnapshotRecord,
};
