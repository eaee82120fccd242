use std::collections::HashSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::index::ArchivedDocument;
use super::warc::{WarcRecord, WarcWriter};
use crate::error::ArchiveError;
use crate::html::Page;

pub const COLLECTION_WARC: &str = "collection.warc.gz";
pub const MANIFEST_CSV: &str = "manifest.csv";
pub const EDGES_CSV: &str = "edges.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub url: String,
    pub capture_time: String,
    pub relevance: f64,
    pub out_degree: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectionManifest {
    pub warc_path: PathBuf,
    pub entries: Vec<ManifestEntry>,
    /// Links whose source and target are both in the collection.
    pub edges: Vec<(String, String)>,
}

/// Writes the chosen captures verbatim to `out_dir/collection.warc.gz`,
/// plus `manifest.csv` and `edges.csv`.
pub fn write_collection<I>(documents: I, out_dir: &Path) -> Result<CollectionManifest, ArchiveError>
where
    I: IntoIterator<Item = (ArchivedDocument, f64)>,
{
    std::fs::create_dir_all(out_dir).map_err(|e| ArchiveError::io(out_dir, e))?;
    let warc_path = out_dir.join(COLLECTION_WARC);
    let file = File::create(&warc_path).map_err(|e| ArchiveError::io(&warc_path, e))?;
    let mut writer = WarcWriter::new(BufWriter::new(file), true);

    let mut kept: Vec<(String, String, f64, Vec<String>)> = Vec::new();
    for (doc, relevance) in documents {
        let record = WarcRecord {
            version: "WARC/1.0".into(),
            headers: doc.warc_headers.clone(),
            block: doc.block.clone(),
        };
        writer
            .write_record(&record)
            .map_err(|e| ArchiveError::io(&warc_path, e))?;
        let outlinks = Page::parse(&doc).outlinks();
        kept.push((
            doc.snapshot.canonical_url.clone(),
            doc.snapshot.timestamp14(),
            relevance,
            outlinks,
        ));
    }
    std::io::Write::flush(&mut writer.into_inner()).map_err(|e| ArchiveError::io(&warc_path, e))?;

    let members: HashSet<&str> = kept.iter().map(|(u, ..)| u.as_str()).collect();
    let mut entries = Vec::with_capacity(kept.len());
    let mut edges = Vec::new();
    for (url, capture_time, relevance, outlinks) in &kept {
        let inside: Vec<&String> = outlinks.iter().filter(|l| members.contains(l.as_str())).collect();
        for dst in &inside {
            edges.push((url.clone(), (*dst).clone()));
        }
        entries.push(ManifestEntry {
            url: url.clone(),
            capture_time: capture_time.clone(),
            relevance: *relevance,
            out_degree: inside.len(),
        });
    }

    let manifest_path = out_dir.join(MANIFEST_CSV);
    let mut w = csv::Writer::from_path(&manifest_path).map_err(|e| csv_err(&manifest_path, e))?;
    w.write_record(["url", "capture_time", "relevance", "out_degree"])
        .map_err(|e| csv_err(&manifest_path, e))?;
    for e in &entries {
        w.write_record([
            e.url.as_str(),
            e.capture_time.as_str(),
            &format!("{:.6}", e.relevance),
            &e.out_degree.to_string(),
        ])
        .map_err(|e| csv_err(&manifest_path, e))?;
    }
    w.flush().map_err(|e| ArchiveError::io(&manifest_path, e))?;

    let edges_path = out_dir.join(EDGES_CSV);
    let mut w = csv::Writer::from_path(&edges_path).map_err(|e| csv_err(&edges_path, e))?;
    w.write_record(["src_url", "dst_url"])
        .map_err(|e| csv_err(&edges_path, e))?;
    for (s, d) in &edges {
        w.write_record([s, d]).map_err(|e| csv_err(&edges_path, e))?;
    }
    w.flush().map_err(|e| ArchiveError::io(&edges_path, e))?;

    Ok(CollectionManifest {
        warc_path,
        entries,
        edges,
    })
}

fn csv_err(path: &Path, e: csv::Error) -> ArchiveError {
    ArchiveError::io(path, std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archive::warc::http_message;
    use crate::archive::{build_index, ArchiveIndex};

    fn archive_with(dir: &Path, pages: &[(&str, &str)]) -> ArchiveIndex {
        let path = dir.join("src.warc");
        let mut w = WarcWriter::new(File::create(&path).unwrap(), false);
        for (url, body) in pages {
            let rec = WarcRecord::response(
                url,
                "2010-01-01T00:00:00Z",
                http_message(200, "OK", &[("Content-Type", "text/html")], body.as_bytes()),
            );
            w.write_record(&rec).unwrap();
        }
        drop(w);
        ArchiveIndex::from_warcs(&[path]).unwrap().0
    }

    fn fetch(idx: &ArchiveIndex, url: &str) -> ArchivedDocument {
        let snap = idx.resolve_snapshots(url).remove(0);
        idx.fetch_document(&snap).unwrap()
    }

    #[test]
    fn round_trips_and_keeps_internal_edges_only() {
        let dir = tempfile::tempdir().unwrap();
        let idx = archive_with(
            dir.path(),
            &[
                (
                    "http://e.de/a",
                    r#"<a href="/b">b</a><a href="/c">c</a><a href="http://x.de/">x</a>"#,
                ),
                ("http://e.de/b", "<p>b</p>"),
                ("http://e.de/c", "<p>c</p>"),
            ],
        );
        let docs = vec![(fetch(&idx, "http://e.de/a"), 0.9), (fetch(&idx, "http://e.de/b"), 0.4)];
        let out = dir.path().join("out");
        let manifest = write_collection(docs, &out).unwrap();
        assert_eq!(manifest.edges, [("http://e.de/a".to_string(), "http://e.de/b".to_string())]);
        assert_eq!(manifest.entries[0].out_degree, 1);
        assert_eq!(manifest.entries[0].capture_time, "20100101000000");

        let summary = build_index(&[&manifest.warc_path], &out.join("idx")).unwrap();
        assert_eq!(summary.record_count, 2);
        let again = ArchiveIndex::open(&out.join("idx")).unwrap();
        let doc = fetch(&again, "http://e.de/b");
        assert_eq!(doc.body(), b"<p>b</p>");
        assert_eq!(doc.snapshot.timestamp14(), "20100101000000");
    }

    #[test]
    fn empty_collection() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_collection(Vec::new(), dir.path()).unwrap();
        assert!(manifest.entries.is_empty());
        let summary = build_index(&[&manifest.warc_path], &dir.path().join("idx")).unwrap();
        assert_eq!(summary.record_count, 0);
        let text = std::fs::read_to_string(dir.path().join(MANIFEST_CSV)).unwrap();
        assert_eq!(text, "url,capture_time,relevance,out_degree\n");
    }
}
