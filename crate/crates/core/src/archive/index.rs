use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};
use log::warn;

use super::canonical::canonicalize_url;
use super::warc::{decode_stored_record, find_header, parse_http_response, WarcScanner};
use crate::error::ArchiveError;

/// One archived capture of a URL.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SnapshotRecord {
    pub canonical_url: String,
    pub capture_time: DateTime<Utc>,
    pub warc_file: PathBuf,
    pub offset: u64,
    pub length: u64,
    pub http_status: u16,
    pub media_type: String,
}

impl SnapshotRecord {
    fn sort_key(&self) -> (DateTime<Utc>, &Path, u64) {
        (self.capture_time, self.warc_file.as_path(), self.offset)
    }

    pub fn timestamp14(&self) -> String {
        format_timestamp14(self.capture_time)
    }
}

pub fn format_timestamp14(t: DateTime<Utc>) -> String {
    t.format("%Y%m%d%H%M%S").to_string()
}

pub fn parse_timestamp14(s: &str) -> Option<DateTime<Utc>> {
    if s.len() != 14 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    NaiveDateTime::parse_from_str(s, "%Y%m%d%H%M%S")
        .ok()
        .map(|t| Utc.from_utc_datetime(&t))
}

/// WARC-Date values, truncated to whole seconds.
pub fn parse_warc_date(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        let t = t.with_timezone(&Utc);
        return Utc.timestamp_opt(t.timestamp(), 0).single();
    }
    parse_timestamp14(s)
}

pub fn is_html_media_type(media_type: &str) -> bool {
    let m = media_type.to_ascii_lowercase();
    m.contains("text/html") || m.contains("application/xhtml")
}

/// A fetched capture: HTTP headers plus the payload bytes.
#[derive(Debug, Clone)]
pub struct ArchivedDocument {
    pub snapshot: SnapshotRecord,
    pub warc_headers: Vec<(String, String)>,
    /// HTTP response headers.
    pub headers: Vec<(String, String)>,
    /// Full HTTP message as stored in the record block.
    pub block: Vec<u8>,
    pub body_offset: usize,
}

impl ArchivedDocument {
    pub fn body(&self) -> &[u8] {
        &self.block[self.body_offset..]
    }

    pub fn url(&self) -> &str {
        &self.snapshot.canonical_url
    }

    pub fn header(&self, name: &str) -> Option<&str> {
        find_header(&self.headers, name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRecord {
    pub warc_file: PathBuf,
    pub offset: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexSummary {
    pub url_count: usize,
    pub record_count: usize,
    /// Malformed records that were skipped.
    pub skipped: Vec<SkippedRecord>,
}

/// URL to snapshot lookup table. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct ArchiveIndex {
    entries: HashMap<String, Vec<SnapshotRecord>>,
    record_count: usize,
}

impl ArchiveIndex {
    /// Scans WARC files and keeps HTTP 200 HTML responses with http(s)
    /// target URIs.
    pub fn from_warcs<P: AsRef<Path>>(
        warc_paths: &[P],
    ) -> Result<(ArchiveIndex, Vec<SkippedRecord>), ArchiveError> {
        let mut records = Vec::new();
        let mut skipped = Vec::new();
        for path in warc_paths {
            let path = path.as_ref();
            let abs = std::fs::canonicalize(path).map_err(|e| ArchiveError::io(path, e))?;
            let data = std::fs::read(&abs).map_err(|e| ArchiveError::io(path, e))?;
            for scanned in WarcScanner::new(&data) {
                let record = match scanned.record {
                    Ok(r) => r,
                    Err(reason) => {
                        warn!("{}@{}: skipping malformed record: {reason}", abs.display(), scanned.offset);
                        skipped.push(SkippedRecord {
                            warc_file: abs.clone(),
                            offset: scanned.offset,
                            reason,
                        });
                        continue;
                    }
                };
                if record.record_type() != Some("response") {
                    continue;
                }
                let Some(uri) = record.target_uri() else { continue };
                let Ok(canonical_url) = canonicalize_url(uri, None) else { continue };
                let Some(capture_time) = record.header("WARC-Date").and_then(parse_warc_date) else {
                    skipped.push(SkippedRecord {
                        warc_file: abs.clone(),
                        offset: scanned.offset,
                        reason: "missing or invalid WARC-Date".into(),
                    });
                    continue;
                };
                let http = match parse_http_response(&record.block) {
                    Ok(h) => h,
                    Err(reason) => {
                        skipped.push(SkippedRecord {
                            warc_file: abs.clone(),
                            offset: scanned.offset,
                            reason,
                        });
                        continue;
                    }
                };
                let media_type = find_header(&http.headers, "Content-Type")
                    .map(media_type_essence)
                    .unwrap_or_default();
                if http.status != 200 || !is_html_media_type(&media_type) {
                    continue;
                }
                records.push(SnapshotRecord {
                    canonical_url,
                    capture_time,
                    warc_file: abs.clone(),
                    offset: scanned.offset,
                    length: scanned.length,
                    http_status: http.status,
                    media_type,
                });
            }
        }
        Ok((ArchiveIndex::from_records(records), skipped))
    }

    pub fn from_records(records: Vec<SnapshotRecord>) -> ArchiveIndex {
        let record_count = records.len();
        let mut entries: HashMap<String, Vec<SnapshotRecord>> = HashMap::new();
        for r in records {
            entries.entry(r.canonical_url.clone()).or_default().push(r);
        }
        for list in entries.values_mut() {
            list.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        }
        ArchiveIndex {
            entries,
            record_count,
        }
    }

    pub fn url_count(&self) -> usize {
        self.entries.len()
    }

    pub fn record_count(&self) -> usize {
        self.record_count
    }

    /// All canonical URLs in sorted order.
    pub fn urls(&self) -> Vec<&str> {
        let mut urls: Vec<&str> = self.entries.keys().map(String::as_str).collect();
        urls.sort_unstable();
        urls
    }

    /// Snapshots for an already canonical URL.
    pub fn snapshots(&self, canonical_url: &str) -> &[SnapshotRecord] {
        self.entries
            .get(canonical_url)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// All captures of `url` in ascending capture time; empty when absent
    /// or not a crawlable URL.
    pub fn resolve_snapshots(&self, url: &str) -> Vec<SnapshotRecord> {
        match canonicalize_url(url, None) {
            Ok(c) => self.snapshots(&c).to_vec(),
            Err(_) => Vec::new(),
        }
    }

    /// Reads the capture back from its WARC file.
    pub fn fetch_document(&self, snapshot: &SnapshotRecord) -> Result<ArchivedDocument, ArchiveError> {
        fetch_document(snapshot)
    }

    /// Writes the sorted plain-text index.
    pub fn write(&self, index_path: &Path) -> Result<(), ArchiveError> {
        let file = File::create(index_path).map_err(|e| ArchiveError::io(index_path, e))?;
        let mut out = BufWriter::new(file);
        for url in self.urls() {
            for r in &self.entries[url] {
                writeln!(
                    out,
                    "{} {} {} {} {} {} {}",
                    r.canonical_url,
                    r.timestamp14(),
                    escape_path(&r.warc_file),
                    r.offset,
                    r.length,
                    r.http_status,
                    if r.media_type.is_empty() { "-" } else { &r.media_type },
                )
                .map_err(|e| ArchiveError::io(index_path, e))?;
            }
        }
        out.flush().map_err(|e| ArchiveError::io(index_path, e))
    }

    /// Loads an index file. Relative WARC paths resolve against the index
    /// file's directory; every referenced WARC must exist and contain the
    /// referenced byte range.
    pub fn open(index_path: &Path) -> Result<ArchiveIndex, ArchiveError> {
        let text = std::fs::read_to_string(index_path).map_err(|e| ArchiveError::io(index_path, e))?;
        let base_dir = index_path.parent().unwrap_or(Path::new("."));
        let mut sizes: HashMap<PathBuf, u64> = HashMap::new();
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| ArchiveError::MalformedIndex {
                line: line_no,
                reason: reason.to_string(),
            };
            let fields: Vec<&str> = line.split(' ').collect();
            if fields.len() != 7 {
                return Err(bad("expected 7 space-separated fields"));
            }
            let capture_time = parse_timestamp14(fields[1]).ok_or_else(|| bad("invalid timestamp"))?;
            let mut warc_file = PathBuf::from(unescape_path(fields[2]));
            if warc_file.is_relative() {
                warc_file = base_dir.join(warc_file);
            }
            let offset: u64 = fields[3].parse().map_err(|_| bad("invalid offset"))?;
            let length: u64 = fields[4].parse().map_err(|_| bad("invalid length"))?;
            if length == 0 {
                return Err(bad("zero length"));
            }
            let http_status: u16 = fields[5].parse().map_err(|_| bad("invalid status"))?;
            let media_type = if fields[6] == "-" { String::new() } else { fields[6].to_string() };

            let size = match sizes.get(&warc_file) {
                Some(s) => *s,
                None => {
                    let meta = std::fs::metadata(&warc_file)
                        .map_err(|_| ArchiveError::MissingWarc(warc_file.clone()))?;
                    sizes.insert(warc_file.clone(), meta.len());
                    meta.len()
                }
            };
            if offset.checked_add(length).is_none_or(|end| end > size) {
                return Err(bad("record range exceeds WARC file size"));
            }
            records.push(SnapshotRecord {
                canonical_url: fields[0].to_string(),
                capture_time,
                warc_file,
                offset,
                length,
                http_status,
                media_type,
            });
        }
        Ok(ArchiveIndex::from_records(records))
    }
}

/// Scans `warc_paths`, writes the index to `index_path`, and returns counts.
pub fn build_index<P: AsRef<Path>>(
    warc_paths: &[P],
    index_path: &Path,
) -> Result<IndexSummary, ArchiveError> {
    let (index, skipped) = ArchiveIndex::from_warcs(warc_paths)?;
    index.write(index_path)?;
    Ok(IndexSummary {
        url_count: index.url_count(),
        record_count: index.record_count(),
        skipped,
    })
}

pub fn fetch_document(snapshot: &SnapshotRecord) -> Result<ArchivedDocument, ArchiveError> {
    let path = &snapshot.warc_file;
    let corrupt = |reason: String| ArchiveError::CorruptRecord {
        path: path.clone(),
        offset: snapshot.offset,
        reason,
    };
    let mut file = File::open(path).map_err(|e| ArchiveError::io(path, e))?;
    file.seek(SeekFrom::Start(snapshot.offset))
        .map_err(|e| ArchiveError::io(path, e))?;
    let mut buf = Vec::with_capacity(snapshot.length as usize);
    file.take(snapshot.length)
        .read_to_end(&mut buf)
        .map_err(|e| ArchiveError::io(path, e))?;
    if (buf.len() as u64) < snapshot.length {
        return Err(corrupt(format!(
            "truncated: expected {} bytes, read {}",
            snapshot.length,
            buf.len()
        )));
    }
    let (record, _) = decode_stored_record(&buf).map_err(corrupt)?;
    if record.record_type() != Some("response") {
        return Err(corrupt("not a response record".into()));
    }
    let http = parse_http_response(&record.block).map_err(corrupt)?;
    Ok(ArchivedDocument {
        snapshot: snapshot.clone(),
        warc_headers: record.headers,
        headers: http.headers,
        block: record.block,
        body_offset: http.body_offset,
    })
}

fn media_type_essence(content_type: &str) -> String {
    content_type
        .split(';')
        .next()
        .unwrap_or("")
        .trim()
        .to_ascii_lowercase()
        .replace(' ', "")
}

fn escape_path(p: &Path) -> String {
    p.to_string_lossy().replace('%', "%25").replace(' ', "%20")
}

fn unescape_path(s: &str) -> String {
    s.replace("%20", " ").replace("%25", "%")
}
