//! Minimal WARC 1.0/1.1 record codec with optional per-record gzip.

use std::io::{Read, Write};

use flate2::bufread::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use sha2::{Digest, Sha256};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarcRecord {
    /// e.g. `WARC/1.0`
    pub version: String,
    pub headers: Vec<(String, String)>,
    pub block: Vec<u8>,
}

impl WarcRecord {
    pub fn header(&self, name: &str) -> Option<&str> {
        find_header(&self.headers, name)
    }

    pub fn record_type(&self) -> Option<&str> {
        self.header("WARC-Type")
    }

    pub fn target_uri(&self) -> Option<&str> {
        self.header("WARC-Target-URI")
            .map(|u| u.trim().trim_start_matches('<').trim_end_matches('>'))
    }

    /// Builds an HTTP `response` record around a full HTTP message block.
    /// The record id is derived from the URI and date so output is
    /// reproducible.
    pub fn response(target_uri: &str, warc_date: &str, http_block: Vec<u8>) -> Self {
        let id = deterministic_record_id(&[target_uri.as_bytes(), warc_date.as_bytes()]);
        WarcRecord {
            version: "WARC/1.0".into(),
            headers: vec![
                ("WARC-Type".into(), "response".into()),
                ("WARC-Target-URI".into(), target_uri.into()),
                ("WARC-Date".into(), warc_date.into()),
                ("WARC-Record-ID".into(), id),
                (
                    "Content-Type".into(),
                    "application/http; msgtype=response".into(),
                ),
                ("Content-Length".into(), http_block.len().to_string()),
            ],
            block: http_block,
        }
    }

    /// Serialized bytes, with `Content-Length` forced to the block length.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.block.len() + 256);
        out.extend_from_slice(self.version.as_bytes());
        out.extend_from_slice(b"\r\n");
        let mut wrote_length = false;
        for (name, value) in &self.headers {
            if name.eq_ignore_ascii_case("Content-Length") {
                if wrote_length {
                    continue;
                }
                wrote_length = true;
                out.extend_from_slice(format!("Content-Length: {}\r\n", self.block.len()).as_bytes());
            } else {
                out.extend_from_slice(format!("{name}: {value}\r\n").as_bytes());
            }
        }
        if !wrote_length {
            out.extend_from_slice(format!("Content-Length: {}\r\n", self.block.len()).as_bytes());
        }
        out.extend_from_slice(b"\r\n");
        out.extend_from_slice(&self.block);
        out.extend_from_slice(b"\r\n\r\n");
        out
    }
}

pub fn find_header<'a>(headers: &'a [(String, String)], name: &str) -> Option<&'a str> {
    headers
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, v)| v.as_str())
}

fn deterministic_record_id(parts: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p);
        hasher.update([0u8]);
    }
    let h = hex::encode(&hasher.finalize()[..16]);
    format!(
        "<urn:uuid:{}-{}-{}-{}-{}>",
        &h[0..8],
        &h[8..12],
        &h[12..16],
        &h[16..20],
        &h[20..32]
    )
}

/// Position of the first `\r\n\r\n` (or bare `\n\n`) terminator; returns
/// (end of headers, start of body).
pub(crate) fn header_end(data: &[u8]) -> Option<(usize, usize)> {
    let mut i = 0;
    while i < data.len() {
        if data[i] == b'\n' {
            if data.get(i + 1) == Some(&b'\n') {
                return Some((i, i + 2));
            }
            if data.get(i + 1) == Some(&b'\r') && data.get(i + 2) == Some(&b'\n') {
                return Some((i, i + 3));
            }
        }
        i += 1;
    }
    None
}

pub(crate) fn parse_header_lines(text: &str) -> Vec<(String, String)> {
    let mut headers: Vec<(String, String)> = Vec::new();
    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if line.starts_with(' ') || line.starts_with('\t') {
            // folded continuation
            if let Some(last) = headers.last_mut() {
                last.1.push(' ');
                last.1.push_str(line.trim());
            }
            continue;
        }
        if let Some((name, value)) = line.split_once(':') {
            headers.push((name.trim().to_string(), value.trim().to_string()));
        }
    }
    headers
}

/// Parses one uncompressed record at the start of `data`, returning the
/// record and the number of bytes it occupies (including the trailing
/// CRLF pair when present).
pub fn parse_record(data: &[u8]) -> Result<(WarcRecord, usize), String> {
    if !data.starts_with(b"WARC/") {
        return Err("record does not start with a WARC version line".into());
    }
    let (hdr_end, body_start) =
        header_end(data).ok_or_else(|| "unterminated record header".to_string())?;
    let header_text =
        std::str::from_utf8(&data[..hdr_end]).map_err(|_| "non-UTF-8 record header".to_string())?;
    let mut lines = header_text.splitn(2, '\n');
    let version = lines.next().unwrap_or("").trim_end_matches('\r').trim().to_string();
    if !version.starts_with("WARC/1.") {
        return Err(format!("unsupported WARC version {version:?}"));
    }
    let headers = parse_header_lines(lines.next().unwrap_or(""));
    let length: usize = find_header(&headers, "Content-Length")
        .ok_or_else(|| "missing Content-Length".to_string())?
        .trim()
        .parse()
        .map_err(|_| "invalid Content-Length".to_string())?;
    let block_end = body_start
        .checked_add(length)
        .filter(|&end| end <= data.len())
        .ok_or_else(|| {
            format!(
                "truncated block: declared {length} bytes, {} available",
                data.len().saturating_sub(body_start)
            )
        })?;
    let block = data[body_start..block_end].to_vec();
    let mut consumed = block_end;
    for terminator in [&b"\r\n\r\n"[..], b"\n\n", b"\r\n", b"\n"] {
        if data[consumed..].starts_with(terminator) {
            consumed += terminator.len();
            break;
        }
    }
    Ok((
        WarcRecord {
            version,
            headers,
            block,
        },
        consumed,
    ))
}

/// Decompresses a single gzip member at the start of `data`, returning the
/// plain bytes and the compressed length.
pub fn gunzip_member(data: &[u8]) -> Result<(Vec<u8>, usize), String> {
    let mut decoder = GzDecoder::new(data);
    let mut out = Vec::new();
    decoder
        .read_to_end(&mut out)
        .map_err(|e| format!("gzip error: {e}"))?;
    let rest = decoder.into_inner();
    Ok((out, data.len() - rest.len()))
}

/// Decodes the record stored at `data[0..]`, which may be gzip-compressed.
/// Returns the record and the stored (possibly compressed) length.
pub fn decode_stored_record(data: &[u8]) -> Result<(WarcRecord, usize), String> {
    if data.starts_with(&GZIP_MAGIC) {
        let (plain, used) = gunzip_member(data)?;
        let (record, _) = parse_record(&plain)?;
        Ok((record, used))
    } else {
        parse_record(data)
    }
}

/// One entry produced while scanning a WARC file.
#[derive(Debug)]
pub struct ScannedRecord {
    pub offset: u64,
    pub length: u64,
    pub record: Result<WarcRecord, String>,
}

/// Iterates over every record in an in-memory WARC file. Corrupt records
/// yield an `Err` entry and scanning resumes at the next plausible record
/// start.
pub struct WarcScanner<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> WarcScanner<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        WarcScanner { data, pos: 0 }
    }

    fn skip_blank(&mut self) {
        while self.pos < self.data.len() && matches!(self.data[self.pos], b'\r' | b'\n') {
            self.pos += 1;
        }
    }

    fn resync(&self, from: usize) -> usize {
        let data = self.data;
        let mut i = from;
        while i < data.len() {
            if data[i..].starts_with(b"WARC/1.") && (i == 0 || data[i - 1] == b'\n') {
                return i;
            }
            if data[i..].starts_with(&[0x1f, 0x8b, 0x08]) {
                return i;
            }
            i += 1;
        }
        data.len()
    }
}

impl Iterator for WarcScanner<'_> {
    type Item = ScannedRecord;

    fn next(&mut self) -> Option<ScannedRecord> {
        self.skip_blank();
        if self.pos >= self.data.len() {
            return None;
        }
        let start = self.pos;
        match decode_stored_record(&self.data[start..]) {
            Ok((record, used)) => {
                self.pos = start + used;
                Some(ScannedRecord {
                    offset: start as u64,
                    length: used as u64,
                    record: Ok(record),
                })
            }
            Err(reason) => {
                let next = self.resync(start + 1);
                self.pos = next;
                Some(ScannedRecord {
                    offset: start as u64,
                    length: (next - start) as u64,
                    record: Err(reason),
                })
            }
        }
    }
}

/// Appends records to a WARC stream, tracking byte offsets.
pub struct WarcWriter<W: Write> {
    inner: W,
    offset: u64,
    gzip: bool,
}

impl<W: Write> WarcWriter<W> {
    pub fn new(inner: W, gzip: bool) -> Self {
        WarcWriter {
            inner,
            offset: 0,
            gzip,
        }
    }

    /// Writes one record and returns its (offset, stored length).
    pub fn write_record(&mut self, record: &WarcRecord) -> std::io::Result<(u64, u64)> {
        let plain = record.to_bytes();
        let stored = if self.gzip {
            let mut enc = GzEncoder::new(Vec::new(), Compression::default());
            enc.write_all(&plain)?;
            enc.finish()?
        } else {
            plain
        };
        self.inner.write_all(&stored)?;
        let offset = self.offset;
        self.offset += stored.len() as u64;
        Ok((offset, stored.len() as u64))
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

/// The parsed HTTP response carried in a `response` record block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body_offset: usize,
}

pub fn parse_http_response(block: &[u8]) -> Result<HttpResponse, String> {
    if !block.starts_with(b"HTTP/") {
        return Err("block is not an HTTP response".into());
    }
    let (hdr_end, body_offset) = match header_end(block) {
        Some(pos) => pos,
        // header-only response without a body
        None => (block.len(), block.len()),
    };
    let text = String::from_utf8_lossy(&block[..hdr_end]);
    let mut lines = text.splitn(2, '\n');
    let status_line = lines.next().unwrap_or("").trim_end_matches('\r');
    let status = status_line
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse::<u16>().ok())
        .ok_or_else(|| format!("invalid status line {status_line:?}"))?;
    let headers = parse_header_lines(lines.next().unwrap_or(""));
    Ok(HttpResponse {
        status,
        headers,
        body_offset,
    })
}

/// Builds a minimal HTTP/1.1 response message.
pub fn http_message(status: u16, reason: &str, headers: &[(&str, &str)], body: &[u8]) -> Vec<u8> {
    let mut out = format!("HTTP/1.1 {status} {reason}\r\n").into_bytes();
    for (n, v) in headers {
        out.extend_from_slice(format!("{n}: {v}\r\n").as_bytes());
    }
    out.extend_from_slice(format!("Content-Length: {}\r\n\r\n", body.len()).as_bytes());
    out.extend_from_slice(body);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(body: &[u8]) -> WarcRecord {
        WarcRecord::response(
            "http://e.de/",
            "2009-09-27T12:00:00Z",
            http_message(200, "OK", &[("Content-Type", "text/html")], body),
        )
    }

    #[test]
    fn plain_and_gzip_scan() {
        for gzip in [false, true] {
            let mut w = WarcWriter::new(Vec::new(), gzip);
            let (o1, l1) = w.write_record(&sample(b"one")).unwrap();
            let (o2, _) = w.write_record(&sample(b"two")).unwrap();
            let data = w.into_inner();
            let scanned: Vec<_> = WarcScanner::new(&data).collect();
            assert_eq!(scanned.len(), 2);
            assert_eq!(scanned[0].offset, o1);
            assert_eq!(scanned[1].offset, o2);
            assert_eq!(scanned[0].length, l1);
            let rec = scanned[1].record.as_ref().unwrap();
            let http = parse_http_response(&rec.block).unwrap();
            assert_eq!(http.status, 200);
            assert_eq!(&rec.block[http.body_offset..], b"two");
        }
    }

    #[test]
    fn corrupt_record_is_skipped_and_scan_resumes() {
        let mut data = b"garbage that is not a record\r\n".to_vec();
        data.extend(sample(b"ok").to_bytes());
        let scanned: Vec<_> = WarcScanner::new(&data).collect();
        assert_eq!(scanned.len(), 2);
        assert!(scanned[0].record.is_err());
        assert!(scanned[1].record.is_ok());
    }

    #[test]
    fn truncated_block_is_error() {
        let bytes = sample(b"hello").to_bytes();
        assert!(parse_record(&bytes[..bytes.len() - 8]).is_err());
    }

    #[test]
    fn gzip_member_matches_reference_decompression() {
        let plain = sample(b"<p>compressed</p>").to_bytes();
        let mut w = WarcWriter::new(Vec::new(), true);
        w.write_record(&sample(b"<p>compressed</p>")).unwrap();
        let stored = w.into_inner();
        let mut reference = Vec::new();
        flate2::read::MultiGzDecoder::new(&stored[..])
            .read_to_end(&mut reference)
            .unwrap();
        assert_eq!(reference, plain);
        let (rec, used) = decode_stored_record(&stored).unwrap();
        assert_eq!(used, stored.len());
        assert_eq!(rec.to_bytes(), plain);
    }
}
