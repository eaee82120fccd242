#![allow(dead_code)]

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, TimeZone, Utc};
use eventcrawl::archive::warc::{http_message, WarcRecord, WarcWriter};
use eventcrawl::collection_spec::{format_timestamp, ReferenceDocument};
use eventcrawl::{CollectionSpecification, TemporalScope, TopicalScope};

pub fn at(y: i32, m: u32, d: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(y, m, d, 0, 0, 0).unwrap()
}

/// June 2010, 30 days lead, 60 days cool-down.
pub fn june_scope() -> TemporalScope {
    TemporalScope::new(
        at(2010, 6, 1),
        at(2010, 6, 30) + Duration::seconds(86_399),
        30 * 86_400,
        60 * 86_400,
    )
}

pub fn spec(reference: &str, seeds: &[&str], target_size: usize) -> CollectionSpecification {
    CollectionSpecification {
        name: "fixture".into(),
        topical: TopicalScope {
            reference_documents: vec![ReferenceDocument::Inline(reference.into())],
            keywords: vec![],
            language: "en".into(),
        },
        temporal: june_scope(),
        seeds: seeds.iter().map(|s| s.to_string()).collect(),
        target_size,
        alpha: 0.5,
    }
}

pub fn html_page(text: &str, links: &[String], published: Option<DateTime<Utc>>) -> String {
    let mut html = String::from("<html><head>");
    if let Some(p) = published {
        html.push_str(&format!(
            "<meta property=\"article:published_time\" content=\"{}\">",
            format_timestamp(p)
        ));
    }
    html.push_str("</head><body><p>");
    html.push_str(text);
    html.push_str("</p>");
    for l in links {
        html.push_str(&format!("<a href=\"{l}\">x</a>"));
    }
    html.push_str("</body></html>");
    html
}

/// One archived response.
#[derive(Debug, Clone)]
pub struct Capture {
    pub url: String,
    pub time: DateTime<Utc>,
    pub html: String,
}

impl Capture {
    pub fn new(url: &str, time: DateTime<Utc>, html: String) -> Capture {
        Capture {
            url: url.into(),
            time,
            html,
        }
    }
}

pub fn write_warc(path: &Path, captures: &[Capture], gzip: bool) -> PathBuf {
    let file = File::create(path).unwrap();
    let mut w = WarcWriter::new(BufWriter::new(file), gzip);
    for c in captures {
        let block = http_message(200, "OK", &[("Content-Type", "text/html; charset=utf-8")], c.html.as_bytes());
        w.write_record(&WarcRecord::response(&c.url, &format_timestamp(c.time), block))
            .unwrap();
    }
    std::io::Write::flush(&mut w.into_inner()).unwrap();
    path.to_path_buf()
}
