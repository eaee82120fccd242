use std::sync::OnceLock;

use chrono::{DateTime, Datelike, NaiveDate, TimeZone, Utc};
use regex::Regex;

use crate::archive::ArchivedDocument;
use crate::collection_spec::{parse_timestamp, Bound};
use crate::html::Page;

/// Metadata fields consulted, in order.
const META_FIELDS: &[&str] = &["article:published_time", "date", "dcterms.date", "DC.date.issued"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSource {
    PublicationMetadata,
    ContentPattern,
    UrlPattern,
    CrawlTimeFallback,
}

impl TimeSource {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeSource::PublicationMetadata => "publication_metadata",
            TimeSource::ContentPattern => "content_pattern",
            TimeSource::UrlPattern => "url_pattern",
            TimeSource::CrawlTimeFallback => "crawl_time_fallback",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DocumentTime {
    pub time_point: DateTime<Utc>,
    pub source: TimeSource,
}

fn plausible(t: DateTime<Utc>) -> Option<DateTime<Utc>> {
    (1970..=2100).contains(&t.year()).then_some(t)
}

fn parse_extracted(s: &str) -> Option<DateTime<Utc>> {
    if s.is_empty() {
        return None;
    }
    parse_timestamp(s, Bound::Start)
        .ok()
        .or_else(|| DateTime::parse_from_rfc2822(s).ok().map(|t| t.with_timezone(&Utc)))
        .and_then(plausible)
}

fn date_from_parts(y: &str, m: &str, d: &str) -> Option<DateTime<Utc>> {
    let date = NaiveDate::from_ymd_opt(y.parse().ok()?, m.parse().ok()?, d.parse().ok()?)?;
    plausible(Utc.from_utc_datetime(&date.and_hms_opt(0, 0, 0)?))
}

/// A date encoded in the URL path as `/YYYY/MM/DD/` or `YYYY-MM-DD`.
pub fn date_from_url(url: &str) -> Option<DateTime<Utc>> {
    static SLASHED: OnceLock<Regex> = OnceLock::new();
    static DASHED: OnceLock<Regex> = OnceLock::new();
    let path = url::Url::parse(url)
        .map(|u| u.path().to_string())
        .unwrap_or_else(|_| url.to_string());
    let slashed = SLASHED.get_or_init(|| Regex::new(r"/(\d{4})/(\d{1,2})/(\d{1,2})(?:/|$|[^0-9])").expect("static regex"));
    let dashed = DASHED.get_or_init(|| Regex::new(r"(?:^|[^0-9])(\d{4})-(\d{2})-(\d{2})(?:$|[^0-9])").expect("static regex"));
    for re in [slashed, dashed] {
        for c in re.captures_iter(&path) {
            if let Some(t) = date_from_parts(&c[1], &c[2], &c[3]) {
                return Some(t);
            }
        }
    }
    None
}

/// Publication time from metadata, then `<time datetime>`, then the URL,
/// falling back to the capture time.
pub fn extract_document_time_from_page(page: &Page, url: &str, capture_time: DateTime<Utc>) -> DocumentTime {
    for field in META_FIELDS {
        if let Some(t) = page.meta_content(field).as_deref().and_then(parse_extracted) {
            return DocumentTime {
                time_point: t,
                source: TimeSource::PublicationMetadata,
            };
        }
    }
    if let Some(t) = page.time_datetimes().iter().find_map(|s| parse_extracted(s)) {
        return DocumentTime {
            time_point: t,
            source: TimeSource::ContentPattern,
        };
    }
    if let Some(t) = date_from_url(url) {
        return DocumentTime {
            time_point: t,
            source: TimeSource::UrlPattern,
        };
    }
    DocumentTime {
        time_point: capture_time,
        source: TimeSource::CrawlTimeFallback,
    }
}

pub fn extract_document_time(document: &ArchivedDocument) -> DocumentTime {
    let page = Page::parse(document);
    extract_document_time_from_page(&page, document.url(), document.snapshot.capture_time)
}
