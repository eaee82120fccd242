//! Collection specification: the topical and temporal scope of an extraction,
//! plus the seed URLs the crawl starts from.
//!
//! Specifications are stored as a single JSON document:
//!
//! ```json
//! {
//!   "name": "election-2009",
//!   "topical": {
//!     "reference_documents": [{"kind": "inline", "value": "..."}],
//!     "keywords": ["election"],
//!     "language": "en"
//!   },
//!   "temporal": {
//!     "event_start": "2009-09-27",
//!     "event_end": "2009-09-27",
//!     "lead_time": "6m",
//!     "cool_down_time": "2w"
//!   },
//!   "seeds": ["http://example.de/"],
//!   "target_size": 1000,
//!   "alpha": 0.5
//! }
//! ```
//!
//! `target_size` defaults to 100000 and `alpha` to 0.5. Durations are either a
//! number of seconds or a string with a unit suffix (`s`, `min`, `h`, `d`, `w`,
//! `m` for 30-day months, `y` for 365-day years).

use std::fmt;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime, NaiveTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::SpecError;
use crate::text::Language;

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_TARGET_SIZE: usize = 100_000;

/// Event interval plus the lead and cool-down durations around it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemporalScope {
    pub event_start: DateTime<Utc>,
    pub event_end: DateTime<Utc>,
    /// Seconds. Zero means the event had no lead time.
    pub lead_time: i64,
    /// Seconds.
    pub cool_down_time: i64,
}

impl TemporalScope {
    pub fn new(
        event_start: DateTime<Utc>,
        event_end: DateTime<Utc>,
        lead_time: i64,
        cool_down_time: i64,
    ) -> Self {
        TemporalScope {
            event_start,
            event_end,
            lead_time,
            cool_down_time,
        }
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.event_start <= t && t <= self.event_end
    }

    /// Seconds from `t` to the event interval; zero inside it.
    pub fn distance_seconds(&self, t: DateTime<Utc>) -> i64 {
        if t < self.event_start {
            (self.event_start - t).num_seconds()
        } else if t > self.event_end {
            (t - self.event_end).num_seconds()
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ReferenceDocument {
    Inline(String),
    File(PathBuf),
    /// Resolved against the archive index when the crawl starts.
    ArchiveUrl(String),
}

impl fmt::Display for ReferenceDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceDocument::Inline(text) => {
                let preview: String = text.chars().take(32).collect();
                write!(f, "inline:{preview:?}")
            }
            ReferenceDocument::File(path) => write!(f, "file:{}", path.display()),
            ReferenceDocument::ArchiveUrl(url) => write!(f, "archive-url:{url}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicalScope {
    pub reference_documents: Vec<ReferenceDocument>,
    pub keywords: Vec<String>,
    pub language: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectionSpecification {
    pub name: String,
    pub topical: TopicalScope,
    pub temporal: TemporalScope,
    pub seeds: Vec<String>,
    pub target_size: usize,
    pub alpha: f64,
}

/// One invariant violation, located by its field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Checks every invariant and returns one diagnostic per violation.
pub fn validate_spec(spec: &CollectionSpecification) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if spec.name.trim().is_empty() {
        out.push(Diagnostic::new("name", "name must be non-empty"));
    }

    let topical = &spec.topical;
    if topical.reference_documents.is_empty() {
        out.push(Diagnostic::new(
            "topical.reference_documents",
            "at least one reference document is required",
        ));
    }
    for (i, doc) in topical.reference_documents.iter().enumerate() {
        let empty = match doc {
            ReferenceDocument::Inline(text) => text.trim().is_empty(),
            ReferenceDocument::File(path) => path.as_os_str().is_empty(),
            ReferenceDocument::ArchiveUrl(url) => url.trim().is_empty(),
        };
        if empty {
            out.push(Diagnostic::new(
                format!("topical.reference_documents[{i}]"),
                "reference document value must be non-empty",
            ));
        }
    }
    for (i, kw) in topical.keywords.iter().enumerate() {
        if kw.trim().is_empty() {
            out.push(Diagnostic::new(
                format!("topical.keywords[{i}]"),
                "keywords must be non-empty",
            ));
        }
    }
    if Language::from_code(&topical.language).is_err() {
        out.push(Diagnostic::new(
            "topical.language",
            format!("unsupported language {:?}", topical.language),
        ));
    }

    let temporal = &spec.temporal;
    if temporal.event_start > temporal.event_end {
        out.push(Diagnostic::new(
            "temporal.event_start",
            "event_start must not be after event_end",
        ));
    }
    if temporal.lead_time < 0 {
        out.push(Diagnostic::new(
            "temporal.lead_time",
            "lead_time must be non-negative",
        ));
    }
    if temporal.cool_down_time < 0 {
        out.push(Diagnostic::new(
            "temporal.cool_down_time",
            "cool_down_time must be non-negative",
        ));
    }

    if spec.seeds.is_empty() {
        out.push(Diagnostic::new("seeds", "seeds must be non-empty"));
    }
    for (i, seed) in spec.seeds.iter().enumerate() {
        if let Err(e) = crate::archive::canonicalize_url(seed, None) {
            out.push(Diagnostic::new(format!("seeds[{i}]"), e.to_string()));
        }
    }
    if spec.target_size < 1 {
        out.push(Diagnostic::new("target_size", "target_size must be at least 1"));
    }
    if !(0.0..=1.0).contains(&spec.alpha) {
        out.push(Diagnostic::new("alpha", "alpha must lie in [0, 1]"));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct RawReference {
    kind: String,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct RawTopical {
    reference_documents: Vec<RawReference>,
    #[serde(default)]
    keywords: Vec<String>,
    #[serde(default = "default_language")]
    language: String,
}

#[derive(Serialize, Deserialize)]
struct RawTemporal {
    event_start: String,
    event_end: String,
    #[serde(default = "zero_duration")]
    lead_time: Value,
    #[serde(default = "zero_duration")]
    cool_down_time: Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: String,
    topical: RawTopical,
    temporal: RawTemporal,
    seeds: Vec<String>,
    #[serde(default)]
    target_size: Option<i64>,
    #[serde(default)]
    alpha: Option<f64>,
}

fn default_language() -> String {
    "en".to_string()
}

fn zero_duration() -> Value {
    Value::from(0)
}

/// Parses and validates a JSON collection specification.
pub fn parse_spec(input: &str) -> Result<CollectionSpecification, SpecError> {
    let spec = parse_spec_unchecked(input)?;
    if let Some(first) = validate_spec(&spec).into_iter().next() {
        return Err(SpecError::Invalid(first));
    }
    Ok(spec)
}

/// Parses without checking invariants; pair with [`validate_spec`] to
/// collect every diagnostic.
pub fn parse_spec_unchecked(input: &str) -> Result<CollectionSpecification, SpecError> {
    let raw: RawSpec = serde_json::from_str(input).map_err(|e| SpecError::Parse(e.to_string()))?;

    let reference_documents = raw
        .topical
        .reference_documents
        .into_iter()
        .map(|r| match r.kind.as_str() {
            "inline" => Ok(ReferenceDocument::Inline(r.value)),
            "file" => Ok(ReferenceDocument::File(PathBuf::from(r.value))),
            "archive-url" => Ok(ReferenceDocument::ArchiveUrl(r.value)),
            other => Err(SpecError::Parse(format!(
                "unknown reference document kind {other:?} (expected inline, file or archive-url)"
            ))),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let event_start = parse_timestamp(&raw.temporal.event_start, Bound::Start)
        .map_err(|e| SpecError::Parse(format!("temporal.event_start: {e}")))?;
    let event_end = parse_timestamp(&raw.temporal.event_end, Bound::End)
        .map_err(|e| SpecError::Parse(format!("temporal.event_end: {e}")))?;
    let lead_time = duration_from_value(&raw.temporal.lead_time)
        .map_err(|e| SpecError::Parse(format!("temporal.lead_time: {e}")))?;
    let cool_down_time = duration_from_value(&raw.temporal.cool_down_time)
        .map_err(|e| SpecError::Parse(format!("temporal.cool_down_time: {e}")))?;

    let target_size = match raw.target_size {
        None => DEFAULT_TARGET_SIZE,
        Some(n) if n >= 1 => n as usize,
        // zero and negatives are reported by validation
        Some(_) => 0,
    };

    let spec = CollectionSpecification {
        name: raw.name,
        topical: TopicalScope {
            reference_documents,
            keywords: raw.topical.keywords,
            language: raw.topical.language,
        },
        temporal: TemporalScope {
            event_start,
            event_end,
            lead_time,
            cool_down_time,
        },
        seeds: raw.seeds,
        target_size,
        alpha: raw.alpha.unwrap_or(DEFAULT_ALPHA),
    };
    Ok(spec)
}

fn read_spec(path: &Path) -> Result<String, SpecError> {
    std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_spec(path: &Path) -> Result<CollectionSpecification, SpecError> {
    parse_spec(&read_spec(path)?)
}

pub fn load_spec_unchecked(path: &Path) -> Result<CollectionSpecification, SpecError> {
    parse_spec_unchecked(&read_spec(path)?)
}

/// Serializes a specification into the JSON format read by [`parse_spec`].
/// Timestamps are written as RFC 3339 in UTC and durations as seconds.
pub fn serialize_spec(spec: &CollectionSpecification) -> String {
    let raw = RawSpec {
        name: spec.name.clone(),
        topical: RawTopical {
            reference_documents: spec
                .topical
                .reference_documents
                .iter()
                .map(|r| match r {
                    ReferenceDocument::Inline(v) => RawReference {
                        kind: "inline".into(),
                        value: v.clone(),
                    },
                    ReferenceDocument::File(p) => RawReference {
                        kind: "file".into(),
                        value: p.to_string_lossy().into_owned(),
                    },
                    ReferenceDocument::ArchiveUrl(u) => RawReference {
                        kind: "archive-url".into(),
                        value: u.clone(),
                    },
                })
                .collect(),
            keywords: spec.topical.keywords.clone(),
            language: spec.topical.language.clone(),
        },
        temporal: RawTemporal {
            event_start: format_timestamp(spec.temporal.event_start),
            event_end: format_timestamp(spec.temporal.event_end),
            lead_time: Value::from(spec.temporal.lead_time),
            cool_down_time: Value::from(spec.temporal.cool_down_time),
        },
        seeds: spec.seeds.clone(),
        target_size: Some(spec.target_size as i64),
        alpha: Some(spec.alpha),
    };
    serde_json::to_string_pretty(&raw).expect("spec serialization cannot fail")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Start,
    End,
}

pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Parses an ISO-8601 date or date-time. Date-only values expand to the
/// first or last second of that day depending on `bound`.
pub fn parse_timestamp(s: &str, bound: Bound) -> Result<DateTime<Utc>, String> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(Utc.from_utc_datetime(&t));
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        let time = match bound {
            Bound::Start => NaiveTime::from_hms_opt(0, 0, 0),
            Bound::End => NaiveTime::from_hms_opt(23, 59, 59),
        }
        .expect("valid time of day");
        return Ok(Utc.from_utc_datetime(&d.and_time(time)));
    }
    Err(format!("invalid timestamp {s:?}"))
}

fn duration_from_value(v: &Value) -> Result<i64, String> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .or_else(|| n.as_f64().map(|f| f.round() as i64))
            .ok_or_else(|| format!("invalid duration {n}")),
        Value::String(s) => parse_duration(s),
        other => Err(format!("invalid duration {other}")),
    }
}

/// Parses a duration such as `"2w"`, `"3d"`, `"6m"` (months) or `"3600"` into
/// seconds.
pub fn parse_duration(s: &str) -> Result<i64, String> {
    let s = s.trim();
    let split = s
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-'))
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let value: f64 = num
        .parse()
        .map_err(|_| format!("invalid duration {s:?}"))?;
    let scale: f64 = match unit.trim().to_ascii_lowercase().as_str() {
        "" | "s" | "sec" | "secs" | "seconds" => 1.0,
        "min" | "mins" | "minutes" => 60.0,
        "h" | "hours" => 3_600.0,
        "d" | "days" => 86_400.0,
        "w" | "weeks" => 7.0 * 86_400.0,
        "m" | "mo" | "months" => 30.0 * 86_400.0,
        "y" | "years" => 365.0 * 86_400.0,
        other => return Err(format!("unknown duration unit {other:?}")),
    };
    Ok((value * scale).round() as i64)
}
