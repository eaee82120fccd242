//! Synthetic mini-archives with a planted event-relevant cluster.
//!
//! Relevant pages draw most of their words from a dedicated vocabulary,
//! are published and captured around the event, and link to each other
//! with probability `topical_locality`. A fixed fraction of link targets
//! point at URLs that are never archived.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::archive::warc::{http_message, WarcRecord, WarcWriter};
use crate::archive::format_timestamp14;
use crate::collection_spec::{
    format_timestamp, serialize_spec, CollectionSpecification, ReferenceDocument, TemporalScope, TopicalScope,
};
use crate::error::EvalError;
use crate::html::html_to_text;
use crate::text::{Analyzer, IdfDictionary, Language};

pub const GROUND_TRUTH_CSV: &str = "ground_truth.csv";
pub const SPEC_JSON: &str = "spec.json";
pub const IDF_TSV: &str = "idf.tsv";

/// Two clusters sharing the event vocabulary that differ only in which
/// marker word their pages repeat.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusableCluster {
    /// Fraction of pages in the decoy cluster.
    pub decoy_fraction: f64,
    pub target_keyword: String,
    pub decoy_keyword: String,
    /// Probability that a cluster link stays within its own sub-cluster.
    pub cluster_cohesion: f64,
    /// Share of words that are the cluster's marker, on pages and in the
    /// reference text alike.
    pub marker_share: f64,
}

impl Default for ConfusableCluster {
    fn default() -> Self {
        ConfusableCluster {
            decoy_fraction: 0.1,
            target_keyword: "zentralwahl".into(),
            decoy_keyword: "vorentscheid".into(),
            cluster_cohesion: 0.8,
            marker_share: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticArchiveConfig {
    pub page_count: usize,
    pub relevant_fraction: f64,
    /// Probability that a link stays within the linking page's own class
    /// (relevant, decoy or background); other links target any page.
    pub topical_locality: f64,
    pub event_scope: TemporalScope,
    /// Seconds around the event over which background captures spread.
    pub capture_time_spread: i64,
    pub relevant_vocabulary: usize,
    pub background_vocabulary: usize,
    /// Fraction of link targets deliberately left out of the archive.
    pub omit_fraction: f64,
    pub links_per_page: usize,
    /// Fraction of background pages acting as navigation hubs: they carry
    /// `hub_link_factor` times the usual out-degree, and relevant pages'
    /// off-topic links point at them.
    pub hub_fraction: f64,
    pub hub_link_factor: usize,
    pub words_per_page: usize,
    pub seed_count: usize,
    pub pages_per_warc: usize,
    pub confusable: Option<ConfusableCluster>,
    pub random_seed: u64,
}

impl SyntheticArchiveConfig {
    pub fn new(page_count: usize, relevant_fraction: f64, topical_locality: f64, random_seed: u64) -> Self {
        let start = DateTime::parse_from_rfc3339("2010-06-01T00:00:00Z")
            .expect("static date")
            .with_timezone(&Utc);
        SyntheticArchiveConfig {
            page_count,
            relevant_fraction,
            topical_locality,
            event_scope: TemporalScope::new(start, start + Duration::days(30) - Duration::seconds(1), 30 * 86_400, 60 * 86_400),
            capture_time_spread: 3 * 365 * 86_400,
            relevant_vocabulary: 150,
            background_vocabulary: 3000,
            omit_fraction: 0.05,
            links_per_page: 8,
            hub_fraction: 0.1,
            hub_link_factor: 5,
            words_per_page: 120,
            seed_count: 5,
            pages_per_warc: 1000,
            confusable: None,
            random_seed,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::InvalidConfig(m.to_string()));
        if self.page_count < 10 {
            return bad("page_count must be at least 10");
        }
        if !(self.relevant_fraction > 0.0 && self.relevant_fraction < 1.0) {
            return bad("relevant_fraction must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.topical_locality) {
            return bad("topical_locality must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.hub_fraction) || self.hub_link_factor == 0 {
            return bad("hub_fraction must lie in [0, 1] and hub_link_factor be positive");
        }
        if !(0.0..1.0).contains(&self.omit_fraction) {
            return bad("omit_fraction must lie in [0, 1)");
        }
        if self.relevant_vocabulary == 0 || self.background_vocabulary == 0 {
            return bad("vocabularies must be non-empty");
        }
        if self.links_per_page == 0 || self.words_per_page == 0 || self.seed_count == 0 || self.pages_per_warc == 0 {
            return bad("links_per_page, words_per_page, seed_count and pages_per_warc must be positive");
        }
        if let Some(c) = &self.confusable {
            if !(c.decoy_fraction > 0.0 && c.decoy_fraction + self.relevant_fraction < 1.0) {
                return bad("decoy_fraction must be positive and leave room for background pages");
            }
            if !(0.0..1.0).contains(&c.marker_share) {
                return bad("marker_share must lie in [0, 1)");
            }
            if c.target_keyword.trim().is_empty() || c.decoy_keyword.trim().is_empty() {
                return bad("cluster keywords must be non-empty");
            }
        }
        Ok(())
    }

    pub fn relevant_count(&self) -> usize {
        ((self.page_count as f64) * self.relevant_fraction).round() as usize
    }

    pub fn decoy_count(&self) -> usize {
        self.confusable
            .as_ref()
            .map_or(0, |c| ((self.page_count as f64) * c.decoy_fraction).round() as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PageLabel {
    Relevant,
    Decoy,
    Background,
    /// Linked to but never archived.
    Omitted,
}

impl PageLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PageLabel::Relevant => "relevant",
            PageLabel::Decoy => "decoy",
            PageLabel::Background => "background",
            PageLabel::Omitted => "omitted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthEntry {
    pub url: String,
    pub label: PageLabel,
    /// Earliest capture; `None` for omitted URLs.
    pub capture_time: Option<DateTime<Utc>>,
}

/// SHA-256 of one archived HTML payload, keyed by URL and capture time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PayloadDigest {
    pub url: String,
    pub capture_time: String,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct GeneratedArchive {
    pub warc_paths: Vec<PathBuf>,
    pub ground_truth: Vec<GroundTruthEntry>,
    pub omitted: BTreeSet<String>,
    /// Digests of every HTTP 200 HTML payload written.
    pub payloads: Vec<PayloadDigest>,
    /// A specification matching the planted cluster (no keywords).
    pub spec: CollectionSpecification,
    pub relevant_vocabulary: Vec<String>,
    /// Document frequencies over all archived pages.
    pub idf: IdfDictionary,
}

impl GeneratedArchive {
    pub fn labels(&self) -> BTreeMap<&str, PageLabel> {
        self.ground_truth.iter().map(|g| (g.url.as_str(), g.label)).collect()
    }
}

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

fn pseudo_words(rng: &mut ChaCha8Rng, count: usize, taken: &mut HashSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let syllables = rng.gen_range(2..=4);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char);
            w.push(VOWELS[rng.gen_range(0..VOWELS.len())] as char);
        }
        w.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())] as char);
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Skewed pick favouring low ranks, a rough stand-in for a Zipf law.
fn skewed<'a>(rng: &mut ChaCha8Rng, words: &'a [String]) -> &'a str {
    let u: f64 = rng.gen();
    let i = ((u * u) * words.len() as f64) as usize;
    &words[i.min(words.len() - 1)]
}

fn random_time(rng: &mut ChaCha8Rng, from: DateTime<Utc>, to: DateTime<Utc>) -> DateTime<Utc> {
    let span = (to - from).num_seconds().max(0);
    from + Duration::seconds(rng.gen_range(0..=span))
}

struct PlannedPage {
    url: String,
    label: PageLabel,
    words: Vec<String>,
    links: Vec<String>,
    published: Option<DateTime<Utc>>,
    captures: Vec<DateTime<Utc>>,
}

/// Writes the archive, `ground_truth.csv` and `spec.json` into `out_dir`.
/// Output is byte-identical for identical configs.
pub fn generate_archive(config: &SyntheticArchiveConfig, out_dir: &Path) -> Result<GeneratedArchive, EvalError> {
    config.validate()?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| EvalError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.random_seed);
    let mut taken: HashSet<String> = HashSet::new();
    if let Some(c) = &config.confusable {
        taken.insert(c.target_keyword.clone());
        taken.insert(c.decoy_keyword.clone());
    }
    let relevant_vocab = pseudo_words(&mut rng, config.relevant_vocabulary, &mut taken);
    let background_vocab = pseudo_words(&mut rng, config.background_vocabulary, &mut taken);

    let n = config.page_count;
    let n_rel = config.relevant_count().clamp(1, n - 1);
    let n_decoy = config.decoy_count().min(n - n_rel - 1);
    let mut labels: Vec<PageLabel> = (0..n)
        .map(|i| {
            if i < n_rel {
                PageLabel::Relevant
            } else if i < n_rel + n_decoy {
                PageLabel::Decoy
            } else {
                PageLabel::Background
            }
        })
        .collect();
    labels.shuffle(&mut rng);

    let hosts = (n / 25).max(2);
    let scope = config.event_scope;
    let urls: Vec<String> = (0..n)
        .map(|i| {
            let host = i % hosts;
            let dated = labels[i] != PageLabel::Background && rng.gen_bool(0.2);
            if dated {
                let d = random_time(&mut rng, scope.event_start, scope.event_end);
                format!("http://site{host}.example/{}/page{i}.html", d.format("%Y/%m/%d"))
            } else {
                format!("http://site{host}.example/page{i}.html")
            }
        })
        .collect();

    let by_label = |l: PageLabel| -> Vec<usize> { (0..n).filter(|&i| labels[i] == l).collect() };
    let relevant_idx = by_label(PageLabel::Relevant);
    let decoy_idx = by_label(PageLabel::Decoy);
    let background_idx = by_label(PageLabel::Background);

    let hub_count = ((background_idx.len() as f64) * config.hub_fraction).round() as usize;
    let hubs: Vec<usize> = background_idx.choose_multiple(&mut rng, hub_count).copied().collect();
    let hub_set: HashSet<usize> = hubs.iter().copied().collect();

    // link targets as page indices
    let mut link_targets: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (i, &label) in labels.iter().enumerate() {
        let degree = if hub_set.contains(&i) {
            config.links_per_page * config.hub_link_factor
        } else {
            config.links_per_page
        };
        let count = rng.gen_range(degree / 2 + 1..=degree * 3 / 2);
        let mut targets = Vec::with_capacity(count);
        for _ in 0..count {
            let local = rng.gen_bool(config.topical_locality);
            let target = if local && label == PageLabel::Background {
                background_idx[rng.gen_range(0..background_idx.len())]
            } else if local {
                let own = if label == PageLabel::Decoy { &decoy_idx } else { &relevant_idx };
                let other = if label == PageLabel::Decoy { &relevant_idx } else { &decoy_idx };
                let cohesion = config.confusable.as_ref().map_or(1.0, |c| c.cluster_cohesion);
                if other.is_empty() || rng.gen_bool(cohesion) {
                    own[rng.gen_range(0..own.len())]
                } else {
                    other[rng.gen_range(0..other.len())]
                }
            } else if label != PageLabel::Background && !hubs.is_empty() {
                hubs[rng.gen_range(0..hubs.len())]
            } else {
                rng.gen_range(0..n)
            };
            if target != i {
                targets.push(target);
            }
        }
        link_targets.push(targets);
    }

    // choose exactly round(total * omit_fraction) link slots to point nowhere
    let slots: Vec<(usize, usize)> = link_targets
        .iter()
        .enumerate()
        .flat_map(|(i, t)| (0..t.len()).map(move |j| (i, j)))
        .collect();
    let omit_count = ((slots.len() as f64) * config.omit_fraction).round() as usize;
    let mut omitted_slots: Vec<(usize, usize)> = slots.choose_multiple(&mut rng, omit_count).copied().collect();
    omitted_slots.sort_unstable();
    let omitted_set: HashSet<(usize, usize)> = omitted_slots.iter().copied().collect();

    let mut pages: Vec<PlannedPage> = Vec::with_capacity(n);
    let mut omitted_urls: Vec<String> = Vec::new();
    for i in 0..n {
        let label = labels[i];
        let mut links = Vec::with_capacity(link_targets[i].len());
        for (j, &t) in link_targets[i].iter().enumerate() {
            if omitted_set.contains(&(i, j)) {
                let url = format!("http://site{}.example/gone{}.html", t % hosts, omitted_urls.len());
                omitted_urls.push(url.clone());
                links.push(url);
            } else {
                links.push(urls[t].clone());
            }
        }

        let clustered = label != PageLabel::Background;
        let share = if clustered { 0.6 } else { 0.03 };
        let mut words: Vec<String> = (0..config.words_per_page)
            .map(|_| {
                if rng.gen_bool(share) {
                    skewed(&mut rng, &relevant_vocab).to_string()
                } else {
                    skewed(&mut rng, &background_vocab).to_string()
                }
            })
            .collect();
        if let Some(c) = &config.confusable {
            let marker = match label {
                PageLabel::Relevant => Some(&c.target_keyword),
                PageLabel::Decoy => Some(&c.decoy_keyword),
                _ => None,
            };
            if let Some(m) = marker {
                let count = ((config.words_per_page as f64) * c.marker_share).round().max(1.0) as usize;
                for _ in 0..count {
                    let at = rng.gen_range(0..=words.len());
                    words.insert(at, m.clone());
                }
            }
        }

        let lead = Duration::seconds(scope.lead_time);
        let cool = Duration::seconds(scope.cool_down_time);
        let spread = Duration::seconds(config.capture_time_spread);
        let (published, first_capture) = if clustered {
            let published = random_time(&mut rng, scope.event_start - lead, scope.event_end + cool);
            let capture = random_time(&mut rng, published, published + Duration::days(20));
            (rng.gen_bool(0.7).then_some(published), capture)
        } else {
            let published = random_time(&mut rng, scope.event_start - spread, scope.event_end + spread);
            let capture = random_time(&mut rng, published, published + Duration::days(60));
            (rng.gen_bool(0.6).then_some(published), capture)
        };
        let mut captures = vec![first_capture];
        for _ in 0..rng.gen_range(0..=2) {
            let last = *captures.last().expect("non-empty");
            captures.push(last + Duration::seconds(rng.gen_range(86_400..=200 * 86_400)));
        }
        pages.push(PlannedPage {
            url: urls[i].clone(),
            label,
            words,
            links,
            published,
            captures,
        });
    }

    // seeds: cluster pages, at least one from the relevant side
    let mut cluster: Vec<usize> = relevant_idx.iter().chain(decoy_idx.iter()).copied().collect();
    cluster.sort_unstable();
    let mut seeds: Vec<usize> = vec![relevant_idx[rng.gen_range(0..relevant_idx.len())]];
    let extra: Vec<usize> = cluster
        .choose_multiple(&mut rng, config.seed_count.min(cluster.len()))
        .copied()
        .collect();
    for s in extra {
        if seeds.len() < config.seed_count && !seeds.contains(&s) {
            seeds.push(s);
        }
    }

    let mut reference_words: Vec<String> = (0..400).map(|_| skewed(&mut rng, &relevant_vocab).to_string()).collect();
    if let Some(c) = &config.confusable {
        let count = (400.0 * c.marker_share).round().max(1.0) as usize;
        for _ in 0..count {
            let a = rng.gen_range(0..=reference_words.len());
            reference_words.insert(a, c.target_keyword.clone());
            let b = rng.gen_range(0..=reference_words.len());
            reference_words.insert(b, c.decoy_keyword.clone());
        }
    }

    // WARC output
    let analyzer = Analyzer::new(Language::English);
    let mut page_terms: Vec<Vec<String>> = Vec::with_capacity(n);
    let mut warc_paths = Vec::new();
    let mut payloads = Vec::new();
    for (chunk_no, chunk) in pages.chunks(config.pages_per_warc).enumerate() {
        let gzip = chunk_no % 2 == 0;
        let name = if gzip {
            format!("synthetic-{chunk_no:05}.warc.gz")
        } else {
            format!("synthetic-{chunk_no:05}.warc")
        };
        let path = out_dir.join(name);
        let file = File::create(&path).map_err(io(&path))?;
        let mut writer = WarcWriter::new(BufWriter::new(file), gzip);
        for page in chunk {
            let body = render_page(page);
            page_terms.push(analyzer.analyze(&html_to_text(&body)));
            for (k, capture) in page.captures.iter().enumerate() {
                let date = format_timestamp(*capture);
                let message = http_message(200, "OK", &[("Content-Type", "text/html; charset=utf-8")], body.as_bytes());
                writer
                    .write_record(&WarcRecord::response(&page.url, &date, message))
                    .map_err(io(&path))?;
                payloads.push(PayloadDigest {
                    url: page.url.clone(),
                    capture_time: format_timestamp14(*capture),
                    sha256: hex::encode(Sha256::digest(body.as_bytes())),
                });
                // an occasional redirect capture, which indexing must skip
                if k == 0 && rng.gen_bool(0.02) {
                    let later = format_timestamp(*capture + Duration::days(400));
                    let redirect = http_message(301, "Moved Permanently", &[("Location", "/"), ("Content-Type", "text/html")], b"");
                    writer
                        .write_record(&WarcRecord::response(&page.url, &later, redirect))
                        .map_err(io(&path))?;
                }
            }
        }
        std::io::Write::flush(&mut writer.into_inner()).map_err(io(&path))?;
        warc_paths.push(path);
    }

    let mut ground_truth: Vec<GroundTruthEntry> = pages
        .iter()
        .map(|p| GroundTruthEntry {
            url: p.url.clone(),
            label: p.label,
            capture_time: p.captures.first().copied(),
        })
        .collect();
    ground_truth.extend(omitted_urls.iter().map(|u| GroundTruthEntry {
        url: u.clone(),
        label: PageLabel::Omitted,
        capture_time: None,
    }));
    ground_truth.sort_by(|a, b| a.url.cmp(&b.url));
    write_ground_truth(&ground_truth, &out_dir.join(GROUND_TRUTH_CSV))?;

    let spec = CollectionSpecification {
        name: format!("synthetic-{}", config.random_seed),
        topical: TopicalScope {
            reference_documents: vec![ReferenceDocument::Inline(reference_words.join(" "))],
            keywords: Vec::new(),
            language: "en".into(),
        },
        temporal: scope,
        seeds: seeds.iter().map(|&s| urls[s].clone()).collect(),
        target_size: crate::collection_spec::DEFAULT_TARGET_SIZE,
        alpha: crate::collection_spec::DEFAULT_ALPHA,
    };
    let spec_path = out_dir.join(SPEC_JSON);
    std::fs::write(&spec_path, serialize_spec(&spec)).map_err(io(&spec_path))?;

    let idf = IdfDictionary::from_documents(&page_terms)?;
    idf.save(&out_dir.join(IDF_TSV))?;

    payloads.sort();
    Ok(GeneratedArchive {
        warc_paths,
        ground_truth,
        omitted: omitted_urls.into_iter().collect(),
        payloads,
        spec,
        relevant_vocabulary: relevant_vocab,
        idf,
    })
}

fn render_page(page: &PlannedPage) -> String {
    let mut html = String::with_capacity(4096);
    html.push_str("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">");
    let title: Vec<&str> = page.words.iter().take(4).map(String::as_str).collect();
    html.push_str(&format!("<title>{}</title>", title.join(" ")));
    if let Some(p) = page.published {
        html.push_str(&format!(
            "<meta property=\"article:published_time\" content=\"{}\">",
            format_timestamp(p)
        ));
    }
    html.push_str("</head>\n<body><p>");
    html.push_str(&page.words.join(" "));
    html.push_str("</p>\n<ul>");
    let own_host = host_of(&page.url);
    for (k, link) in page.links.iter().enumerate() {
        // same-host links are written relative to exercise resolution
        let href = if host_of(link) == own_host {
            &link[link.find(".example").map_or(0, |p| p + ".example".len())..]
        } else {
            link.as_str()
        };
        html.push_str(&format!("<li><a href=\"{href}\">link {k}</a></li>"));
    }
    html.push_str("</ul></body></html>\n");
    html
}

fn host_of(url: &str) -> &str {
    url.trim_start_matches("http://").split('/').next().unwrap_or("")
}

fn write_ground_truth(entries: &[GroundTruthEntry], path: &Path) -> Result<(), EvalError> {
    let err = |e: csv::Error| EvalError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["url", "label", "capture_time"]).map_err(err)?;
    for e in entries {
        w.write_record([
            e.url.as_str(),
            e.label.as_str(),
            &e.capture_time.map(format_timestamp14).unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })
}
