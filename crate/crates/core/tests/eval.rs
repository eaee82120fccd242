use std::sync::OnceLock;

use eventcrawl::archive::ArchiveIndex;
use eventcrawl::crawler::{CrawlConfig, Crawler};
use eventcrawl::eval::{
    generate_archive, mean_std, run_comparison, ComparisonSettings, GeneratedArchive, PageLabel,
    SyntheticArchiveConfig,
};
use eventcrawl::CrawlStrategy;
use regex::Regex;

struct Fixture {
    _dir: tempfile::TempDir,
    archive: GeneratedArchive,
    index: ArchiveIndex,
}

fn fixture(config: &SyntheticArchiveConfig) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let archive = generate_archive(config, dir.path()).unwrap();
    let index = ArchiveIndex::from_warcs(&archive.warc_paths).unwrap().0;
    Fixture {
        _dir: dir,
        archive,
        index,
    }
}

fn shared() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| fixture(&SyntheticArchiveConfig::new(2000, 0.1, 0.8, 21)))
}

#[test]
fn combined_dominates_unfocused_after_warm_up() {
    let f = shared();
    let mut spec = f.archive.spec.clone();
    spec.target_size = 600;
    let strategies = [CrawlStrategy::Unfocused, CrawlStrategy::Combined];
    let report = run_comparison(&spec, &f.index, &strategies, &f.archive.idf, &ComparisonSettings::new(50)).unwrap();
    let base = report.series_for(CrawlStrategy::Unfocused).unwrap();
    let ctf = report.series_for(CrawlStrategy::Combined).unwrap();
    assert_eq!(base.points.len(), 12);
    for (b, c) in base.points.iter().zip(&ctf.points).skip(2) {
        assert_eq!(b.0, c.0);
        assert!(c.1 > b.1, "at {} documents: ct-f {} vs unfocused {}", b.0, c.1, b.1);
    }
}

#[test]
fn exactly_hundred_relevant_pages() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate_archive(&SyntheticArchiveConfig::new(1000, 0.1, 0.8, 4), dir.path()).unwrap();
    let relevant = g.ground_truth.iter().filter(|e| e.label == PageLabel::Relevant).count();
    assert_eq!(relevant, 100);
}

#[test]
fn omitted_share_of_link_targets() {
    let f = shared();
    let anchor = Regex::new(r#"<a href=""#).unwrap();
    let mut slots = 0;
    for url in f.index.urls() {
        let doc = f.index.fetch_document(&f.index.snapshots(url)[0]).unwrap();
        slots += anchor.find_iter(&String::from_utf8_lossy(doc.body())).count();
    }
    let expected = (slots as f64 * 0.05).round() as usize;
    assert_eq!(f.archive.omitted.len(), expected);
    for u in &f.archive.omitted {
        assert!(f.index.resolve_snapshots(u).is_empty());
    }
}

#[test]
fn ground_truth_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    generate_archive(&SyntheticArchiveConfig::new(50, 0.2, 0.8, 1), dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("ground_truth.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("url,label,capture_time"));
    for l in lines {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols.len(), 3);
        match cols[1] {
            "omitted" => assert_eq!(cols[2], ""),
            "relevant" | "background" => assert_eq!(cols[2].len(), 14),
            other => panic!("unexpected label {other}"),
        }
    }
}

/// Full unfocused crawl of the archive: per-document relevance should sit
/// near relevant_fraction x mean relevant-page score.
#[test]
fn unfocused_sanity_band() {
    let mut observed = Vec::new();
    let mut predicted = Vec::new();
    for seed in 31..36 {
        let f = fixture(&SyntheticArchiveConfig::new(600, 0.1, 0.8, seed));
        let mut spec = f.archive.spec.clone();
        spec.target_size = 600;
        let report = run_comparison(
            &spec,
            &f.index,
            &[CrawlStrategy::Unfocused],
            &f.archive.idf,
            &ComparisonSettings::new(100),
        )
        .unwrap();
        let s = &report.series[0];
        observed.push(s.final_relevance() / s.fetched as f64);

        let crawler = Crawler::new(&spec, &f.index, &f.archive.idf, CrawlConfig::default()).unwrap();
        let labels = f.archive.labels();
        let scores: Vec<f64> = f
            .index
            .urls()
            .into_iter()
            .filter(|u| labels.get(u) == Some(&PageLabel::Relevant))
            .map(|u| crawler.assess(&f.index.fetch_document(&f.index.snapshots(u)[0]).unwrap()).topical)
            .collect();
        predicted.push(0.1 * mean_std(&scores).0);
    }
    let (obs, _) = mean_std(&observed);
    let (pred, _) = mean_std(&predicted);
    assert!((obs - pred).abs() <= 0.5 * pred, "observed {obs:.5}, predicted {pred:.5}");
}
