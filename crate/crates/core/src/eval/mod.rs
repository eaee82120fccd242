//! Strategy comparison on archives, plus the synthetic archive generator.

mod generator;

pub use generator::{
    generate_archive, ConfusableCluster, GeneratedArchive, GroundTruthEntry, PageLabel, PayloadDigest,
    SyntheticArchiveConfig, GROUND_TRUTH_CSV, IDF_TSV, SPEC_JSON,
};

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::archive::ArchiveIndex;
use crate::collection_spec::CollectionSpecification;
use crate::crawler::{CrawlConfig, CrawlResult, CrawlStrategy, Crawler};
use crate::error::EvalError;
use crate::html::Page;
use crate::relevance::topical_relevance;
use crate::text::{IdfDictionary, TermVector};

pub const RELEVANCE_CSV: &str = "relevance.csv";
pub const SUMMARY_CSV: &str = "summary.csv";

/// What one strategy's crawl contributes to a report.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome {
    /// Evaluation relevance of each fetched document, in fetch order.
    pub relevances: Vec<f64>,
    pub fetched: usize,
    pub missing: usize,
    pub queued_at_end: usize,
}

impl StrategyOutcome {
    pub fn from_crawl(result: &CrawlResult) -> StrategyOutcome {
        StrategyOutcome {
            relevances: result.collection.iter().map(|d| d.score.topical).collect(),
            fetched: result.collection.len(),
            missing: result.missing.len(),
            queued_at_end: result.queued_at_end.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategySeries {
    pub strategy: CrawlStrategy,
    /// (documents_downloaded, accumulated_relevance)
    pub points: Vec<(usize, f64)>,
    pub fetched: usize,
    pub missing: usize,
    pub queued_at_end: usize,
}

impl StrategySeries {
    pub fn urls_considered(&self) -> usize {
        self.fetched + self.missing + self.queued_at_end
    }

    pub fn final_relevance(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.1)
    }

    /// Accumulated relevance after `downloaded` documents, if that is a
    /// recorded point.
    pub fn at(&self, downloaded: usize) -> Option<f64> {
        self.points.iter().find(|p| p.0 == downloaded).map(|p| p.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyFailure {
    pub strategy: CrawlStrategy,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub budget: usize,
    pub checkpoint_interval: usize,
    /// In the order the strategies were requested.
    pub series: Vec<StrategySeries>,
    pub failures: Vec<StrategyFailure>,
}

impl EvalReport {
    pub fn series_for(&self, strategy: CrawlStrategy) -> Option<&StrategySeries> {
        self.series.iter().find(|s| s.strategy == strategy)
    }

    pub fn discovered_url_counts(&self) -> BTreeMap<CrawlStrategy, usize> {
        self.series.iter().map(|s| (s.strategy, s.urls_considered())).collect()
    }

    /// Final accumulated relevance of each strategy over the unfocused run.
    /// Empty when unfocused was not run or collected nothing relevant.
    pub fn improvement_ratios(&self) -> BTreeMap<CrawlStrategy, f64> {
        let Some(base) = self.series_for(CrawlStrategy::Unfocused).map(StrategySeries::final_relevance) else {
            return BTreeMap::new();
        };
        if base <= 0.0 {
            return BTreeMap::new();
        }
        self.series.iter().map(|s| (s.strategy, s.final_relevance() / base)).collect()
    }

    pub fn write_relevance_csv(&self, out: impl Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["strategy", "documents_downloaded", "accumulated_relevance"])?;
        for s in &self.series {
            for (n, acc) in &s.points {
                w.write_record([s.strategy.name(), &n.to_string(), &format!("{acc:.6}")])?;
            }
        }
        w.flush()
    }

    pub fn write_summary_csv(&self, out: impl Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["strategy", "urls_considered", "fetched", "missing", "queued_at_end"])?;
        for s in &self.series {
            w.write_record([
                s.strategy.name().to_string(),
                s.urls_considered().to_string(),
                s.fetched.to_string(),
                s.missing.to_string(),
                s.queued_at_end.to_string(),
            ])?;
        }
        w.flush()
    }

    /// Writes `relevance.csv` and `summary.csv` into `dir`.
    pub fn write_csvs(&self, dir: &Path) -> Result<(), EvalError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| EvalError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let path = dir.join(RELEVANCE_CSV);
        self.write_relevance_csv(std::fs::File::create(&path).map_err(io(&path))?)
            .map_err(io(&path))?;
        let path = dir.join(SUMMARY_CSV);
        self.write_summary_csv(std::fs::File::create(&path).map_err(io(&path))?)
            .map_err(io(&path))?;
        Ok(())
    }
}

/// Checkpoints at every multiple of `interval`, plus the final count when it
/// is not one.
pub fn checkpoints(relevances: &[f64], interval: usize) -> Vec<(usize, f64)> {
    let mut points = Vec::new();
    let mut acc = 0.0;
    for (i, r) in relevances.iter().enumerate() {
        acc += r;
        if (i + 1) % interval == 0 {
            points.push((i + 1, acc));
        }
    }
    if relevances.is_empty() || !relevances.len().is_multiple_of(interval) {
        points.push((relevances.len(), acc));
    }
    points
}

#[derive(Debug, Clone, Default)]
pub struct ComparisonSettings {
    pub checkpoint_interval: usize,
    pub config: CrawlConfig,
    /// Score fetched documents against this vector instead of the crawl's
    /// own reference, so that variants of a specification are judged alike.
    pub evaluation_reference: Option<TermVector>,
}

impl ComparisonSettings {
    pub fn new(checkpoint_interval: usize) -> ComparisonSettings {
        ComparisonSettings {
            checkpoint_interval,
            ..ComparisonSettings::default()
        }
    }
}

/// Assembles a report from per-strategy runners executed in parallel. A
/// failing runner is recorded and does not affect the others.
pub fn run_comparison_with<F>(
    strategies: &[CrawlStrategy],
    budget: usize,
    checkpoint_interval: usize,
    runner: F,
) -> Result<EvalReport, EvalError>
where
    F: Fn(CrawlStrategy) -> Result<StrategyOutcome, String> + Sync,
{
    if checkpoint_interval == 0 {
        return Err(EvalError::ZeroCheckpoint);
    }
    let outcomes: Vec<Result<StrategyOutcome, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = strategies
            .iter()
            .map(|&s| {
                let runner = &runner;
                scope.spawn(move || runner(s))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("crawl panicked".to_string())))
            .collect()
    });

    let mut series = Vec::new();
    let mut failures = Vec::new();
    for (&strategy, outcome) in strategies.iter().zip(outcomes) {
        match outcome {
            Ok(o) => series.push(StrategySeries {
                strategy,
                points: checkpoints(&o.relevances, checkpoint_interval),
                fetched: o.fetched,
                missing: o.missing,
                queued_at_end: o.queued_at_end,
            }),
            Err(message) => {
                log::error!("strategy {} failed: {message}", strategy.name());
                failures.push(StrategyFailure { strategy, message });
            }
        }
    }
    Ok(EvalReport {
        budget,
        checkpoint_interval,
        series,
        failures,
    })
}

/// Crawls `index` once per strategy with the specification's budget and
/// records accumulated topical relevance.
pub fn run_comparison(
    spec: &CollectionSpecification,
    index: &ArchiveIndex,
    strategies: &[CrawlStrategy],
    idf: &IdfDictionary,
    settings: &ComparisonSettings,
) -> Result<EvalReport, EvalError> {
    if settings.checkpoint_interval == 0 {
        return Err(EvalError::ZeroCheckpoint);
    }
    let crawler = Crawler::new(spec, index, idf, settings.config.clone())?;
    run_comparison_with(strategies, spec.target_size, settings.checkpoint_interval, |strategy| {
        let result = crawler.run(strategy);
        let mut outcome = StrategyOutcome::from_crawl(&result);
        if let Some(reference) = &settings.evaluation_reference {
            outcome.relevances = result
                .collection
                .iter()
                .map(|d| {
                    let doc = index.fetch_document(&d.snapshot).map_err(|e| e.to_string())?;
                    Ok(topical_relevance(&crawler.document_vector(&Page::parse(&doc)), reference))
                })
                .collect::<Result<_, String>>()?;
        }
        Ok(outcome)
    })
}

/// Per-strategy ratio of final accumulated relevance, variant over base.
pub fn compare_variants(base: &EvalReport, variant: &EvalReport) -> Result<BTreeMap<CrawlStrategy, f64>, EvalError> {
    if base.budget != variant.budget {
        return Err(EvalError::MismatchedBudgets {
            base: base.budget,
            variant: variant.budget,
        });
    }
    let mut ratios = BTreeMap::new();
    for b in &base.series {
        let Some(v) = variant.series_for(b.strategy) else { continue };
        let denominator = b.final_relevance();
        if denominator <= 0.0 {
            return Err(EvalError::UndefinedRatio(b.strategy.name().to_string()));
        }
        ratios.insert(b.strategy, v.final_relevance() / denominator);
    }
    Ok(ratios)
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn outcome(relevances: Vec<f64>) -> StrategyOutcome {
        let fetched = relevances.len();
        StrategyOutcome {
            relevances,
            fetched,
            missing: 2,
            queued_at_end: 5,
        }
    }

    #[test]
    fn ten_checkpoints_for_budget_thousand() {
        let r = run_comparison_with(&[CrawlStrategy::Combined], 1000, 100, |_| Ok(outcome(vec![0.5; 1000]))).unwrap();
        assert_eq!(r.series.len(), 1);
        let points = &r.series[0].points;
        assert_eq!(points.len(), 10);
        assert_eq!(points[0], (100, 50.0));
        assert_eq!(points[9].0, 1000);
        assert_eq!(r.series[0].urls_considered(), 1007);
    }

    #[test]
    fn partial_final_checkpoint() {
        let p = checkpoints(&[1.0; 25], 10);
        assert_eq!(p.iter().map(|x| x.0).collect::<Vec<_>>(), [10, 20, 25]);
        assert_eq!(checkpoints(&[], 10), [(0, 0.0)]);
    }

    #[test]
    fn zero_checkpoint_rejected() {
        let e = run_comparison_with(&[CrawlStrategy::Combined], 10, 0, |_| Ok(outcome(vec![]))).unwrap_err();
        assert_eq!(e.to_string(), "checkpoint must be positive");
    }

    #[test]
    fn failure_isolated() {
        let r = run_comparison_with(&CrawlStrategy::ALL, 10, 5, |s| {
            if s == CrawlStrategy::TimeFocused {
                Err("boom".into())
            } else {
                Ok(outcome(vec![0.1; 10]))
            }
        })
        .unwrap();
        assert_eq!(r.series.len(), 3);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].strategy, CrawlStrategy::TimeFocused);
    }

    #[test]
    fn self_comparison_is_one() {
        let r = run_comparison_with(&CrawlStrategy::ALL, 10, 5, |_| Ok(outcome(vec![0.3; 10]))).unwrap();
        let ratios = compare_variants(&r, &r).unwrap();
        assert_eq!(ratios.len(), 4);
        assert!(ratios.values().all(|&v| v == 1.0));
    }

    #[test]
    fn zero_base_is_undefined() {
        let base = run_comparison_with(&[CrawlStrategy::Combined], 10, 5, |_| Ok(outcome(vec![0.0; 10]))).unwrap();
        let variant = run_comparison_with(&[CrawlStrategy::Combined], 10, 5, |_| Ok(outcome(vec![0.2; 10]))).unwrap();
        let e = compare_variants(&base, &variant).unwrap_err();
        assert!(e.to_string().starts_with("undefined ratio"));
    }

    #[test]
    fn mismatched_budgets() {
        let a = run_comparison_with(&[CrawlStrategy::Combined], 10, 5, |_| Ok(outcome(vec![0.2; 10]))).unwrap();
        let b = run_comparison_with(&[CrawlStrategy::Combined], 20, 5, |_| Ok(outcome(vec![0.2; 10]))).unwrap();
        assert!(matches!(compare_variants(&a, &b), Err(EvalError::MismatchedBudgets { .. })));
    }

    #[test]
    fn csv_layout() {
        let r = run_comparison_with(&[CrawlStrategy::Unfocused, CrawlStrategy::ContentFocused], 4, 2, |s| {
            Ok(outcome(if s == CrawlStrategy::ContentFocused { vec![0.5; 4] } else { vec![0.25; 3] }))
        })
        .unwrap();
        let mut buf = Vec::new();
        r.write_relevance_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "strategy,documents_downloaded,accumulated_relevance\n\
             unfocused,2,0.500000\nunfocused,3,0.750000\nc-f,2,1.000000\nc-f,4,2.000000\n"
        );
        let mut buf = Vec::new();
        r.write_summary_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "strategy,urls_considered,fetched,missing,queued_at_end\nunfocused,10,3,2,5\nc-f,11,4,2,5\n"
        );
        let ratios = r.improvement_ratios();
        assert!((ratios[&CrawlStrategy::ContentFocused] - 2.0 / 0.75).abs() < 1e-12);
    }

    #[test]
    fn mean_and_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn accumulated_relevance_monotone_and_bounded(
            rel in prop::collection::vec(0.0f64..=1.0, 0..300),
            interval in 1usize..50,
        ) {
            let points = checkpoints(&rel, interval);
            for w in points.windows(2) {
                prop_assert!(w[0].0 < w[1].0);
                prop_assert!(w[0].1 <= w[1].1);
            }
            for (n, acc) in points {
                prop_assert!(acc <= n as f64 + 1e-9);
            }
        }
    }
}
