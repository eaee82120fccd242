//! Command-line front end. [`run`] returns the process exit code so the
//! commands can be driven in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::archive::{build_index, write_collection, ArchiveIndex};
use crate::collection_spec::{load_spec_unchecked, validate_spec, CollectionSpecification};
use crate::crawler::{run_crawl, CrawlConfig, CrawlStrategy};
use crate::error::{EvalError, SpecError};
use crate::eval::{generate_archive, run_comparison, ComparisonSettings, ConfusableCluster, SyntheticArchiveConfig};
use crate::relevance::GammaMode;
use crate::text::IdfDictionary;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

pub const TRACE_CSV: &str = "trace.csv";
pub const CRAWL_SUMMARY: &str = "summary.json";

#[derive(Debug, Parser)]
#[command(name = "eventcrawl", version, about = "Extract event-centric collections from web archives")]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Index every WARC file under a directory.
    Index {
        #[arg(long)]
        warc_dir: PathBuf,
        #[arg(long)]
        index: PathBuf,
    },
    /// Run one focused crawl and write the collection.
    Crawl {
        #[command(flatten)]
        input: CrawlInput,
        #[arg(long, default_value = "ct-f")]
        strategy: CrawlStrategy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare strategies and write accumulated relevance CSVs.
    Eval {
        #[command(flatten)]
        input: CrawlInput,
        /// Repeatable or comma separated; defaults to all four.
        #[arg(long, value_delimiter = ',')]
        strategy: Vec<CrawlStrategy>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        checkpoint: usize,
    },
    /// Check a collection specification.
    Validate {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Generate a synthetic archive with known ground truth.
    Gen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        pages: usize,
        #[arg(long, default_value_t = 0.1)]
        relevant_fraction: f64,
        #[arg(long, default_value_t = 0.8)]
        locality: f64,
        #[arg(long, default_value_t = 0.05)]
        omit_fraction: f64,
        /// Mean out-degree of generated pages.
        #[arg(long, default_value_t = 8)]
        links_per_page: usize,
        /// Also plant a decoy cluster; the spec gets no keyword.
        #[arg(long)]
        confusable: bool,
        /// Budget written into the generated spec.
        #[arg(long)]
        target_size: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct CrawlInput {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    /// Document-frequency dictionary; the bundled one if absent.
    #[arg(long)]
    pub idf: Option<PathBuf>,
    /// Read lead and cool-down times as half-lives.
    #[arg(long)]
    pub half_life_gamma: bool,
}

/// A failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

type CmdResult = Result<i32, Failure>;

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();

    let result = match cli.command {
        Command::Index { warc_dir, index } => cmd_index(&warc_dir, &index, out, err),
        Command::Crawl { input, strategy, out: dir } => cmd_crawl(&input, strategy, &dir, out),
        Command::Eval {
            input,
            strategy,
            out: dir,
            checkpoint,
        } => cmd_eval(&input, &strategy, &dir, checkpoint, out, err),
        Command::Validate { spec } => cmd_validate(&spec, out, err),
        Command::Gen {
            out: dir,
            seed,
            pages,
            relevant_fraction,
            locality,
            omit_fraction,
            links_per_page,
            confusable,
            target_size,
        } => {
            let mut config = SyntheticArchiveConfig::new(pages, relevant_fraction, locality, seed);
            config.omit_fraction = omit_fraction;
            config.links_per_page = links_per_page;
            if confusable {
                config.confusable = Some(ConfusableCluster::default());
            }
            cmd_gen(&config, target_size, &dir, out)
        }
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::invalid(format!("{}: {e}", path.display()))
}

fn is_warc(path: &Path) -> bool {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("").to_ascii_lowercase();
    name.ends_with(".warc") || name.ends_with(".warc.gz")
}

fn find_warcs(dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            find_warcs(&path, out)?;
        } else if is_warc(&path) {
            out.push(path);
        }
    }
    Ok(())
}

fn cmd_index(warc_dir: &Path, index_path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    if !warc_dir.is_dir() {
        return Err(Failure::usage(format!("no such directory: {}", warc_dir.display())));
    }
    let mut warcs = Vec::new();
    find_warcs(warc_dir, &mut warcs).map_err(|e| io_failure(warc_dir, e))?;
    warcs.sort();
    if warcs.is_empty() {
        let _ = writeln!(err, "warning: no WARC files under {}", warc_dir.display());
    }
    let summary = build_index(&warcs, index_path).map_err(|e| Failure::invalid(e.to_string()))?;
    for s in &summary.skipped {
        log::info!("skipped {}@{}: {}", s.warc_file.display(), s.offset, s.reason);
    }
    let _ = writeln!(out, "warc_files: {}", warcs.len());
    let _ = writeln!(out, "urls: {}", summary.url_count);
    let _ = writeln!(out, "records: {}", summary.record_count);
    let _ = writeln!(out, "skipped: {}", summary.skipped.len());
    Ok(EXIT_OK)
}

fn load_valid_spec(path: &Path) -> Result<CollectionSpecification, Failure> {
    let spec = load_spec_unchecked(path).map_err(|e| match e {
        SpecError::Io { .. } => Failure::usage(e.to_string()),
        other => Failure::invalid(other.to_string()),
    })?;
    let diagnostics = validate_spec(&spec);
    if diagnostics.is_empty() {
        Ok(spec)
    } else {
        let lines: Vec<String> = diagnostics.iter().map(|d| format!("  {d}")).collect();
        Err(Failure::invalid(format!("invalid specification:\n{}", lines.join("\n"))))
    }
}

struct Loaded {
    spec: CollectionSpecification,
    index: ArchiveIndex,
    idf: IdfDictionary,
    config: CrawlConfig,
}

fn load_inputs(input: &CrawlInput) -> Result<Loaded, Failure> {
    let spec = load_valid_spec(&input.spec)?;
    if !input.index.is_file() {
        return Err(Failure::usage(format!("no such index: {}", input.index.display())));
    }
    let index = ArchiveIndex::open(&input.index).map_err(|e| Failure::invalid(e.to_string()))?;
    let idf = match &input.idf {
        Some(p) => IdfDictionary::load(p).map_err(|e| Failure::invalid(e.to_string()))?,
        None => IdfDictionary::bundled(),
    };
    let config = CrawlConfig {
        gamma_mode: GammaMode::from_half_life_flag(input.half_life_gamma),
        ..CrawlConfig::default()
    };
    Ok(Loaded {
        spec,
        index,
        idf,
        config,
    })
}

#[derive(Serialize)]
struct CrawlSummary<'a> {
    strategy: &'a str,
    fetched: usize,
    missing: usize,
    queued_at_end: usize,
    urls_considered: usize,
    accumulated_relevance: f64,
}

fn cmd_crawl(input: &CrawlInput, strategy: CrawlStrategy, out_dir: &Path, out: &mut dyn Write) -> CmdResult {
    let Loaded {
        spec,
        index,
        idf,
        config,
    } = load_inputs(input)?;
    let result = run_crawl(&spec, &index, strategy, &idf, &config).map_err(|e| Failure::invalid(e.to_string()))?;

    std::fs::create_dir_all(out_dir).map_err(|e| io_failure(out_dir, e))?;
    let mut documents = Vec::with_capacity(result.collection.len());
    for d in &result.collection {
        let doc = index
            .fetch_document(&d.snapshot)
            .map_err(|e| Failure::invalid(e.to_string()))?;
        documents.push((doc, d.score.combined));
    }
    write_collection(documents, out_dir).map_err(|e| Failure::invalid(e.to_string()))?;
    let trace = out_dir.join(TRACE_CSV);
    result.write_trace_file(&trace).map_err(|e| io_failure(&trace, e))?;

    let summary = CrawlSummary {
        strategy: strategy.name(),
        fetched: result.collection.len(),
        missing: result.missing.len(),
        queued_at_end: result.queued_at_end.len(),
        urls_considered: result.urls_considered(),
        accumulated_relevance: result.collection.iter().map(|d| d.score.topical).sum(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    let path = out_dir.join(CRAWL_SUMMARY);
    std::fs::write(&path, format!("{json}\n")).map_err(|e| io_failure(&path, e))?;
    let _ = writeln!(out, "strategy: {}", summary.strategy);
    let _ = writeln!(out, "fetched: {}", summary.fetched);
    let _ = writeln!(out, "missing: {}", summary.missing);
    let _ = writeln!(out, "accumulated_relevance: {:.6}", summary.accumulated_relevance);
    Ok(EXIT_OK)
}

fn cmd_eval(
    input: &CrawlInput,
    strategies: &[CrawlStrategy],
    out_dir: &Path,
    checkpoint: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    if checkpoint == 0 {
        return Err(Failure::usage(EvalError::ZeroCheckpoint.to_string()));
    }
    let Loaded {
        spec,
        index,
        idf,
        config,
    } = load_inputs(input)?;
    let strategies: Vec<CrawlStrategy> = if strategies.is_empty() {
        CrawlStrategy::ALL.to_vec()
    } else {
        let mut unique = Vec::new();
        for s in strategies {
            if !unique.contains(s) {
                unique.push(*s);
            }
        }
        unique
    };
    let settings = ComparisonSettings {
        checkpoint_interval: checkpoint,
        config,
        evaluation_reference: None,
    };
    let report = run_comparison(&spec, &index, &strategies, &idf, &settings).map_err(|e| match e {
        EvalError::ZeroCheckpoint => Failure::usage(e.to_string()),
        other => Failure::invalid(other.to_string()),
    })?;
    report.write_csvs(out_dir).map_err(|e| Failure::invalid(e.to_string()))?;

    for s in &report.series {
        let _ = writeln!(
            out,
            "{}: fetched {} accumulated_relevance {:.6} urls_considered {}",
            s.strategy.name(),
            s.fetched,
            s.final_relevance(),
            s.urls_considered()
        );
    }
    for (s, r) in report.improvement_ratios() {
        if s != CrawlStrategy::Unfocused {
            let _ = writeln!(out, "{} / unfocused: {r:.3}", s.name());
        }
    }
    if report.failures.is_empty() {
        Ok(EXIT_OK)
    } else {
        for f in &report.failures {
            let _ = writeln!(err, "error: strategy {} failed: {}", f.strategy.name(), f.message);
        }
        Ok(EXIT_PARTIAL)
    }
}

fn cmd_validate(spec_path: &Path, out: &mut dyn Write, _err: &mut dyn Write) -> CmdResult {
    let spec = load_valid_spec(spec_path)?;
    let _ = writeln!(out, "ok: {} ({} seeds)", spec.name, spec.seeds.len());
    Ok(EXIT_OK)
}

fn cmd_gen(
    config: &SyntheticArchiveConfig,
    target_size: Option<usize>,
    out_dir: &Path,
    out: &mut dyn Write,
) -> CmdResult {
    let generated = generate_archive(config, out_dir).map_err(|e| match e {
        EvalError::InvalidConfig(m) => Failure::usage(m),
        other => Failure::invalid(other.to_string()),
    })?;
    if let Some(n) = target_size {
        let mut spec = generated.spec.clone();
        spec.target_size = n;
        let path = out_dir.join(crate::eval::SPEC_JSON);
        std::fs::write(&path, crate::collection_spec::serialize_spec(&spec)).map_err(|e| io_failure(&path, e))?;
    }
    let _ = writeln!(out, "warc_files: {}", generated.warc_paths.len());
    let _ = writeln!(out, "pages: {}", config.page_count);
    let _ = writeln!(out, "omitted: {}", generated.omitted.len());
    Ok(EXIT_OK)
}
