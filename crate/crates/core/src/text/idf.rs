use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::analyzer::Analyzer;
use super::vector::terms;
use crate::error::AnalysisError;
use crate::html::html_to_text;

static DEFAULT_DICTIONARY: &str = include_str!("data/default_idf.tsv");

/// Anything that can weight a term by inverse document frequency.
pub trait IdfSource {
    fn idf(&self, term: &str) -> f64;
}

/// IDF assigned to terms missing from the dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DefaultIdf {
    /// Highest IDF of any listed term.
    MaxObserved,
    /// ln(corpus_size), as if the term occurred in one document.
    #[default]
    LogCorpusSize,
}

/// Document frequencies over a reference corpus. IDF is
/// `ln(corpus_size / doc_frequency)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdfDictionary {
    doc_frequencies: HashMap<String, u64>,
    corpus_size: u64,
    default_policy: DefaultIdf,
    max_observed: f64,
}

impl IdfDictionary {
    pub fn from_doc_frequencies(
        doc_frequencies: HashMap<String, u64>,
        corpus_size: u64,
        default_policy: DefaultIdf,
    ) -> Result<IdfDictionary, AnalysisError> {
        if corpus_size == 0 {
            return Err(AnalysisError::EmptyCorpus);
        }
        if let Some((term, df)) = doc_frequencies
            .iter()
            .find(|(_, df)| **df == 0 || **df > corpus_size)
        {
            return Err(AnalysisError::MalformedDictionary {
                line: 0,
                reason: format!("document frequency {df} of {term:?} outside 1..={corpus_size}"),
            });
        }
        let min_df = doc_frequencies.values().copied().min().unwrap_or(1);
        Ok(IdfDictionary {
            max_observed: (corpus_size as f64 / min_df as f64).ln(),
            doc_frequencies,
            corpus_size,
            default_policy,
        })
    }

    /// Empty dictionary: every term gets the default IDF, ln(corpus_size).
    pub fn uniform(corpus_size: u64) -> IdfDictionary {
        IdfDictionary::from_doc_frequencies(HashMap::new(), corpus_size.max(1), DefaultIdf::LogCorpusSize)
            .expect("valid empty dictionary")
    }

    /// The small dictionary shipped with the crate.
    pub fn bundled() -> IdfDictionary {
        IdfDictionary::parse(DEFAULT_DICTIONARY).expect("bundled dictionary is well-formed")
    }

    /// Counts, per unigram/bigram, how many of the token lists contain it.
    pub fn from_documents<I, D>(documents: I) -> Result<IdfDictionary, AnalysisError>
    where
        I: IntoIterator<Item = D>,
        D: AsRef<[String]>,
    {
        let mut df: HashMap<String, u64> = HashMap::new();
        let mut n = 0u64;
        for doc in documents {
            n += 1;
            let unique: BTreeSet<String> = terms(doc.as_ref()).collect();
            for t in unique {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        if n == 0 {
            return Err(AnalysisError::EmptyCorpus);
        }
        IdfDictionary::from_doc_frequencies(df, n, DefaultIdf::LogCorpusSize)
    }

    pub fn with_default_policy(mut self, policy: DefaultIdf) -> IdfDictionary {
        self.default_policy = policy;
        self
    }

    pub fn corpus_size(&self) -> u64 {
        self.corpus_size
    }

    pub fn doc_frequency(&self, term: &str) -> Option<u64> {
        self.doc_frequencies.get(term).copied()
    }

    pub fn len(&self) -> usize {
        self.doc_frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_frequencies.is_empty()
    }

    /// Reads the `#corpus_size N` header followed by `term<TAB>df` lines.
    pub fn parse(text: &str) -> Result<IdfDictionary, AnalysisError> {
        let mut corpus_size = None;
        let mut df = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let bad = |reason: &str| AnalysisError::MalformedDictionary {
                line: line_no,
                reason: reason.into(),
            };
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(n) = rest.trim().strip_prefix("corpus_size") {
                    corpus_size = Some(n.trim().parse::<u64>().map_err(|_| bad("invalid corpus_size"))?);
                }
                continue;
            }
            let (term, count) = line.rsplit_once('\t').ok_or_else(|| bad("expected term<TAB>frequency"))?;
            let count: u64 = count.trim().parse().map_err(|_| bad("invalid frequency"))?;
            df.insert(term.to_string(), count);
        }
        let corpus_size = corpus_size.ok_or(AnalysisError::MalformedDictionary {
            line: 1,
            reason: "missing #corpus_size header".into(),
        })?;
        IdfDictionary::from_doc_frequencies(df, corpus_size, DefaultIdf::LogCorpusSize)
    }

    pub fn load(path: &Path) -> Result<IdfDictionary, AnalysisError> {
        let text = std::fs::read_to_string(path).map_err(|source| AnalysisError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        IdfDictionary::parse(&text)
    }

    /// Writes the dictionary with terms in sorted order.
    pub fn save(&self, path: &Path) -> Result<(), AnalysisError> {
        let io = |source| AnalysisError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(out, "#corpus_size {}", self.corpus_size).map_err(io)?;
        let mut entries: Vec<_> = self.doc_frequencies.iter().collect();
        entries.sort();
        for (term, df) in entries {
            writeln!(out, "{term}\t{df}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

impl IdfSource for IdfDictionary {
    fn idf(&self, term: &str) -> f64 {
        match self.doc_frequencies.get(term) {
            Some(&df) => (self.corpus_size as f64 / df as f64).ln(),
            None => match self.default_policy {
                DefaultIdf::LogCorpusSize => (self.corpus_size as f64).ln(),
                DefaultIdf::MaxObserved => self.max_observed,
            },
        }
    }
}

/// Builds a dictionary from text documents. Each path is a file or a
/// directory whose regular files (recursively) are documents; `.html`/`.htm`
/// files are reduced to visible text first.
pub fn build_idf_dictionary<P: AsRef<Path>>(
    corpus_paths: &[P],
    analyzer: &Analyzer,
) -> Result<IdfDictionary, AnalysisError> {
    let mut files = Vec::new();
    for p in corpus_paths {
        collect_files(p.as_ref(), &mut files)?;
    }
    files.sort();
    let mut docs = Vec::with_capacity(files.len());
    for f in &files {
        let bytes = std::fs::read(f).map_err(|source| AnalysisError::Io {
            path: f.clone(),
            source,
        })?;
        let text = String::from_utf8_lossy(&bytes);
        let is_html = f
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("html") || e.eq_ignore_ascii_case("htm"));
        let text = if is_html { html_to_text(&text) } else { text.into_owned() };
        docs.push(analyzer.analyze(&text));
    }
    IdfDictionary::from_documents(docs)
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<(), AnalysisError> {
    let io = |source| AnalysisError::Io {
        path: path.to_path_buf(),
        source,
    };
    let meta = std::fs::metadata(path).map_err(io)?;
    if meta.is_file() {
        out.push(path.to_path_buf());
    } else if meta.is_dir() {
        for entry in std::fs::read_dir(path).map_err(io)? {
            collect_files(&entry.map_err(io)?.path(), out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Language;

    #[test]
    fn corpus_frequencies() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("1.txt"), "common rare").unwrap();
        std::fs::write(dir.path().join("2.txt"), "common").unwrap();
        let dict = build_idf_dictionary(&[dir.path()], &Analyzer::new(Language::None)).unwrap();
        assert_eq!(dict.corpus_size(), 2);
        assert_eq!(dict.doc_frequency("common"), Some(2));
        assert_eq!(dict.idf("common"), 0.0);
        assert!((dict.idf("rare") - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((dict.idf("unseen") - 2f64.ln()).abs() < 1e-12);
        assert_eq!(dict.doc_frequency("common rare"), Some(1));
    }

    #[test]
    fn empty_corpus_is_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            build_idf_dictionary(&[dir.path()], &Analyzer::new(Language::None)),
            Err(AnalysisError::EmptyCorpus)
        ));
    }

    #[test]
    fn default_policies() {
        let df: HashMap<String, u64> = [("a".to_string(), 2), ("b".to_string(), 50)].into();
        let dict = IdfDictionary::from_doc_frequencies(df, 100, DefaultIdf::LogCorpusSize).unwrap();
        assert!((dict.idf("zzz") - 100f64.ln()).abs() < 1e-12);
        let dict = dict.with_default_policy(DefaultIdf::MaxObserved);
        assert!((dict.idf("zzz") - 50f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn file_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idf.tsv");
        let dict = IdfDictionary::bundled();
        dict.save(&path).unwrap();
        assert_eq!(IdfDictionary::load(&path).unwrap(), dict);
        assert!(IdfDictionary::parse("a\t1\n").is_err());
        assert!(IdfDictionary::parse("#corpus_size 2\na\t3\n").is_err());
        let d = IdfDictionary::parse("#corpus_size 4\nelect result\t2\n").unwrap();
        assert_eq!(d.doc_frequency("elect result"), Some(2));
    }
}
