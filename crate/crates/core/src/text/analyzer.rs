use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

use crate::error::AnalysisError;

static STOPWORDS_EN: &str = include_str!("data/stopwords_en.txt");
static STOPWORDS_DE: &str = include_str!("data/stopwords_de.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Language {
    English,
    German,
    /// Identity stemmer, no stop words.
    None,
}

impl Language {
    pub fn from_code(code: &str) -> Result<Language, AnalysisError> {
        match code.trim().to_ascii_lowercase().as_str() {
            "en" | "eng" | "english" => Ok(Language::English),
            "de" | "deu" | "ger" | "german" => Ok(Language::German),
            "none" => Ok(Language::None),
            _ => Err(AnalysisError::UnknownLanguage(code.to_string())),
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Language::English => "en",
            Language::German => "de",
            Language::None => "none",
        }
    }

    fn stopwords(self) -> &'static HashSet<&'static str> {
        static EN: OnceLock<HashSet<&'static str>> = OnceLock::new();
        static DE: OnceLock<HashSet<&'static str>> = OnceLock::new();
        static NONE: OnceLock<HashSet<&'static str>> = OnceLock::new();
        let load = |src: &'static str| {
            src.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect()
        };
        match self {
            Language::English => EN.get_or_init(|| load(STOPWORDS_EN)),
            Language::German => DE.get_or_init(|| load(STOPWORDS_DE)),
            Language::None => NONE.get_or_init(HashSet::new),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Tokenizer, stop-word filter and Snowball stemmer for one language.
pub struct Analyzer {
    language: Language,
    stemmer: Option<Stemmer>,
}

impl Analyzer {
    pub fn new(language: Language) -> Analyzer {
        let stemmer = match language {
            Language::English => Some(Stemmer::create(Algorithm::English)),
            Language::German => Some(Stemmer::create(Algorithm::German)),
            Language::None => None,
        };
        Analyzer { language, stemmer }
    }

    pub fn for_code(code: &str) -> Result<Analyzer, AnalysisError> {
        Language::from_code(code).map(Analyzer::new)
    }

    pub fn language(&self) -> Language {
        self.language
    }

    /// Lowercased, stop-word-free, stemmed tokens in text order.
    pub fn analyze(&self, text: &str) -> Vec<String> {
        let stop = self.language.stopwords();
        tokenize(text)
            .filter(|t| !stop.contains(t.as_str()))
            .map(|t| match &self.stemmer {
                Some(s) => s.stem(&t).into_owned(),
                None => t,
            })
            .filter(|t| !t.is_empty())
            .collect()
    }
}

/// Splits on anything that is not alphanumeric (apostrophes inside words
/// are kept so contractions hit the stop list) and lowercases.
fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '’'))
        .map(|t| t.trim_matches(|c| c == '\'' || c == '’'))
        .filter(|t| !t.is_empty())
        .map(|t| t.replace('’', "'").to_lowercase())
}

pub fn analyze(text: &str, language: &str) -> Result<Vec<String>, AnalysisError> {
    Ok(Analyzer::for_code(language)?.analyze(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn english_example() {
        // Snowball: "elections" -> step 1a "election" -> step 4 drops "ion"
        // (in R2, preceded by t) -> "elect"; "held" has no suffix to strip.
        assert_eq!(analyze("The elections were held", "en").unwrap(), ["elect", "held"]);
    }

    #[test]
    fn empty_and_stopword_only() {
        assert!(analyze("", "en").unwrap().is_empty());
        assert!(analyze("the of and were", "en").unwrap().is_empty());
        assert!(analyze("der die das und", "de").unwrap().is_empty());
    }

    #[test]
    fn identity_language() {
        assert_eq!(analyze("The Elections", "none").unwrap(), ["the", "elections"]);
    }

    #[test]
    fn unknown_language() {
        assert!(matches!(analyze("x", "xx"), Err(AnalysisError::UnknownLanguage(_))));
    }

    #[test]
    fn deterministic() {
        let text = "Bundestagswahl 2009: Ergebnisse, Wahlbeteiligung und Koalitionen";
        assert_eq!(analyze(text, "de").unwrap(), analyze(text, "de").unwrap());
    }

    #[test]
    fn contractions_removed() {
        assert_eq!(analyze("don't stop", "en").unwrap(), ["stop"]);
    }
}
