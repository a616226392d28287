//! The dictionary: entries with ordered senses, a prefix trie over surfaces,
//! and forward maximum matching of entries inside running text.
//!
//! ```
//! use cdbert::dict::{match_entries, DictEntry, Lexicon, Sense};
//!
//! let mut lex = Lexicon::new();
//! for s in ["AB", "ABC", "C"] {
//!     lex.insert(DictEntry::new(s, vec![Sense::new("d", vec![])]));
//! }
//! let hits = match_entries("ABC", &lex);
//! assert_eq!(hits.len(), 1);
//! assert_eq!((hits[0].start, hits[0].end), (0, 3));
//! ```

mod trie;

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use trie::Trie;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sense {
    pub definition: String,
    #[serde(default)]
    pub examples: Vec<String>,
}

impl Sense {
    pub fn new(definition: impl Into<String>, examples: Vec<String>) -> Self {
        Self {
            definition: definition.into(),
            examples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictEntry {
    #[serde(rename = "entry")]
    pub surface: String,
    pub senses: Vec<Sense>,
    #[serde(default)]
    pub synonyms: Vec<String>,
    #[serde(default)]
    pub antonyms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radical: Option<String>,
}

impl DictEntry {
    pub fn new(surface: impl Into<String>, senses: Vec<Sense>) -> Self {
        Self {
            surface: surface.into(),
            senses,
            synonyms: Vec::new(),
            antonyms: Vec::new(),
            radical: None,
        }
    }

    pub fn char_len(&self) -> usize {
        self.surface.chars().count()
    }

    /// First invariant this entry violates, if any.
    pub fn validate(&self) -> Result<(), String> {
        if self.surface.trim().is_empty() {
            return Err("empty surface".into());
        }
        if self.senses.is_empty() {
            return Err(format!("{}: no senses", self.surface));
        }
        for (i, sense) in self.senses.iter().enumerate() {
            if sense.definition.split_whitespace().next().is_none() {
                return Err(format!(
                    "{}: sense {i} has an empty definition",
                    self.surface
                ));
            }
            if let Some(ex) = sense.examples.iter().find(|ex| !ex.contains(&self.surface)) {
                return Err(format!(
                    "{}: sense {i} example {ex:?} does not contain the entry",
                    self.surface
                ));
            }
        }
        if self.synonyms.contains(&self.surface) || self.antonyms.contains(&self.surface) {
            return Err(format!(
                "{}: lists itself as a synonym or antonym",
                self.surface
            ));
        }
        Ok(())
    }
}

/// Entries keyed by surface in insertion order, with a trie over the keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: IndexMap<String, DictEntry>,
    trie: Trie,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `entry` unless its surface is already present; returns whether it was added.
    pub fn insert(&mut self, entry: DictEntry) -> bool {
        if self.entries.contains_key(&entry.surface) {
            return false;
        }
        self.trie.insert(&entry.surface);
        self.entries.insert(entry.surface.clone(), entry);
        true
    }

    pub fn get(&self, surface: &str) -> Option<&DictEntry> {
        self.entries.get(surface)
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.entries.contains_key(surface)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &DictEntry> {
        self.entries.values()
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Surfaces held by the matcher, in lexicographic order.
    pub fn trie_keys(&self) -> Vec<String> {
        self.trie.keys()
    }

    /// Copy without the entries rejected by `drop`, preserving order.
    pub fn without(&self, mut drop: impl FnMut(&DictEntry) -> bool) -> Lexicon {
        let mut out = Lexicon::new();
        for e in self.entries.values().filter(|e| !drop(e)) {
            out.insert(e.clone());
        }
        out
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for entry in self.entries.values() {
            serde_json::to_writer(&mut w, entry)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        self.write_jsonl(BufWriter::new(File::create(path)?))
    }
}

impl FromIterator<DictEntry> for Lexicon {
    fn from_iter<I: IntoIterator<Item = DictEntry>>(iter: I) -> Self {
        let mut lex = Lexicon::new();
        for e in iter {
            lex.insert(e);
        }
        lex
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestConfig {
    /// Malformed lines abort the load instead of being reported and skipped.
    pub strict: bool,
}

#[derive(Debug, Error)]
pub enum DictError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {msg}")]
    Malformed { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    /// 1-based line number in the source file.
    pub line: usize,
    pub reason: String,
}

/// Records that did not make it into the lexicon.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RejectionReport {
    pub rejections: Vec<Rejection>,
}

impl RejectionReport {
    pub fn is_empty(&self) -> bool {
        self.rejections.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rejections.len()
    }
}

impl fmt::Display for RejectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rejections {
            writeln!(f, "line {}: {}", r.line, r.reason)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub lexicon: Lexicon,
    pub report: RejectionReport,
}

/// Loads a JSONL dictionary. Invalid and duplicate records are reported, the
/// first record of each surface wins.
pub fn ingest(path: impl AsRef<Path>, config: IngestConfig) -> Result<Ingested, DictError> {
    let path = path.as_ref();
    let io = |source| DictError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut lexicon = Lexicon::new();
    let mut report = RejectionReport::default();
    let mut first_seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let mut reject = |reason: String| {
            report.rejections.push(Rejection {
                line: line_no,
                reason,
            })
        };
        let entry: DictEntry = match serde_json::from_str(&line) {
            Ok(e) => e,
            Err(e) if config.strict => {
                return Err(DictError::Malformed {
                    line: line_no,
                    msg: e.to_string(),
                })
            }
            Err(e) => {
                reject(format!("malformed record: {e}"));
                continue;
            }
        };
        if let Err(reason) = entry.validate() {
            reject(reason);
            continue;
        }
        if let Some(first) = first_seen.get(&entry.surface) {
            reject(format!(
                "duplicate surface {} (first at line {first})",
                entry.surface
            ));
            continue;
        }
        first_seen.insert(entry.surface.clone(), line_no);
        lexicon.insert(entry);
    }
    Ok(Ingested { lexicon, report })
}

/// An occurrence of a lexicon surface in text, in character offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryMatch {
    pub surface: String,
    pub start: usize,
    /// Exclusive.
    pub end: usize,
}

/// Forward maximum matching: at each position take the longest surface that
/// starts there and jump past it, otherwise advance one character.
pub fn match_entries(text: &str, lex: &Lexicon) -> Vec<EntryMatch> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        match lex.trie.longest_prefix(&chars[i..]) {
            Some(n) => {
                out.push(EntryMatch {
                    surface: chars[i..i + n].iter().collect(),
                    start: i,
                    end: i + n,
                });
                i += n;
            }
            None => i += 1,
        }
    }
    out
}

/// Number of entries per sense count K.
pub fn sense_count_histogram(lex: &Lexicon) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for e in lex.entries() {
        *hist.entry(e.senses.len()).or_insert(0) += 1;
    }
    hist
}
