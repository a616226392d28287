use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use super::vocab::Vocab;
use crate::error::{Error, Result};

/// Radical id for specials and characters outside the table.
pub const NO_RADICAL: usize = 0;

/// Character to radical mapping with a dense radical vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RadicalTable {
    radical_of: BTreeMap<char, String>,
    /// Radical string to id; ids start at 1.
    ids: BTreeMap<String, usize>,
}

impl RadicalTable {
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (char, S)>) -> Self {
        let radical_of: BTreeMap<char, String> =
            pairs.into_iter().map(|(c, r)| (c, r.into())).collect();
        let distinct: BTreeSet<&String> = radical_of.values().collect();
        let ids = distinct
            .into_iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i + 1))
            .collect();
        Self { radical_of, ids }
    }

    /// TSV `character<TAB>radical`, one pair per line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (ch, radical) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(path, i + 1, "expected character<TAB>radical"))?;
            let mut chars = ch.chars();
            let c = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => {
                    return Err(Error::format(
                        path,
                        i + 1,
                        "first column must be one character",
                    ))
                }
            };
            if radical.trim().is_empty() {
                return Err(Error::format(path, i + 1, "empty radical"));
            }
            pairs.push((c, radical.trim().to_string()));
        }
        Ok(Self::from_pairs(pairs))
    }

    /// Radical vocabulary size including [`NO_RADICAL`].
    pub fn num_ids(&self) -> usize {
        self.ids.len() + 1
    }

    pub fn radical_of(&self, c: char) -> Option<&str> {
        self.radical_of.get(&c).map(String::as_str)
    }

    pub fn radical_id(&self, radical: &str) -> Option<usize> {
        self.ids.get(radical).copied()
    }

    pub fn id_for_char(&self, c: char) -> usize {
        self.radical_of(c)
            .and_then(|r| self.radical_id(r))
            .unwrap_or(NO_RADICAL)
    }

    pub fn len(&self) -> usize {
        self.radical_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radical_of.is_empty()
    }
}

/// Per-token radical ids; specials and unlisted characters get [`NO_RADICAL`].
pub fn radical_ids_for(tokens: &[usize], vocab: &Vocab, table: &RadicalTable) -> Vec<usize> {
    tokens
        .iter()
        .map(|&t| {
            vocab
                .char_of(t)
                .map_or(NO_RADICAL, |c| table.id_for_char(c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::vocab::CLS;

    #[test]
    fn lookup_and_fallbacks() {
        let table = RadicalTable::from_pairs([('明', "日"), ('时', "日"), ('河', "氵")]);
        assert_eq!(table.num_ids(), 3);
        let vocab = Vocab::from_chars("明河山".chars());
        let ids = radical_ids_for(
            &[CLS, vocab.id('明'), vocab.id('山'), vocab.id('河')],
            &vocab,
            &table,
        );
        assert_eq!(ids[0], NO_RADICAL);
        assert_eq!(ids[1], table.radical_id("日").unwrap());
        assert_eq!(ids[2], NO_RADICAL);
        assert_eq!(ids[3], table.radical_id("氵").unwrap());
    }
}
