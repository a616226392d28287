use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::dict::Lexicon;
use crate::error::{Error, Result};

pub const PAD: usize = 0;
pub const CLS: usize = 1;
pub const SEP: usize = 2;
pub const MASK: usize = 3;
pub const UNK: usize = 4;
pub const NUM_SPECIALS: usize = 5;

const SPECIAL_NAMES: [&str; NUM_SPECIALS] = ["[PAD]", "[CLS]", "[SEP]", "[MASK]", "[UNK]"];

/// Character vocabulary. Ids below [`NUM_SPECIALS`] are reserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    chars: Vec<char>,
    ids: BTreeMap<char, usize>,
}

impl Vocab {
    /// Vocabulary over the given characters, deduplicated, in code point order.
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let set: BTreeSet<char> = chars.into_iter().filter(|c| !c.is_whitespace()).collect();
        Self::from_ordered(set.into_iter().collect())
    }

    fn from_ordered(chars: Vec<char>) -> Self {
        let ids = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i + NUM_SPECIALS))
            .collect();
        Self { chars, ids }
    }

    /// Every character in surfaces, definitions, examples and relation lists,
    /// plus any `extra` texts.
    pub fn from_lexicon<'a>(lex: &Lexicon, extra: impl IntoIterator<Item = &'a str>) -> Self {
        let mut chars = Vec::new();
        for e in lex.entries() {
            chars.extend(e.surface.chars());
            for s in &e.senses {
                chars.extend(s.definition.chars());
                s.examples.iter().for_each(|x| chars.extend(x.chars()));
            }
            e.synonyms
                .iter()
                .chain(&e.antonyms)
                .for_each(|x| chars.extend(x.chars()));
        }
        for t in extra {
            chars.extend(t.chars());
        }
        Self::from_chars(chars)
    }

    /// One character per line; line `i` gets id `i + NUM_SPECIALS`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        let mut chars = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let mut it = line.chars();
            match (it.next(), it.next()) {
                (Some(c), None) if seen.insert(c) => chars.push(c),
                (Some(_), None) => return Err(Error::format(path, i + 1, "duplicate character")),
                _ => return Err(Error::format(path, i + 1, "expected exactly one character")),
            }
        }
        Ok(Self::from_ordered(chars))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = String::with_capacity(self.chars.len() * 4);
        for c in &self.chars {
            text.push(*c);
            text.push('\n');
        }
        fs::write(path, text).map_err(Error::io(path))
    }

    /// Total ids including specials.
    pub fn len(&self) -> usize {
        self.chars.len() + NUM_SPECIALS
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn id(&self, c: char) -> usize {
        self.ids.get(&c).copied().unwrap_or(UNK)
    }

    pub fn char_of(&self, id: usize) -> Option<char> {
        id.checked_sub(NUM_SPECIALS)
            .and_then(|i| self.chars.get(i))
            .copied()
    }

    pub fn token(&self, id: usize) -> String {
        match SPECIAL_NAMES.get(id) {
            Some(name) => name.to_string(),
            None => self
                .char_of(id)
                .map(String::from)
                .unwrap_or_else(|| "[?]".into()),
        }
    }

    /// Token ids for `text`, whitespace dropped, unknown characters as [`UNK`].
    pub fn encode(&self, text: &str) -> Vec<usize> {
        text.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| self.id(c))
            .collect()
    }

    pub fn decode(&self, ids: &[usize]) -> String {
        ids.iter().map(|&i| self.token(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specials_are_fixed_and_chars_bijective() {
        let v = Vocab::from_chars("明日明月".chars());
        assert_eq!(v.len(), NUM_SPECIALS + 3);
        for id in NUM_SPECIALS..v.len() {
            assert_eq!(v.id(v.char_of(id).unwrap()), id);
        }
        assert_eq!(v.char_of(CLS), None);
        assert_eq!(v.id('山'), UNK);
        assert_eq!(v.decode(&[CLS, v.id('明'), SEP]), "[CLS]明[SEP]");
    }

    #[test]
    fn file_round_trip() {
        let v = Vocab::from_chars("天地人".chars());
        let f = tempfile::NamedTempFile::new().unwrap();
        v.save(f.path()).unwrap();
        assert_eq!(Vocab::load(f.path()).unwrap(), v);
        std::fs::write(f.path(), "天\n天\n").unwrap();
        assert!(Vocab::load(f.path()).is_err());
    }
}
