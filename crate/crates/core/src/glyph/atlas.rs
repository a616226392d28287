use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{invalid, Error, Result};
use crate::tensor::Scalar;

pub const DEFAULT_SIDE: usize = 24;

/// Grayscale character bitmaps, `side × side` each, stored as 0..=255.
///
/// Every glyph has at least one non-zero pixel. Glyph order is file order,
/// so saving a loaded atlas reproduces the file byte for byte.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlyphAtlas {
    side: usize,
    glyphs: IndexMap<char, Vec<u8>>,
}

impl GlyphAtlas {
    pub fn new(side: usize) -> Result<Self> {
        if side == 0 || !side.is_multiple_of(4) {
            return Err(invalid!(
                "glyph side {side} must be a positive multiple of 4"
            ));
        }
        Ok(Self {
            side,
            glyphs: IndexMap::new(),
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.glyphs.contains_key(&c)
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.glyphs.keys().copied()
    }

    /// Adds or replaces a glyph after checking its size and that it is not blank.
    pub fn insert(&mut self, c: char, pixels: Vec<u8>) -> Result<()> {
        if pixels.len() != self.side * self.side {
            return Err(invalid!(
                "glyph {c:?} has {} pixels, expected {}",
                pixels.len(),
                self.side * self.side
            ));
        }
        if pixels.iter().all(|&p| p == 0) {
            return Err(invalid!("glyph {c:?} is empty"));
        }
        self.glyphs.insert(c, pixels);
        Ok(())
    }

    pub fn raw(&self, c: char) -> Option<&[u8]> {
        self.glyphs.get(&c).map(Vec::as_slice)
    }

    /// Row-major bitmap with values in `[0, 1]`.
    pub fn bitmap(&self, c: char) -> Result<Vec<Scalar>> {
        let raw = self.raw(c).ok_or_else(|| invalid!("no glyph for {c:?}"))?;
        Ok(raw.iter().map(|&p| p as Scalar / 255.0).collect())
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::format(origin, 1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (side, count) = match fields.as_slice() {
            ["GLYPH", "v1", side, count] => (
                side.parse::<usize>()
                    .map_err(|e| Error::format(origin, 1, format!("side: {e}")))?,
                count
                    .parse::<usize>()
                    .map_err(|e| Error::format(origin, 1, format!("count: {e}")))?,
            ),
            _ => {
                return Err(Error::format(
                    origin,
                    1,
                    "expected `GLYPH v1 <side> <count>`",
                ))
            }
        };
        let mut atlas = Self::new(side).map_err(|e| Error::format(origin, 1, e.to_string()))?;
        for _ in 0..count {
            let (no, name) = lines.next().ok_or_else(|| {
                Error::format(
                    origin,
                    0,
                    format!("expected {count} glyphs, found {}", atlas.len()),
                )
            })?;
            let mut chars = name.chars();
            let c = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => {
                    return Err(Error::format(
                        origin,
                        no,
                        format!("expected one character, got {name:?}"),
                    ))
                }
            };
            if atlas.contains(c) {
                return Err(Error::format(origin, no, format!("duplicate glyph {c:?}")));
            }
            let mut pixels = Vec::with_capacity(side * side);
            for _ in 0..side {
                let (no, row) = lines.next().ok_or_else(|| {
                    Error::format(
                        origin,
                        no,
                        format!("glyph {c:?} has fewer than {side} rows"),
                    )
                })?;
                let before = pixels.len();
                for v in row.split_whitespace() {
                    let p = v.parse::<u8>().map_err(|_| {
                        Error::format(origin, no, format!("pixel {v:?} is not in 0..=255"))
                    })?;
                    pixels.push(p);
                }
                if pixels.len() - before != side {
                    return Err(Error::format(
                        origin,
                        no,
                        format!(
                            "glyph {c:?}: row has {} values, expected {side}",
                            pixels.len() - before
                        ),
                    ));
                }
            }
            atlas
                .insert(c, pixels)
                .map_err(|e| Error::format(origin, no, e.to_string()))?;
        }
        if let Some((no, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::format(
                origin,
                no,
                format!("trailing data after {count} glyphs"),
            ));
        }
        Ok(atlas)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("GLYPH v1 {} {}\n", self.side, self.len());
        for (c, pixels) in &self.glyphs {
            out.push(*c);
            out.push('\n');
            for row in pixels.chunks(self.side) {
                let mut first = true;
                for p in row {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    write!(out, "{p}").expect("writing to a String");
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(Error::io(path))
    }
}
