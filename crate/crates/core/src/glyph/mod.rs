//! Glyph features: character bitmaps, a small convolutional encoder, and a
//! symmetric contrastive objective that aligns each glyph with the text
//! encoding of its character and definition.
//!
//! ```
//! use cdbert::glyph::{GlyphAtlas, GlyphConfig, GlyphEncoder, glyph_feature};
//!
//! let mut atlas = GlyphAtlas::new(8).unwrap();
//! let mut pixels = vec![0u8; 64];
//! pixels[27] = 255;
//! atlas.insert('丶', pixels).unwrap();
//!
//! let enc = GlyphEncoder::new(GlyphConfig::new(8, 16), 0).unwrap();
//! let f = glyph_feature('丶', &enc, &atlas, None).unwrap();
//! assert_eq!(f.len(), 16);
//! assert_eq!(f, glyph_feature('丶', &enc, &atlas, None).unwrap());
//! assert!(glyph_feature('口', &enc, &atlas, None).is_err());
//! ```

mod atlas;
mod augment;
mod model;

pub use atlas::{GlyphAtlas, DEFAULT_SIDE};
pub use augment::{GlyphAugmentation, MAX_SHEAR, ROTATIONS, SCALES};
pub use model::{BoundGlyph, GlyphConfig, GlyphEncoder, DEFAULT_TEMPERATURE};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dict::Lexicon;
use crate::encoder::{BoundEncoder, EncoderModel, Tokenizer};
use crate::error::{invalid, Result};
use crate::tensor::{AdamState, AdamW, LinearWarmup, Scalar, Tape, Tensor, Var};

/// A character and the definition its glyph is aligned with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlyphPair {
    pub character: char,
    pub definition: String,
}

/// One pair per single-character entry that has a glyph, using its first sense.
pub fn glyph_pairs(lex: &Lexicon, atlas: &GlyphAtlas) -> Vec<GlyphPair> {
    lex.entries()
        .filter_map(|e| {
            let mut chars = e.surface.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if atlas.contains(c) => Some(GlyphPair {
                    character: c,
                    definition: e.senses[0].definition.clone(),
                }),
                _ => None,
            }
        })
        .collect()
}

/// `½ (CE(S, diag) + CE(Sᵀ, diag))` for a square similarity-logit matrix.
pub fn symmetric_cross_entropy(tape: &Tape, logits: Var) -> Result<Var> {
    let b = match tape.shape(logits).as_slice() {
        &[r, c] if r == c && r >= 2 => r,
        s => {
            return Err(invalid!(
                "similarity matrix must be square with side >= 2, got {s:?}"
            ))
        }
    };
    let targets: Vec<usize> = (0..b).collect();
    let rows = tape.cross_entropy(logits, &targets)?;
    let cols = tape.cross_entropy(tape.transpose(logits)?, &targets)?;
    Ok(tape.scale(tape.add(rows, cols)?, 0.5)?)
}

/// Symmetric contrastive loss between glyph features and the [CLS] state of
/// `[CLS] char [SEP] definition [SEP]`, over cosine similarities divided by
/// the glyph encoder's learned temperature.
///
/// `augment`, when given, holds one distortion per pair.
pub fn glyph_contrastive_loss(
    pairs: &[GlyphPair],
    glyph: &BoundGlyph<'_>,
    text: &BoundEncoder<'_>,
    tok: &Tokenizer,
    atlas: &GlyphAtlas,
    augment: Option<&[GlyphAugmentation]>,
) -> Result<Var> {
    if pairs.len() < 2 {
        return Err(invalid!(
            "contrastive batch needs at least 2 pairs, got {}",
            pairs.len()
        ));
    }
    if augment.is_some_and(|a| a.len() != pairs.len()) {
        return Err(invalid!("one augmentation per pair is required"));
    }
    let t = glyph.tape();
    let bitmaps = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let bitmap = atlas.bitmap(p.character)?;
            Ok(match augment {
                Some(a) => a[i].apply(&bitmap, atlas.side()),
                None => bitmap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let image = t.normalize_rows(glyph.features(&bitmaps)?)?;
    let inputs: Vec<_> = pairs
        .iter()
        .map(|p| {
            tok.pair(
                &tok.ids(&p.character.to_string()),
                Some(&tok.ids(&p.definition)),
            )
        })
        .collect();
    let words = t.normalize_rows(text.forward_packed(&inputs)?.cls_rows(t)?)?;
    let cosine = t.matmul_t(image, words)?;
    let logits = t.mul(cosine, t.exp(glyph.log_inv_temp())?)?;
    symmetric_cross_entropy(t, logits)
}

/// Visual-branch feature `[d]` of one character.
pub fn glyph_feature(
    c: char,
    glyph: &GlyphEncoder,
    atlas: &GlyphAtlas,
    augment: Option<&GlyphAugmentation>,
) -> Result<Vec<Scalar>> {
    let mut bitmap = atlas.bitmap(c)?;
    if let Some(a) = augment {
        bitmap = a.apply(&bitmap, atlas.side());
    }
    let tape = Tape::new();
    let out = glyph.bind_frozen(&tape).features(&[bitmap])?;
    let value = tape.value(out).data().to_vec();
    Ok(value)
}

/// Which side of the aligned pair supplies the per-character glyph feature.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlyphSource {
    /// The convolutional encoder's output for the bitmap.
    #[default]
    Visual,
    /// The text encoder's [CLS] state for `[CLS] char [SEP]`.
    Text,
}

/// `[vocab, d]` table of glyph features for [`EncoderModel::set_glyph_features`].
/// Tokens without a glyph get zero rows.
pub fn glyph_feature_table(
    source: GlyphSource,
    glyph: &GlyphEncoder,
    text: &EncoderModel,
    tok: &Tokenizer,
    atlas: &GlyphAtlas,
) -> Result<Tensor> {
    let d = text.config().d;
    if glyph.config().d != d {
        return Err(invalid!(
            "glyph dimension {} differs from encoder dimension {d}",
            glyph.config().d
        ));
    }
    let vocab = tok.vocab();
    let mut data = vec![0.0; vocab.len() * d];
    for id in 0..vocab.len() {
        let Some(c) = vocab.char_of(id).filter(|&c| atlas.contains(c)) else {
            continue;
        };
        let row = match source {
            GlyphSource::Visual => glyph_feature(c, glyph, atlas, None)?,
            GlyphSource::Text => {
                let tape = Tape::new();
                let cls = text.bind_frozen(&tape).forward(&tok.pair(&[id], None))?.cls;
                let row = tape.value(cls).data().to_vec();
                row
            }
        };
        data[id * d..(id + 1) * d].copy_from_slice(&row);
    }
    Ok(Tensor::matrix(vocab.len(), d, data)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlyphTrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub lr: Scalar,
    pub warmup_ratio: Scalar,
    /// Draw a random distortion for every glyph in every step.
    pub augment: bool,
}

impl Default for GlyphTrainConfig {
    fn default() -> Self {
        Self {
            steps: 150,
            batch_size: 16,
            lr: 3e-3,
            warmup_ratio: 0.05,
            augment: true,
        }
    }
}

/// Trains the glyph encoder and the text encoder jointly on the contrastive
/// objective. Returns the loss of every step.
pub fn train_glyph(
    pairs: &[GlyphPair],
    atlas: &GlyphAtlas,
    glyph: &mut GlyphEncoder,
    text: &mut EncoderModel,
    tok: &Tokenizer,
    config: &GlyphTrainConfig,
    seed: u64,
) -> Result<Vec<Scalar>> {
    let b = config.batch_size.min(pairs.len());
    if b < 2 {
        return Err(invalid!("glyph training needs at least 2 pairs per batch"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opt = AdamW {
        lr: config.lr,
        ..AdamW::default()
    };
    let sched = LinearWarmup::new(config.lr, config.warmup_ratio, config.steps);
    let mut glyph_state = AdamState::new(glyph.params());
    let mut text_state = AdamState::new(text.params());
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut cursor = order.len();
    let mut losses = Vec::with_capacity(config.steps);
    for step in 0..config.steps {
        if cursor + b > order.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let batch: Vec<GlyphPair> = order[cursor..cursor + b]
            .iter()
            .map(|&i| pairs[i].clone())
            .collect();
        cursor += b;
        let augment: Option<Vec<GlyphAugmentation>> = config.augment.then(|| {
            (0..b)
                .map(|_| GlyphAugmentation::sample(&mut rng))
                .collect()
        });

        let tape = Tape::new();
        let (glyph_grads, text_grads, loss) = {
            let g = glyph.bind(&tape);
            let e = text.bind(&tape);
            let loss = glyph_contrastive_loss(&batch, &g, &e, tok, atlas, augment.as_deref())?;
            let value = tape.item(loss)?;
            let grads = tape.backward(loss)?;
            (
                glyph.params().collect_grads(g.bound(), &grads),
                text.params().collect_grads(e.bound(), &grads),
                value,
            )
        };
        let lr = sched.lr(step);
        opt.step(glyph.params_mut(), &glyph_grads, &mut glyph_state, lr);
        opt.step(text.params_mut(), &text_grads, &mut text_state, lr);
        losses.push(loss);
    }
    Ok(losses)
}

/// Cosine similarity of two equal-length vectors.
pub fn cosine(a: &[Scalar], b: &[Scalar]) -> Scalar {
    let dot: Scalar = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: Scalar = a.iter().map(|x| x * x).sum::<Scalar>().sqrt();
    let nb: Scalar = b.iter().map(|x| x * x).sum::<Scalar>().sqrt();
    dot / (na * nb).max(Scalar::MIN_POSITIVE)
}

#[cfg(test)]
mod tests;
