//! Character-level transformer encoder.
//!
//! Inputs use the layout `[CLS] a [SEP]` or `[CLS] a [SEP] b [SEP]`. Each
//! position embeds as token + position + radical (+ an optional fixed glyph
//! feature), followed by pre-LN transformer blocks and a final layer norm.
//!
//! ```
//! use cdbert::encoder::{EncoderConfig, EncoderModel, RadicalTable, Tokenizer, Vocab};
//! use cdbert::tensor::Tape;
//!
//! let vocab = Vocab::from_chars("明天见".chars());
//! let radicals = RadicalTable::from_pairs([('明', "日"), ('天', "大")]);
//! let tok = Tokenizer::new(vocab, radicals);
//! let mut config = EncoderConfig::new(tok.vocab().len(), tok.radicals().num_ids());
//! config.d = 8;
//! let model = EncoderModel::new(config, 0).unwrap();
//!
//! let tape = Tape::new();
//! let enc = model.bind_frozen(&tape);
//! let input = tok.pair(&tok.ids("明天"), Some(&tok.ids("见")));
//! let out = enc.forward(&input).unwrap();
//! assert_eq!(tape.shape(out.hidden), vec![2 + 1 + 3, 8]);
//! ```

mod model;
mod radical;
mod vocab;

use std::ops::Range;

pub use model::{BoundEncoder, Encoded, EncoderConfig, EncoderModel, Packed};
pub use radical::{radical_ids_for, RadicalTable, NO_RADICAL};
pub use vocab::{Vocab, CLS, MASK, NUM_SPECIALS, PAD, SEP, UNK};

use crate::error::Result;

/// A laid-out encoder input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairInput {
    pub ids: Vec<usize>,
    pub radicals: Vec<usize>,
    /// Positions of segment `a`.
    pub a_span: Range<usize>,
    /// Positions of segment `b`, when present.
    pub b_span: Option<Range<usize>>,
}

impl PairInput {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Appends [`PAD`] tokens up to `len`.
    pub fn padded(mut self, len: usize) -> Self {
        while self.ids.len() < len {
            self.ids.push(PAD);
            self.radicals.push(NO_RADICAL);
        }
        self
    }
}

/// Vocabulary plus radical table, with the token-to-radical map precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Tokenizer {
    vocab: Vocab,
    radicals: RadicalTable,
    token_radical: Vec<usize>,
}

impl Tokenizer {
    pub fn new(vocab: Vocab, radicals: RadicalTable) -> Self {
        let all: Vec<usize> = (0..vocab.len()).collect();
        let token_radical = radical_ids_for(&all, &vocab, &radicals);
        Self {
            vocab,
            radicals,
            token_radical,
        }
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn radicals(&self) -> &RadicalTable {
        &self.radicals
    }

    pub fn ids(&self, text: &str) -> Vec<usize> {
        self.vocab.encode(text)
    }

    pub fn radical_ids(&self, ids: &[usize]) -> Vec<usize> {
        ids.iter()
            .map(|&t| self.token_radical.get(t).copied().unwrap_or(NO_RADICAL))
            .collect()
    }

    /// `[CLS] a [SEP]`, followed by `b [SEP]` when `b` is given.
    pub fn pair(&self, a: &[usize], b: Option<&[usize]>) -> PairInput {
        let mut ids = Vec::with_capacity(a.len() + b.map_or(0, <[usize]>::len) + 3);
        ids.push(CLS);
        ids.extend_from_slice(a);
        ids.push(SEP);
        let a_span = 1..1 + a.len();
        let b_span = b.map(|b| {
            let start = ids.len();
            ids.extend_from_slice(b);
            ids.push(SEP);
            start..start + b.len()
        });
        let radicals = self.radical_ids(&ids);
        PairInput {
            ids,
            radicals,
            a_span,
            b_span,
        }
    }

    /// Like [`Tokenizer::pair`], but drops the tail of `b` so the whole input
    /// fits in `max_len`. Segment `a` is never cut.
    pub fn pair_truncated(&self, a: &[usize], b: &[usize], max_len: usize) -> PairInput {
        let room = max_len.saturating_sub(a.len() + 3);
        self.pair(a, Some(&b[..b.len().min(room)]))
    }
}

/// Encodes `[CLS] a [SEP] (b [SEP])`, failing when longer than `max_len`.
pub fn encode_pair(
    enc: &BoundEncoder<'_>,
    tok: &Tokenizer,
    a: &[usize],
    b: Option<&[usize]>,
) -> Result<Encoded> {
    enc.forward(&tok.pair(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::tensor::{ParamStore, Tape, Tensor};

    fn setup(d: usize) -> (Tokenizer, EncoderModel) {
        let vocab = Vocab::from_chars("明天见山水日月".chars());
        let radicals = RadicalTable::from_pairs([('明', "日"), ('天', "大"), ('水', "水")]);
        let tok = Tokenizer::new(vocab, radicals);
        let mut config = EncoderConfig::new(tok.vocab().len(), tok.radicals().num_ids());
        config.d = d;
        config.max_len = 16;
        (tok, EncoderModel::new(config, 3).unwrap())
    }

    #[test]
    fn layout_shapes() {
        let (tok, model) = setup(8);
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        let single = encode_pair(&enc, &tok, &tok.ids("山水日"), None).unwrap();
        assert_eq!(tape.shape(single.hidden), vec![5, 8]);
        assert_eq!(tape.shape(single.cls), vec![8]);
        let pair = encode_pair(&enc, &tok, &tok.ids("山水日"), Some(&tok.ids("明月"))).unwrap();
        assert_eq!(tape.shape(pair.hidden), vec![3 + 2 + 3, 8]);
        let input = tok.pair(&[7, 8], Some(&[9]));
        assert_eq!(input.ids, vec![CLS, 7, 8, SEP, 9, SEP]);
        assert_eq!(
            (input.a_span.clone(), input.b_span.clone()),
            (1..3, Some(4..5))
        );
    }

    #[test]
    fn overlong_reports_lengths() {
        let (tok, model) = setup(8);
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        let long = vec![tok.vocab().id('山'); 20];
        match encode_pair(&enc, &tok, &long, None) {
            Err(Error::Overlong {
                actual: 22,
                max: 16,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(tok.pair_truncated(&long[..4], &long, 16).len(), 16);
    }

    #[test]
    fn param_count_closed_form() {
        let (_, model) = setup(8);
        let c = *model.config();
        let (d, v, r, l) = (8, c.vocab_size, c.radical_vocab_size, c.max_len);
        let per_layer = 4 * (d * d + d) + (d * 4 * d + 4 * d) + (4 * d * d + d) + 4 * d;
        let expected = v * d + l * d + r * d + 2 * per_layer + 2 * d + d * v + v;
        assert_eq!(model.params().numel(), expected);
        assert_eq!(c.param_count(), expected);
        let bigger = EncoderConfig::new(1000, 50);
        assert_eq!(
            EncoderModel::new(bigger, 0).unwrap().params().numel(),
            bigger.param_count()
        );
    }

    #[test]
    fn attention_rows_are_distributions() {
        let (tok, model) = setup(8);
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        let out = enc
            .forward(&tok.pair(&tok.ids("明天"), Some(&tok.ids("山水"))))
            .unwrap();
        assert_eq!(out.attention.len(), 2);
        for a in out.attention.iter().flatten() {
            let w = tape.value(*a).clone();
            for i in 0..w.shape()[0] {
                let s: f64 = w.row(i).iter().sum();
                assert!((s - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_radical_table_equals_radical_free_encoder() {
        let (tok, mut model) = setup(8);
        let rad = model.radical_table_id();
        let shape = model.params().get(rad).shape().to_vec();
        *model.params_mut().get_mut(rad) = Tensor::zeros(&shape);
        let with = tok.pair(&tok.ids("明天水"), None);
        let mut without = with.clone();
        without.radicals.iter_mut().for_each(|r| *r = NO_RADICAL);
        assert_ne!(with.radicals, without.radicals);
        let run = |input: &PairInput| {
            let tape = Tape::new();
            let enc = model.bind_frozen(&tape);
            let h = enc.forward(input).unwrap().hidden;
            let out = tape.value(h).clone();
            out
        };
        assert_eq!(run(&with), run(&without));
    }

    #[test]
    fn pad_positions_do_not_affect_real_tokens() {
        let (tok, model) = setup(8);
        let base = tok.pair(&tok.ids("明天"), Some(&tok.ids("见")));
        let n = base.len();
        let padded = base.clone().padded(n + 4);
        let run = |input: &PairInput| {
            let tape = Tape::new();
            let enc = model.bind_frozen(&tape);
            let h = enc.forward(input).unwrap().hidden;
            let v = tape.value(h).clone();
            v.data()[..n * 8].to_vec()
        };
        let a = run(&base);
        let b = run(&padded);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn packed_batch_matches_single_sequences() {
        let (tok, model) = setup(8);
        let inputs = vec![
            tok.pair(&tok.ids("明天"), Some(&tok.ids("见山水"))),
            tok.pair(&tok.ids("日"), None),
            tok.pair(&tok.ids("山水日月"), Some(&tok.ids("明")))
                .padded(12),
        ];
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        let packed = enc.forward_packed(&inputs).unwrap();
        assert_eq!(packed.starts, vec![0, 8, 11]);
        let all = tape.value(packed.hidden).clone();
        let cls = tape.value(packed.cls_rows(&tape).unwrap()).clone();
        for (s, input) in inputs.iter().enumerate() {
            let single = enc.forward(input).unwrap();
            let h = tape.value(single.hidden).clone();
            let rows = &all.data()[packed.starts[s] * 8..(packed.starts[s] + input.len()) * 8];
            for (x, y) in h.data().iter().zip(rows) {
                assert!((x - y).abs() < 1e-12);
            }
            for (x, y) in tape.value(single.cls).data().iter().zip(cls.row(s)) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        assert!(packed.gather(&tape, &[(1, 3)]).is_err());
        assert!(enc.forward_packed(&[]).is_err());
    }

    #[test]
    fn mlm_logits_shapes() {
        let (tok, model) = setup(8);
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        let out = enc.forward(&tok.pair(&tok.ids("明天"), None)).unwrap();
        let v = tok.vocab().len();
        assert_eq!(
            tape.shape(enc.mlm_logits(out.hidden, &[1, 2]).unwrap()),
            vec![2, v]
        );
        assert_eq!(
            tape.shape(enc.mlm_logits(out.hidden, &[]).unwrap()),
            vec![0, v]
        );
        assert!(enc.mlm_logits(out.hidden, &[9]).is_err());
    }

    #[test]
    fn from_params_round_trip() {
        let (_, model) = setup(8);
        let copy = EncoderModel::from_params(*model.config(), model.params()).unwrap();
        assert_eq!(copy, model);
        assert!(EncoderModel::from_params(*model.config(), &ParamStore::new()).is_err());
    }
}
