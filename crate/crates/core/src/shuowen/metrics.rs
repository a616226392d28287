use serde::Serialize;

use super::losses::{
    argmax, cl4sa_batch_scores, el_batch_logits, mem_predict_batch, ContrastPair, ELItem, MemItem,
    NegativeKind,
};
use crate::encoder::{EncoderModel, Tokenizer};
use crate::error::Result;
use crate::tensor::{Scalar, Tape};

/// Items encoded per tape during evaluation.
const EVAL_CHUNK: usize = 32;

/// Fraction of items whose highest-attention sense is the gold one.
pub fn el_accuracy(items: &[ELItem], model: &EncoderModel, tok: &Tokenizer) -> Result<Scalar> {
    let mut hits = 0;
    for chunk in items.chunks(EVAL_CHUNK) {
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        let queries: Vec<_> = chunk
            .iter()
            .map(|e| {
                (
                    e.entry.as_str(),
                    e.definitions.as_slice(),
                    e.example.as_str(),
                )
            })
            .collect();
        for (item, logits) in chunk.iter().zip(el_batch_logits(&enc, tok, &queries)?) {
            hits += usize::from(argmax(tape.value(logits).data()) == item.gold);
        }
    }
    Ok(hits as Scalar / items.len().max(1) as Scalar)
}

/// Fraction of MEM items whose masked entry is recovered exactly: every
/// masked character must be the top-1 prediction.
pub fn mem_recovery(items: &[MemItem], model: &EncoderModel, tok: &Tokenizer) -> Result<Scalar> {
    let mut hits = 0;
    for chunk in items.chunks(EVAL_CHUNK) {
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        for (preds, plan) in mem_predict_batch(chunk, &enc, tok)? {
            hits += usize::from(preds == plan.original);
        }
    }
    Ok(hits as Scalar / items.len().max(1) as Scalar)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityGap {
    /// Mean anchor-synonym dot product.
    pub synonym: Scalar,
    /// Mean anchor-antonym dot product.
    pub antonym: Scalar,
    pub pairs: usize,
}

/// Mean [CLS] dot products over the pairs whose negative is an antonym.
pub fn synonym_antonym_similarity(
    pairs: &[ContrastPair],
    model: &EncoderModel,
    tok: &Tokenizer,
) -> Result<SimilarityGap> {
    let antonym: Vec<ContrastPair> = pairs
        .iter()
        .filter(|p| p.kind == NegativeKind::Antonym)
        .cloned()
        .collect();
    let (mut syn, mut ant) = (0.0, 0.0);
    for chunk in antonym.chunks(EVAL_CHUNK) {
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        for (a, b) in cl4sa_batch_scores(chunk, &enc, tok)? {
            syn += tape.item(a)?;
            ant += tape.item(b)?;
        }
    }
    let d = antonym.len().max(1) as Scalar;
    Ok(SimilarityGap {
        synonym: syn / d,
        antonym: ant / d,
        pairs: antonym.len(),
    })
}
