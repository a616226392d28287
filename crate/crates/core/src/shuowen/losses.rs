use serde::{Deserialize, Serialize};

use crate::dict::DictEntry;
use crate::encoder::{BoundEncoder, PairInput, Tokenizer, MASK, NO_RADICAL};
use crate::error::{invalid, Result};
use crate::tensor::{Scalar, Var};

/// Which positions MEM hides, and what was there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskPlan {
    pub positions: Vec<usize>,
    pub original: Vec<usize>,
}

impl MaskPlan {
    /// Whole-entry plan: every position of segment `a`.
    pub fn whole_entry(input: &PairInput) -> Self {
        let positions: Vec<usize> = input.a_span.clone().collect();
        let original = positions.iter().map(|&p| input.ids[p]).collect();
        Self {
            positions,
            original,
        }
    }

    /// Copy of `input` with the planned positions replaced by `[MASK]`.
    pub fn apply(&self, input: &PairInput) -> PairInput {
        let mut out = input.clone();
        for &p in &self.positions {
            out.ids[p] = MASK;
            out.radicals[p] = NO_RADICAL;
        }
        out
    }
}

/// One masked-entry-modeling example: an entry paired with one of its definitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemItem {
    pub entry: String,
    pub sense: usize,
    pub definition: String,
}

impl MemItem {
    pub fn new(entry: &DictEntry, sense: usize) -> Self {
        Self {
            entry: entry.surface.clone(),
            sense,
            definition: entry.senses[sense].definition.clone(),
        }
    }

    /// Masked input and its plan; the definition tail is cut to fit `max_len`.
    pub fn layout(&self, tok: &Tokenizer, max_len: usize) -> (PairInput, MaskPlan) {
        let input = tok.pair_truncated(&tok.ids(&self.entry), &tok.ids(&self.definition), max_len);
        let plan = MaskPlan::whole_entry(&input);
        (plan.apply(&input), plan)
    }
}

/// A surface and the definition it is encoded with, if the dictionary has one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContrastSide {
    pub surface: String,
    pub definition: Option<String>,
}

impl ContrastSide {
    pub fn new(surface: &str, entry: Option<&DictEntry>) -> Self {
        Self {
            surface: surface.to_string(),
            definition: entry.map(|e| e.senses[0].definition.clone()),
        }
    }

    fn input(&self, tok: &Tokenizer) -> PairInput {
        let def = self.definition.as_deref().map(|d| tok.ids(d));
        tok.pair(&tok.ids(&self.surface), def.as_deref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativeKind {
    Antonym,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastPair {
    pub anchor: ContrastSide,
    pub positive: ContrastSide,
    pub negative: ContrastSide,
    pub kind: NegativeKind,
    pub weight: Scalar,
}

/// One example-learning item: pick sense `gold` of `entry` for `example`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ELItem {
    pub entry: String,
    pub gold: usize,
    pub definitions: Vec<String>,
    pub example: String,
}

impl ELItem {
    fn query(&self) -> (&str, &[String], &str) {
        (&self.entry, &self.definitions, &self.example)
    }
}

fn mean(enc: &BoundEncoder<'_>, terms: &[Var]) -> Result<Var> {
    let t = enc.tape();
    let mut acc = terms[0];
    for &x in &terms[1..] {
        acc = t.add(acc, x)?;
    }
    Ok(t.scale(acc, 1.0 / terms.len() as Scalar)?)
}

fn non_empty<T>(items: &[T], what: &str) -> Result<()> {
    if items.is_empty() {
        return Err(invalid!("no {what} items"));
    }
    Ok(())
}

/// `[Σ masked, vocab]` MLM logits for a batch of MEM items, with each
/// item's plan and its first logits row.
fn mem_logits(
    items: &[MemItem],
    enc: &BoundEncoder<'_>,
    tok: &Tokenizer,
) -> Result<(Var, Vec<MaskPlan>, Vec<usize>)> {
    let max_len = enc.model().config().max_len;
    let (inputs, plans): (Vec<PairInput>, Vec<MaskPlan>) =
        items.iter().map(|m| m.layout(tok, max_len)).unzip();
    let packed = enc.forward_packed(&inputs)?;
    let mut at = Vec::new();
    let mut offsets = Vec::with_capacity(items.len());
    for (s, plan) in plans.iter().enumerate() {
        offsets.push(at.len());
        at.extend(plan.positions.iter().map(|&p| (s, p)));
    }
    let logits = enc.mlm_head(packed.gather(enc.tape(), &at)?)?;
    Ok((logits, plans, offsets))
}

/// Mean cross-entropy of the MLM head over the masked entry positions.
pub fn mem_loss(item: &MemItem, enc: &BoundEncoder<'_>, tok: &Tokenizer) -> Result<Var> {
    mem_batch_loss(std::slice::from_ref(item), enc, tok)
}

/// Mean over items of [`mem_loss`], encoded as one packed batch.
pub fn mem_batch_loss(items: &[MemItem], enc: &BoundEncoder<'_>, tok: &Tokenizer) -> Result<Var> {
    non_empty(items, "MEM")?;
    let t = enc.tape();
    let (logits, plans, offsets) = mem_logits(items, enc, tok)?;
    let losses = plans
        .iter()
        .zip(&offsets)
        .map(|(plan, &o)| {
            let rows = if items.len() == 1 {
                logits
            } else {
                t.slice(logits, 0, o, o + plan.positions.len())?
            };
            Ok(t.cross_entropy(rows, &plan.original)?)
        })
        .collect::<Result<Vec<_>>>()?;
    mean(enc, &losses)
}

/// Top-1 MLM predictions at the masked positions of `item`.
pub fn mem_predict(
    item: &MemItem,
    enc: &BoundEncoder<'_>,
    tok: &Tokenizer,
) -> Result<(Vec<usize>, MaskPlan)> {
    Ok(mem_predict_batch(std::slice::from_ref(item), enc, tok)?.remove(0))
}

pub fn mem_predict_batch(
    items: &[MemItem],
    enc: &BoundEncoder<'_>,
    tok: &Tokenizer,
) -> Result<Vec<(Vec<usize>, MaskPlan)>> {
    non_empty(items, "MEM")?;
    let (logits, plans, offsets) = mem_logits(items, enc, tok)?;
    let logits = enc.tape().value(logits).clone();
    Ok(plans
        .into_iter()
        .zip(offsets)
        .map(|(plan, o)| {
            let preds = (o..o + plan.positions.len())
                .map(|r| argmax(logits.row(r)))
                .collect();
            (preds, plan)
        })
        .collect())
}

/// `(a, b)`: anchor-positive and anchor-negative dot products of the [CLS] states.
pub fn cl4sa_scores(
    pair: &ContrastPair,
    enc: &BoundEncoder<'_>,
    tok: &Tokenizer,
) -> Result<(Var, Var)> {
    Ok(cl4sa_batch_scores(std::slice::from_ref(pair), enc, tok)?[0])
}

pub fn cl4sa_batch_scores(
    pairs: &[ContrastPair],
    enc: &BoundEncoder<'_>,
    tok: &Tokenizer,
) -> Result<Vec<(Var, Var)>> {
    non_empty(pairs, "CL4SA")?;
    let t = enc.tape();
    let inputs: Vec<PairInput> = pairs
        .iter()
        .flat_map(|p| {
            [
                p.anchor.input(tok),
                p.positive.input(tok),
                p.negative.input(tok),
            ]
        })
        .collect();
    let cls = enc.forward_packed(&inputs)?.cls_rows(t)?;
    (0..pairs.len())
        .map(|i| {
            let anchor = t.row(cls, 3 * i)?;
            let pos = t.row(cls, 3 * i + 1)?;
            let neg = t.row(cls, 3 * i + 2)?;
            Ok((t.dot(anchor, pos)?, t.dot(anchor, neg)?))
        })
        .collect()
}

/// `weight * ln(1 + e^(b - a))`.
pub fn cl4sa_from_scores(enc: &BoundEncoder<'_>, a: Var, b: Var, weight: Scalar) -> Result<Var> {
    let t = enc.tape();
    Ok(t.scale(t.softplus(t.sub(b, a)?)?, weight)?)
}

pub fn cl4sa_loss(pair: &ContrastPair, enc: &BoundEncoder<'_>, tok: &Tokenizer) -> Result<Var> {
    cl4sa_batch_loss(std::slice::from_ref(pair), enc, tok)
}

/// Mean over pairs of [`cl4sa_loss`].
pub fn cl4sa_batch_loss(
    pairs: &[ContrastPair],
    enc: &BoundEncoder<'_>,
    tok: &Tokenizer,
) -> Result<Var> {
    let scores = cl4sa_batch_scores(pairs, enc, tok)?;
    let losses = scores
        .iter()
        .zip(pairs)
        .map(|(&(a, b), p)| cl4sa_from_scores(enc, a, b, p.weight))
        .collect::<Result<Vec<_>>>()?;
    mean(enc, &losses)
}

/// Attention logits `[1, K]` of the example's [CLS] over each sense's
/// `[CLS] entry [SEP] definition [SEP]` state, scaled by `1/sqrt(d)`.
pub fn el_logits(
    enc: &BoundEncoder<'_>,
    tok: &Tokenizer,
    entry: &str,
    definitions: &[String],
    example: &str,
) -> Result<Var> {
    Ok(el_batch_logits(enc, tok, &[(entry, definitions, example)])?[0])
}

/// [`el_logits`] for many `(entry, definitions, example)` queries at once.
pub fn el_batch_logits(
    enc: &BoundEncoder<'_>,
    tok: &Tokenizer,
    queries: &[(&str, &[String], &str)],
) -> Result<Vec<Var>> {
    non_empty(queries, "EL")?;
    let t = enc.tape();
    let mut inputs = Vec::new();
    for &(entry, definitions, example) in queries {
        if definitions.len() < 2 {
            return Err(invalid!(
                "example learning needs at least 2 senses, got {}",
                definitions.len()
            ));
        }
        inputs.push(tok.pair(&tok.ids(example), None));
        let ent = tok.ids(entry);
        inputs.extend(
            definitions
                .iter()
                .map(|d| tok.pair(&ent, Some(&tok.ids(d)))),
        );
    }
    let cls = enc.forward_packed(&inputs)?.cls_rows(t)?;
    let scale = 1.0 / (enc.model().config().d as Scalar).sqrt();
    let mut row = 0;
    let mut out = Vec::with_capacity(queries.len());
    for &(_, definitions, _) in queries {
        let k = definitions.len();
        let q = t.slice(cls, 0, row, row + 1)?;
        let keys = t.slice(cls, 0, row + 1, row + 1 + k)?;
        out.push(t.scale(t.matmul_t(q, keys)?, scale)?);
        row += 1 + k;
    }
    Ok(out)
}

/// Cross-entropy of the sense attention against the gold sense, plus the
/// attention row `[1, K]`.
pub fn el_loss(item: &ELItem, enc: &BoundEncoder<'_>, tok: &Tokenizer) -> Result<(Var, Var)> {
    let logits = el_batch_logits(enc, tok, &[item.query()])?[0];
    let t = enc.tape();
    Ok((
        el_cross_entropy(item, enc, logits)?,
        t.softmax_lastdim(logits)?,
    ))
}

/// Mean over items of the [`el_loss`] cross-entropy.
pub fn el_batch_loss(items: &[ELItem], enc: &BoundEncoder<'_>, tok: &Tokenizer) -> Result<Var> {
    let queries: Vec<_> = items.iter().map(ELItem::query).collect();
    let logits = el_batch_logits(enc, tok, &queries)?;
    let losses = items
        .iter()
        .zip(logits)
        .map(|(item, l)| el_cross_entropy(item, enc, l))
        .collect::<Result<Vec<_>>>()?;
    mean(enc, &losses)
}

fn el_cross_entropy(item: &ELItem, enc: &BoundEncoder<'_>, logits: Var) -> Result<Var> {
    if item.gold >= item.definitions.len() {
        return Err(invalid!(
            "gold sense {} of {} for {}",
            item.gold,
            item.definitions.len(),
            item.entry
        ));
    }
    Ok(enc.tape().cross_entropy(logits, &[item.gold])?)
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[Scalar]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
