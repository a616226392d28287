//! Sense retrieval with the example-learning attention, and fusion of the
//! pooled dictionary vector with a task model's representation.
//!
//! The query is the [CLS] state of `[CLS] text [SEP]`; the keys are the
//! [CLS] states of `[CLS] entry [SEP] definition [SEP]`, one per sense. The
//! softmax of the scaled dot products weights the sense vectors.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dict::{match_entries, EntryMatch, Lexicon};
use crate::encoder::{EncoderModel, Tokenizer};
use crate::error::{invalid, Error, Result};
use crate::shuowen::el_batch_logits;
use crate::tensor::{AdamState, AdamW, ParamStore, Scalar, Tape, Tensor};

/// Sense weights and pooled vector for one matched entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SenseScore {
    pub matched: EntryMatch,
    /// Softmax over the entry's senses; sums to 1.
    pub weights: Vec<Scalar>,
    /// `Σ weights[i] · sense_vector[i]`, length `d`.
    pub pooled: Vec<Scalar>,
}

fn softmax(logits: &[Scalar]) -> Vec<Scalar> {
    let max = logits
        .iter()
        .copied()
        .fold(Scalar::NEG_INFINITY, Scalar::max);
    let exp: Vec<Scalar> = logits.iter().map(|&l| (l - max).exp()).collect();
    let z: Scalar = exp.iter().sum();
    exp.into_iter().map(|e| e / z).collect()
}

/// Matches lexicon entries in `text` and scores each entry's senses against
/// the whole text. No matches gives an empty list.
pub fn retrieve(
    text: &str,
    lex: &Lexicon,
    model: &EncoderModel,
    tok: &Tokenizer,
) -> Result<Vec<SenseScore>> {
    let matches = match_entries(text, lex);
    if matches.is_empty() {
        return Ok(Vec::new());
    }
    let tape = Tape::new();
    let enc = model.bind_frozen(&tape);
    let mut inputs = vec![tok.pair(&tok.ids(text), None)];
    for m in &matches {
        let entry = lex
            .get(&m.surface)
            .expect("matched surfaces come from the lexicon");
        let ent = tok.ids(&entry.surface);
        inputs.extend(
            entry
                .senses
                .iter()
                .map(|s| tok.pair(&ent, Some(&tok.ids(&s.definition)))),
        );
    }
    let cls = enc.forward_packed(&inputs)?.cls_rows(&tape)?;
    let cls = tape.value(cls).clone();
    let d = model.config().d;
    let scale = 1.0 / (d as Scalar).sqrt();
    let query = cls.row(0).to_vec();
    let mut row = 1;
    let mut out = Vec::with_capacity(matches.len());
    for m in matches {
        let k = lex.get(&m.surface).map_or(0, |e| e.senses.len());
        let keys: Vec<&[Scalar]> = (row..row + k).map(|r| cls.row(r)).collect();
        row += k;
        let weights = if k == 1 {
            vec![1.0]
        } else {
            let logits: Vec<Scalar> = keys
                .iter()
                .map(|key| scale * key.iter().zip(&query).map(|(a, b)| a * b).sum::<Scalar>())
                .collect();
            softmax(&logits)
        };
        let mut pooled = vec![0.0; d];
        for (w, key) in weights.iter().zip(&keys) {
            for (p, x) in pooled.iter_mut().zip(key.iter()) {
                *p += w * x;
            }
        }
        out.push(SenseScore {
            matched: m,
            weights,
            pooled,
        });
    }
    Ok(out)
}

/// Attention logits of the context over the `K ≥ 2` choices; the argmax
/// (lowest index on ties) is the predicted sense.
pub fn score_choices(
    context: &str,
    entry: &str,
    choices: &[String],
    model: &EncoderModel,
    tok: &Tokenizer,
) -> Result<Vec<Scalar>> {
    let tape = Tape::new();
    let enc = model.bind_frozen(&tape);
    let logits = el_batch_logits(&enc, tok, &[(entry, choices, context)])?;
    let value = tape.value(logits[0]).data().to_vec();
    Ok(value)
}

/// Mean of the pooled vectors over all matches; zeros when nothing matches.
pub fn dict_vector(
    text: &str,
    lex: &Lexicon,
    model: &EncoderModel,
    tok: &Tokenizer,
) -> Result<Vec<Scalar>> {
    let scores = retrieve(text, lex, model, tok)?;
    let mut v = vec![0.0; model.config().d];
    for s in &scores {
        for (a, b) in v.iter_mut().zip(&s.pooled) {
            *a += b;
        }
    }
    if !scores.is_empty() {
        let n = scores.len() as Scalar;
        v.iter_mut().for_each(|a| *a /= n);
    }
    Ok(v)
}

/// [CLS] state of `[CLS] text [SEP]` under a task model.
pub fn lm_vector(text: &str, model: &EncoderModel, tok: &Tokenizer) -> Result<Vec<Scalar>> {
    let tape = Tape::new();
    let cls = model
        .bind_frozen(&tape)
        .forward(&tok.pair(&tok.ids(text), None))?
        .cls;
    let value = tape.value(cls).data().to_vec();
    Ok(value)
}

/// `fused = lm ⊕ dict`, language-model part first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedRepresentation {
    pub lm: Vec<Scalar>,
    pub dict: Vec<Scalar>,
    pub fused: Vec<Scalar>,
}

impl FusedRepresentation {
    pub fn new(lm: Vec<Scalar>, dict: Vec<Scalar>) -> Self {
        let fused = lm.iter().chain(&dict).copied().collect();
        Self { lm, dict, fused }
    }
}

/// Linear classifier over a feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskHead {
    params: ParamStore,
}

impl TaskHead {
    /// `w ~ N(0, 1/inputs)` from `seed`, `b = 0`.
    pub fn new(inputs: usize, classes: usize, seed: u64) -> Result<Self> {
        if inputs == 0 || classes < 2 {
            return Err(invalid!(
                "task head needs inputs > 0 and at least 2 classes"
            ));
        }
        use rand_distr::{Distribution, Normal};
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Normal::new(0.0, (1.0 / inputs as Scalar).sqrt()).expect("valid std");
        let w = (0..inputs * classes)
            .map(|_| dist.sample(&mut rng))
            .collect();
        let mut params = ParamStore::new();
        params.add("head.w", Tensor::matrix(inputs, classes, w)?, true);
        params.add("head.b", Tensor::zeros(&[classes]), false);
        Ok(Self { params })
    }

    pub fn inputs(&self) -> usize {
        self.params.iter().next().expect("weight").value.shape()[0]
    }

    pub fn classes(&self) -> usize {
        self.params.iter().next().expect("weight").value.shape()[1]
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    /// Class logits of one feature vector.
    pub fn logits(&self, features: &[Scalar]) -> Result<Vec<Scalar>> {
        if features.len() != self.inputs() {
            return Err(invalid!(
                "head expects {} features, got {}",
                self.inputs(),
                features.len()
            ));
        }
        let tape = Tape::new();
        let b = self.params.bind_frozen(&tape);
        let x = tape.constant(Tensor::matrix(1, features.len(), features.to_vec())?);
        let out = tape.add_row(tape.matmul(x, b.vars()[0])?, b.vars()[1])?;
        let value = tape.value(out).data().to_vec();
        Ok(value)
    }
}

/// Retrieves and pools dictionary senses for `text`, concatenates them with
/// the task model's representation and applies the head.
pub fn fuse(
    text: &str,
    lex: &Lexicon,
    lm: &EncoderModel,
    retriever: &EncoderModel,
    tok: &Tokenizer,
    head: &TaskHead,
) -> Result<(FusedRepresentation, Vec<Scalar>)> {
    let rep = FusedRepresentation::new(
        lm_vector(text, lm, tok)?,
        dict_vector(text, lex, retriever, tok)?,
    );
    let logits = head.logits(&rep.fused)?;
    Ok((rep, logits))
}

/// One labelled sentence of a classification task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskExample {
    pub text: String,
    pub label: usize,
}

/// Reads `{"text": s, "label": n}` lines.
pub fn load_task(path: impl AsRef<Path>) -> Result<Vec<TaskExample>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::format(path, i + 1, e.to_string()))
        })
        .collect()
}

/// Whether the dictionary half of the features is filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMode {
    /// `lm ⊕ 0`: same head shape, no dictionary information.
    Baseline,
    Fused,
}

/// Feature rows for every example under `mode`.
pub fn task_features(
    examples: &[TaskExample],
    lex: &Lexicon,
    lm: &EncoderModel,
    retriever: &EncoderModel,
    tok: &Tokenizer,
    mode: FusionMode,
) -> Result<Vec<Vec<Scalar>>> {
    examples
        .iter()
        .map(|ex| {
            let dict = match mode {
                FusionMode::Fused => dict_vector(&ex.text, lex, retriever, tok)?,
                FusionMode::Baseline => vec![0.0; retriever.config().d],
            };
            Ok(FusedRepresentation::new(lm_vector(&ex.text, lm, tok)?, dict).fused)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadTrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub lr: Scalar,
    pub weight_decay: Scalar,
}

impl Default for HeadTrainConfig {
    fn default() -> Self {
        Self {
            steps: 100,
            batch_size: 16,
            lr: 1e-2,
            weight_decay: 0.01,
        }
    }
}

/// Trains the head alone on fixed features; the encoders stay frozen.
/// Returns the mean cross-entropy of every step.
pub fn train_head(
    head: &mut TaskHead,
    features: &[Vec<Scalar>],
    labels: &[usize],
    config: &HeadTrainConfig,
    seed: u64,
) -> Result<Vec<Scalar>> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(invalid!(
            "need one label per feature row and at least one row"
        ));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= head.classes()) {
        return Err(invalid!(
            "label {bad} out of range for {} classes",
            head.classes()
        ));
    }
    let b = config.batch_size.clamp(1, features.len());
    let opt = AdamW {
        lr: config.lr,
        weight_decay: config.weight_decay,
        ..AdamW::default()
    };
    let mut state = AdamState::new(&head.params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut cursor = order.len();
    let mut losses = Vec::with_capacity(config.steps);
    for _ in 0..config.steps {
        if cursor + b > order.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let batch = &order[cursor..cursor + b];
        cursor += b;
        let x: Vec<Scalar> = batch
            .iter()
            .flat_map(|&i| features[i].iter().copied())
            .collect();
        let y: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
        let tape = Tape::new();
        let bound = head.params.bind(&tape);
        let xs = tape.constant(Tensor::matrix(b, head.inputs(), x)?);
        let logits = tape.add_row(tape.matmul(xs, bound.vars()[0])?, bound.vars()[1])?;
        let loss = tape.cross_entropy(logits, &y)?;
        losses.push(tape.item(loss)?);
        let grads = tape.backward(loss)?;
        let grads = head.params.collect_grads(&bound, &grads);
        opt.step(&mut head.params, &grads, &mut state, config.lr);
    }
    Ok(losses)
}

/// Mean cross-entropy of the head over all rows.
pub fn head_loss(head: &TaskHead, features: &[Vec<Scalar>], labels: &[usize]) -> Result<Scalar> {
    let mut total = 0.0;
    for (f, &y) in features.iter().zip(labels) {
        let p = softmax(&head.logits(f)?);
        total -= p[y].ln();
    }
    Ok(total / features.len().max(1) as Scalar)
}
