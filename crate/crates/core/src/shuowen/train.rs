use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::batches::{build_pretrain_batches, BatchConfig, PretrainBatch};
use super::losses::{cl4sa_batch_loss, el_batch_loss, mem_batch_loss};
use crate::dict::Lexicon;
use crate::encoder::{BoundEncoder, EncoderModel, Tokenizer};
use crate::error::{invalid, Error, Result};
use crate::tensor::{save_checkpoint, AdamState, AdamW, LinearWarmup, Scalar, Tape, Var};

/// λ weights of the combined objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    pub mem: Scalar,
    pub cl4sa: Scalar,
    pub el: Scalar,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            mem: 0.6,
            cl4sa: 0.2,
            el: 0.2,
        }
    }
}

impl LossWeights {
    pub fn combine(&self, mem: Scalar, cl4sa: Scalar, el: Scalar) -> Scalar {
        self.mem * mem + self.cl4sa * cl4sa + self.el * el
    }
}

/// Loss values of one step; inactive objectives report 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub step: usize,
    #[serde(rename = "L")]
    pub total: Scalar,
    #[serde(rename = "L_mem")]
    pub mem: Scalar,
    #[serde(rename = "L_cl4sa")]
    pub cl4sa: Scalar,
    #[serde(rename = "L_el")]
    pub el: Scalar,
}

/// `L = λ1 L_mem + λ2 L_cl4sa + λ3 L_el`, each term the mean over its items.
///
/// Objectives with λ = 0 or no items are not evaluated at all, so they leave
/// no trace on the tape.
pub fn combined_loss(
    batch: &PretrainBatch,
    enc: &BoundEncoder<'_>,
    tok: &Tokenizer,
    weights: &LossWeights,
) -> Result<(Var, LossReport)> {
    let t = enc.tape();
    let mut terms = Vec::new();
    let mut report = LossReport {
        step: batch.step,
        total: 0.0,
        mem: 0.0,
        cl4sa: 0.0,
        el: 0.0,
    };
    if weights.mem != 0.0 && !batch.mem.is_empty() {
        let l = mem_batch_loss(&batch.mem, enc, tok)?;
        report.mem = t.item(l)?;
        terms.push(t.scale(l, weights.mem)?);
    }
    if weights.cl4sa != 0.0 && !batch.cl4sa.is_empty() {
        let l = cl4sa_batch_loss(&batch.cl4sa, enc, tok)?;
        report.cl4sa = t.item(l)?;
        terms.push(t.scale(l, weights.cl4sa)?);
    }
    if weights.el != 0.0 && !batch.el.is_empty() {
        let l = el_batch_loss(&batch.el, enc, tok)?;
        report.el = t.item(l)?;
        terms.push(t.scale(l, weights.el)?);
    }
    if terms.is_empty() {
        return Err(invalid!(
            "step {}: no active objective has items",
            batch.step
        ));
    }
    let mut total = terms[0];
    for &term in &terms[1..] {
        total = t.add(total, term)?;
    }
    report.total = t.item(total)?;
    Ok((total, report))
}

/// Gradients of the combined loss, aligned with the model's parameters.
pub fn combined_grads(
    batch: &PretrainBatch,
    model: &EncoderModel,
    tok: &Tokenizer,
    weights: &LossWeights,
) -> Result<(Vec<crate::tensor::Tensor>, LossReport)> {
    let tape = Tape::new();
    let enc = model.bind(&tape);
    let (loss, report) = combined_loss(batch, &enc, tok, weights)?;
    let grads = tape.backward(loss)?;
    Ok((model.params().collect_grads(enc.bound(), &grads), report))
}

/// One backward pass and AdamW update.
pub fn combined_step(
    batch: &PretrainBatch,
    model: &mut EncoderModel,
    tok: &Tokenizer,
    weights: &LossWeights,
    opt: &AdamW,
    state: &mut AdamState,
    lr: Scalar,
) -> Result<LossReport> {
    let (grads, report) = combined_grads(batch, model, tok, weights)?;
    opt.step(model.params_mut(), &grads, state, lr);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PretrainConfig {
    pub batch: BatchConfig,
    pub weights: LossWeights,
    pub optimizer: AdamWSettings,
    /// Write a checkpoint every this many steps (0 disables intermediate ones).
    pub checkpoint_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamWSettings {
    pub lr: Scalar,
    pub warmup_ratio: Scalar,
    pub weight_decay: Scalar,
    pub beta1: Scalar,
    pub beta2: Scalar,
    pub eps: Scalar,
}

impl Default for AdamWSettings {
    fn default() -> Self {
        let d = AdamW::default();
        Self {
            lr: d.lr,
            warmup_ratio: 0.05,
            weight_decay: d.weight_decay,
            beta1: d.beta1,
            beta2: d.beta2,
            eps: d.eps,
        }
    }
}

impl AdamWSettings {
    pub fn optimizer(&self) -> AdamW {
        AdamW {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            weight_decay: self.weight_decay,
        }
    }
}

/// File names used inside a pre-training output directory.
pub const TRAIN_LOG: &str = "train_log.jsonl";
pub const FINAL_CHECKPOINT: &str = "model.ckpt";

pub fn checkpoint_name(step: usize) -> String {
    format!("step-{step:06}.ckpt")
}

/// Checkpoint metadata identifying the model shape.
pub fn checkpoint_meta(model: &EncoderModel, step: usize) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("step".to_string(), step.to_string()),
        (
            "encoder".to_string(),
            serde_json::to_string(model.config()).expect("config serializes"),
        ),
    ])
}

/// Runs the full pre-training schedule on `model`.
///
/// With `out_dir`, writes one log record per step, periodic checkpoints and
/// a final checkpoint.
pub fn pretrain(
    lex: &Lexicon,
    tok: &Tokenizer,
    model: &mut EncoderModel,
    config: &PretrainConfig,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<Vec<LossReport>> {
    let stream = build_pretrain_batches(lex, &config.batch, seed);
    let total = stream.total_steps();
    let sched = LinearWarmup::new(config.optimizer.lr, config.optimizer.warmup_ratio, total);
    let opt = config.optimizer.optimizer();
    let mut state = AdamState::new(model.params());
    let mut log = match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(Error::io(dir))?;
            let path = dir.join(TRAIN_LOG);
            Some((
                BufWriter::new(File::create(&path).map_err(Error::io(&path))?),
                path,
            ))
        }
        None => None,
    };
    let mut reports = Vec::with_capacity(total);
    for batch in stream {
        let step = batch.step;
        let report = combined_step(
            &batch,
            model,
            tok,
            &config.weights,
            &opt,
            &mut state,
            sched.lr(step),
        )?;
        if let Some((w, path)) = log.as_mut() {
            let line = serde_json::to_string(&report).expect("report serializes");
            writeln!(w, "{line}").map_err(Error::io(path.clone()))?;
        }
        if let Some(dir) = out_dir {
            if config.checkpoint_every > 0 && (step + 1) % config.checkpoint_every == 0 {
                write_checkpoint_file(&dir.join(checkpoint_name(step + 1)), model, step + 1)?;
            }
        }
        reports.push(report);
    }
    if let Some((mut w, path)) = log {
        w.flush().map_err(Error::io(path))?;
    }
    if let Some(dir) = out_dir {
        write_checkpoint_file(&dir.join(FINAL_CHECKPOINT), model, total)?;
    }
    Ok(reports)
}

fn write_checkpoint_file(path: &PathBuf, model: &EncoderModel, step: usize) -> Result<()> {
    save_checkpoint(path, model.params(), &checkpoint_meta(model, step))?;
    Ok(())
}

/// Loads a model saved by [`pretrain`].
pub fn load_model(path: impl AsRef<Path>) -> Result<EncoderModel> {
    let ckpt = crate::tensor::load_checkpoint(path)?;
    let config = ckpt
        .meta
        .get("encoder")
        .ok_or_else(|| invalid!("checkpoint has no encoder config"))?;
    let config = serde_json::from_str(config)
        .map_err(|e| invalid!("bad encoder config in checkpoint: {e}"))?;
    EncoderModel::from_params(config, &ckpt.params)
}
