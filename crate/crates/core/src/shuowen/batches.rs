use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::losses::{ContrastPair, ContrastSide, ELItem, MemItem, NegativeKind};
use crate::dict::Lexicon;
use crate::tensor::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    /// Items per objective per step.
    pub batch_size: usize,
    pub epochs: usize,
    /// Overrides `epochs` with an exact step count when set.
    pub steps: Option<usize>,
    pub w_anto: Scalar,
    pub w_rand: Scalar,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            epochs: 10,
            steps: None,
            w_anto: 1.0,
            w_rand: 0.5,
        }
    }
}

/// One optimization step's items for each objective.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PretrainBatch {
    pub step: usize,
    pub epoch: usize,
    pub mem: Vec<MemItem>,
    pub cl4sa: Vec<ContrastPair>,
    pub el: Vec<ELItem>,
}

impl PretrainBatch {
    pub fn is_empty(&self) -> bool {
        self.mem.is_empty() && self.cl4sa.is_empty() && self.el.is_empty()
    }
}

/// Every (entry, sense) pair.
pub fn mem_items(lex: &Lexicon) -> Vec<MemItem> {
    lex.entries()
        .flat_map(|e| (0..e.senses.len()).map(move |k| MemItem::new(e, k)))
        .collect()
}

/// Every (polysemous entry, example) pair.
pub fn el_items(lex: &Lexicon) -> Vec<ELItem> {
    let mut out = Vec::new();
    for e in lex.entries().filter(|e| e.senses.len() >= 2) {
        let definitions: Vec<String> = e.senses.iter().map(|s| s.definition.clone()).collect();
        for (gold, sense) in e.senses.iter().enumerate() {
            for example in &sense.examples {
                out.push(ELItem {
                    entry: e.surface.clone(),
                    gold,
                    definitions: definitions.clone(),
                    example: example.clone(),
                });
            }
        }
    }
    out
}

/// One pair per (entry, synonym). The negative is an antonym when the entry
/// lists one (cycling through them), otherwise a uniformly sampled surface
/// that is neither the anchor nor one of its synonyms.
pub fn contrast_pairs(
    lex: &Lexicon,
    config: &BatchConfig,
    rng: &mut impl Rng,
) -> Vec<ContrastPair> {
    let surfaces: Vec<&str> = lex.surfaces().collect();
    let mut out = Vec::new();
    for e in lex.entries() {
        let excluded: BTreeSet<&str> = e
            .synonyms
            .iter()
            .map(String::as_str)
            .chain([e.surface.as_str()])
            .collect();
        let candidates: Vec<&str> = surfaces
            .iter()
            .copied()
            .filter(|s| !excluded.contains(s))
            .collect();
        let antonyms: Vec<&String> = e
            .antonyms
            .iter()
            .filter(|a| !excluded.contains(a.as_str()))
            .collect();
        for (j, syn) in e.synonyms.iter().enumerate() {
            let (negative, kind, weight) = if antonyms.is_empty() {
                if candidates.is_empty() {
                    continue;
                }
                let pick = candidates[rng.random_range(0..candidates.len())];
                (pick.to_string(), NegativeKind::Sampled, config.w_rand)
            } else {
                (
                    antonyms[j % antonyms.len()].clone(),
                    NegativeKind::Antonym,
                    config.w_anto,
                )
            };
            out.push(ContrastPair {
                anchor: ContrastSide::new(&e.surface, Some(e)),
                positive: ContrastSide::new(syn, lex.get(syn)),
                negative: ContrastSide::new(&negative, lex.get(&negative)),
                kind,
                weight,
            });
        }
    }
    out
}

/// Deterministic stream of pre-training batches.
///
/// Each epoch reshuffles every pool. An epoch lasts as many steps as the
/// largest pool needs; smaller pools wrap around, so every item is seen at
/// least once per epoch. Sampled negatives are redrawn each epoch.
pub struct BatchStream<'a> {
    lex: &'a Lexicon,
    config: BatchConfig,
    rng: ChaCha8Rng,
    mem: Vec<MemItem>,
    el: Vec<ELItem>,
    total_steps: usize,
    steps_per_epoch: usize,
    step: usize,
    epoch_pools: Option<(Vec<MemItem>, Vec<ContrastPair>, Vec<ELItem>)>,
}

impl<'a> BatchStream<'a> {
    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    pub fn steps_per_epoch(&self) -> usize {
        self.steps_per_epoch
    }

    fn take<T: Clone>(pool: &[T], start: usize, n: usize) -> Vec<T> {
        if pool.is_empty() {
            return Vec::new();
        }
        let n = n.min(pool.len());
        (start..start + n)
            .map(|i| pool[i % pool.len()].clone())
            .collect()
    }
}

impl Iterator for BatchStream<'_> {
    type Item = PretrainBatch;

    fn next(&mut self) -> Option<PretrainBatch> {
        if self.step >= self.total_steps {
            return None;
        }
        let within = self.step % self.steps_per_epoch;
        if within == 0 {
            let mut mem = self.mem.clone();
            mem.shuffle(&mut self.rng);
            let mut cl = contrast_pairs(self.lex, &self.config, &mut self.rng);
            cl.shuffle(&mut self.rng);
            let mut el = self.el.clone();
            el.shuffle(&mut self.rng);
            self.epoch_pools = Some((mem, cl, el));
        }
        let (mem, cl, el) = self
            .epoch_pools
            .as_ref()
            .expect("pools drawn at epoch start");
        let b = self.config.batch_size;
        let batch = PretrainBatch {
            step: self.step,
            epoch: self.step / self.steps_per_epoch,
            mem: Self::take(mem, within * b, b),
            cl4sa: Self::take(cl, within * b, b),
            el: Self::take(el, within * b, b),
        };
        self.step += 1;
        Some(batch)
    }
}

pub fn build_pretrain_batches<'a>(
    lex: &'a Lexicon,
    config: &BatchConfig,
    seed: u64,
) -> BatchStream<'a> {
    let rng = ChaCha8Rng::seed_from_u64(seed);
    let mem = mem_items(lex);
    let el = el_items(lex);
    // Pair count is independent of which negatives get sampled.
    let pairs = contrast_pairs(lex, config, &mut rng.clone()).len();
    let largest = mem.len().max(el.len()).max(pairs);
    let b = config.batch_size.max(1);
    let steps_per_epoch = largest.div_ceil(b).max(1);
    let total_steps = config.steps.unwrap_or(config.epochs * steps_per_epoch);
    BatchStream {
        lex,
        config: BatchConfig {
            batch_size: b,
            ..*config
        },
        rng,
        mem,
        el,
        total_steps,
        steps_per_epoch,
        step: 0,
        epoch_pools: None,
    }
}
