//! PolyMRC: given an example sentence containing a polysemous entry, choose
//! the definition the sentence uses among all of the entry's senses.
//!
//! Instances are built from multi-sense entries, one per example. The
//! train/validation/test split is drawn over entries, so an entry's examples
//! never straddle two splits.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dict::Lexicon;
use crate::encoder::{EncoderModel, Tokenizer};
use crate::error::{invalid, Error, Result};
use crate::retrieval::score_choices;
use crate::shuowen::argmax;
use crate::tensor::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyMrcInstance {
    pub entry: String,
    pub context: String,
    pub choices: Vec<String>,
    pub gold: usize,
}

impl PolyMrcInstance {
    pub fn validate(&self) -> Result<()> {
        if self.choices.len() < 2 {
            return Err(invalid!("{}: needs at least 2 choices", self.entry));
        }
        if self.gold >= self.choices.len() {
            return Err(invalid!("{}: gold {} out of range", self.entry, self.gold));
        }
        if !self.context.contains(&self.entry) {
            return Err(invalid!(
                "{}: context does not contain the entry",
                self.entry
            ));
        }
        let distinct: HashSet<String> = self.choices.iter().map(|c| normalize(c)).collect();
        if distinct.len() != self.choices.len() {
            return Err(invalid!("{}: duplicate choices", self.entry));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.choices.len()
    }
}

/// Whitespace and trailing sentence punctuation do not distinguish definitions.
pub fn normalize(definition: &str) -> String {
    let s: String = definition.chars().filter(|c| !c.is_whitespace()).collect();
    s.trim_end_matches(['。', '；', ';', '.', '，', ','])
        .to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train: Scalar,
    pub val: Scalar,
    pub test: Scalar,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|&r| !(0.0..=1.0).contains(&r))
            || (parts.iter().sum::<Scalar>() - 1.0).abs() > 1e-9
        {
            return Err(invalid!(
                "split ratios {parts:?} must lie in [0, 1] and sum to 1"
            ));
        }
        Ok(())
    }

    /// Entry counts per split: train and val rounded, test takes the rest.
    pub fn entry_counts(&self, n: usize) -> [usize; 3] {
        let train = ((self.train * n as Scalar).round() as usize).min(n);
        let val = ((self.val * n as Scalar).round() as usize).min(n - train);
        [train, val, n - train - val]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub count: usize,
    /// Mean context length in characters; 0 for an empty split.
    pub avg_len: Scalar,
}

impl SplitStats {
    fn of(instances: &[PolyMrcInstance]) -> Self {
        let chars: usize = instances.iter().map(|i| i.context.chars().count()).sum();
        Self {
            count: instances.len(),
            avg_len: if instances.is_empty() {
                0.0
            } else {
                chars as Scalar / instances.len() as Scalar
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyMrcStats {
    pub train: SplitStats,
    pub val: SplitStats,
    pub test: SplitStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMrcDataset {
    pub train: Vec<PolyMrcInstance>,
    pub val: Vec<PolyMrcInstance>,
    pub test: Vec<PolyMrcInstance>,
}

impl PolyMrcDataset {
    pub fn stats(&self) -> PolyMrcStats {
        PolyMrcStats {
            train: SplitStats::of(&self.train),
            val: SplitStats::of(&self.val),
            test: SplitStats::of(&self.test),
        }
    }

    pub fn splits(&self) -> [(&'static str, &[PolyMrcInstance]); 3] {
        [
            ("train", &self.train),
            ("val", &self.val),
            ("test", &self.test),
        ]
    }
}

/// Keeps at most `max_chars` characters, centered on the first occurrence of
/// `entry` and shifted inwards at the edges.
pub fn truncate_context(context: &str, entry: &str, max_chars: usize) -> String {
    let chars: Vec<char> = context.chars().collect();
    if chars.len() <= max_chars {
        return context.to_string();
    }
    let entry_len = entry.chars().count();
    let at = context
        .find(entry)
        .map_or(0, |b| context[..b].chars().count());
    let center = at + entry_len / 2;
    let start = center
        .saturating_sub(max_chars / 2)
        .min(chars.len() - max_chars);
    chars[start..start + max_chars].iter().collect()
}

/// Instances of one entry: distinct definitions become the choices, and each
/// example of a sense points at its definition's choice. Examples that lack
/// the surface are skipped. Entries with fewer than two distinct definitions
/// yield nothing.
fn entry_instances(entry: &crate::dict::DictEntry, max_context: usize) -> Vec<PolyMrcInstance> {
    let mut choices: Vec<String> = Vec::new();
    let mut keys: Vec<String> = Vec::new();
    let mut slot = Vec::with_capacity(entry.senses.len());
    for sense in &entry.senses {
        let key = normalize(&sense.definition);
        let i = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                choices.push(sense.definition.clone());
                choices.len() - 1
            }
        };
        slot.push(i);
    }
    if choices.len() < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (sense, &gold) in entry.senses.iter().zip(&slot) {
        for example in sense.examples.iter().filter(|e| e.contains(&entry.surface)) {
            out.push(PolyMrcInstance {
                entry: entry.surface.clone(),
                context: truncate_context(example, &entry.surface, max_context),
                choices: choices.clone(),
                gold,
            });
        }
    }
    out
}

/// Builds the three splits. `max_context` bounds context length in characters.
pub fn build(lex: &Lexicon, spec: &SplitSpec, max_context: usize) -> Result<PolyMrcDataset> {
    spec.validate()?;
    if max_context == 0 {
        return Err(invalid!("max_context must be positive"));
    }
    let mut grouped: Vec<Vec<PolyMrcInstance>> = lex
        .entries()
        .map(|e| entry_instances(e, max_context))
        .filter(|v| !v.is_empty())
        .collect();
    if grouped.is_empty() {
        return Err(invalid!("no entry has two distinct senses with examples"));
    }
    grouped.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let [train, val, _] = spec.entry_counts(grouped.len());
    let mut rest = grouped.into_iter();
    let mut take = |n: usize| rest.by_ref().take(n).flatten().collect::<Vec<_>>();
    let train = take(train);
    let val = take(val);
    let test = take(usize::MAX);
    Ok(PolyMrcDataset { train, val, test })
}

/// Drops every entry that appears in `test` from a pre-training lexicon.
/// Returns the pruned lexicon and the number of removals.
pub fn filter_pretrain_overlap(pretrain: &Lexicon, test: &[PolyMrcInstance]) -> (Lexicon, usize) {
    let held_out: HashSet<&str> = test.iter().map(|i| i.entry.as_str()).collect();
    let pruned = pretrain.without(|e| held_out.contains(e.surface.as_str()));
    let removed = pretrain.len() - pruned.len();
    (pruned, removed)
}

/// `n_seeds` samples of `n_per_task` instances; sample `s` is drawn with seed
/// `base_seed + s`.
pub fn sample_few_shot(
    train: &[PolyMrcInstance],
    n_per_task: usize,
    n_seeds: usize,
    base_seed: u64,
) -> Result<Vec<Vec<PolyMrcInstance>>> {
    if train.len() < n_per_task {
        return Err(invalid!(
            "{n_per_task} shots requested from {} instances",
            train.len()
        ));
    }
    Ok((0..n_seeds as u64)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(s));
            rand::seq::index::sample(&mut rng, train.len(), n_per_task)
                .into_iter()
                .map(|i| train[i].clone())
                .collect()
        })
        .collect())
}

/// Scores the choices of an instance. `index` is the instance's position in
/// the evaluated list.
pub trait ChoiceScorer: Sync {
    fn scores(&self, index: usize, instance: &PolyMrcInstance) -> Result<Vec<Scalar>>;
}

/// Peeks at the gold label.
pub struct OracleScorer;

impl ChoiceScorer for OracleScorer {
    fn scores(&self, _: usize, inst: &PolyMrcInstance) -> Result<Vec<Scalar>> {
        Ok((0..inst.k())
            .map(|i| if i == inst.gold { 1.0 } else { 0.0 })
            .collect())
    }
}

/// Always ranks one fixed index first.
pub struct ConstantScorer(pub usize);

impl ChoiceScorer for ConstantScorer {
    fn scores(&self, _: usize, inst: &PolyMrcInstance) -> Result<Vec<Scalar>> {
        Ok((0..inst.k())
            .map(|i| if i == self.0 { 1.0 } else { 0.0 })
            .collect())
    }
}

/// Uniform scores drawn from `seed` and the instance index, so results do
/// not depend on evaluation order.
pub struct RandomScorer {
    pub seed: u64,
}

impl ChoiceScorer for RandomScorer {
    fn scores(&self, index: usize, inst: &PolyMrcInstance) -> Result<Vec<Scalar>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        Ok((0..inst.k()).map(|_| rng.random::<Scalar>()).collect())
    }
}

/// The encoder's example-learning attention.
pub struct ModelScorer<'a> {
    pub model: &'a EncoderModel,
    pub tok: &'a Tokenizer,
}

impl ChoiceScorer for ModelScorer<'_> {
    fn scores(&self, _: usize, inst: &PolyMrcInstance) -> Result<Vec<Scalar>> {
        score_choices(
            &inst.context,
            &inst.entry,
            &inst.choices,
            self.model,
            self.tok,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
    pub accuracy: Scalar,
}

impl Tally {
    fn new(correct: usize, total: usize) -> Self {
        Self {
            correct,
            total,
            accuracy: correct as Scalar / total as Scalar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: Tally,
    /// Keyed by the number of choices.
    pub by_k: BTreeMap<usize, Tally>,
}

impl EvalReport {
    pub fn accuracy(&self) -> Scalar {
        self.overall.accuracy
    }
}

/// Accuracy of the argmax (lowest index on ties) against gold, overall and
/// per choice count. Instances are scored in parallel and tallied in order.
pub fn evaluate<S: ChoiceScorer>(scorer: &S, instances: &[PolyMrcInstance]) -> Result<EvalReport> {
    if instances.is_empty() {
        return Err(invalid!("no instances to evaluate"));
    }
    let hits = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let scores = scorer.scores(i, inst)?;
            if scores.len() != inst.k() {
                return Err(invalid!(
                    "scorer returned {} scores for {} choices",
                    scores.len(),
                    inst.k()
                ));
            }
            Ok(argmax(&scores) == inst.gold)
        })
        .collect::<Result<Vec<bool>>>()?;
    let mut by_k: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (inst, &hit) in instances.iter().zip(&hits) {
        let t = by_k.entry(inst.k()).or_default();
        t.0 += hit as usize;
        t.1 += 1;
    }
    let correct = hits.iter().filter(|&&h| h).count();
    Ok(EvalReport {
        overall: Tally::new(correct, instances.len()),
        by_k: by_k
            .into_iter()
            .map(|(k, (c, n))| (k, Tally::new(c, n)))
            .collect(),
    })
}

pub fn write_jsonl(path: impl AsRef<Path>, instances: &[PolyMrcInstance]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(Error::io(path))?;
    let mut w = BufWriter::new(file);
    for inst in instances {
        let line = serde_json::to_string(inst).expect("instances serialize");
        writeln!(w, "{line}").map_err(Error::io(path))?;
    }
    w.flush().map_err(Error::io(path))
}

/// Reads and validates instance lines; blank lines are skipped.
pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<PolyMrcInstance>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(Error::io(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: PolyMrcInstance =
            serde_json::from_str(&line).map_err(|e| Error::format(path, i + 1, e.to_string()))?;
        inst.validate()
            .map_err(|e| Error::format(path, i + 1, e.to_string()))?;
        out.push(inst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dict::{DictEntry, Sense};

    fn entry(surface: &str, senses: &[(&str, &[&str])]) -> DictEntry {
        DictEntry::new(
            surface,
            senses
                .iter()
                .map(|(d, ex)| Sense::new(*d, ex.iter().map(|s| s.to_string()).collect()))
                .collect(),
        )
    }

    fn lexicon(n: usize) -> Lexicon {
        let chars: Vec<char> = "甲乙丙丁戊己庚辛壬癸子丑寅卯辰巳午未申酉".chars().collect();
        (0..n)
            .map(|i| {
                let s = chars[i % chars.len()].to_string() + &"一".repeat(i / chars.len());
                let ex1 = format!("这里的{s}是第一义");
                let ex2 = format!("{s}在此处");
                entry(
                    &s,
                    &[
                        ("第一义", &[ex1.as_str()]),
                        ("第二义", &[ex2.as_str()]),
                        ("第三义", &[]),
                    ],
                )
            })
            .collect()
    }

    #[test]
    fn three_senses_give_three_instances_with_three_choices() {
        let lex: Lexicon = [
            entry(
                "打",
                &[
                    ("敲击", &["打鼓"]),
                    ("从事", &["打工"]),
                    ("编织", &["打毛衣"]),
                ],
            ),
            entry("山", &[("高地", &["一座山"])]),
        ]
        .into_iter()
        .collect();
        let spec = SplitSpec {
            train: 1.0,
            val: 0.0,
            test: 0.0,
            seed: 1,
        };
        let ds = build(&lex, &spec, 64).unwrap();
        assert_eq!(ds.train.len(), 3);
        assert!(ds.val.is_empty() && ds.test.is_empty());
        for (g, inst) in ds.train.iter().enumerate() {
            assert_eq!(inst.k(), 3);
            assert_eq!(inst.gold, g);
            inst.validate().unwrap();
        }
        let single: Lexicon = [entry("山", &[("高地", &["一座山"])])]
            .into_iter()
            .collect();
        assert!(build(&single, &spec, 64).is_err());
    }

    #[test]
    fn duplicate_definitions_collapse_and_remap_gold() {
        let lex: Lexicon = [entry(
            "行",
            &[
                ("走路", &["行走"]),
                ("可以", &["行不行"]),
                ("走路。", &["步行"]),
            ],
        )]
        .into_iter()
        .collect();
        let spec = SplitSpec {
            train: 1.0,
            val: 0.0,
            test: 0.0,
            seed: 0,
        };
        let ds = build(&lex, &spec, 64).unwrap();
        let golds: Vec<usize> = ds.train.iter().map(|i| i.gold).collect();
        assert_eq!(golds, [0, 1, 0]);
        assert_eq!(ds.train[2].choices, ["走路", "可以"]);
        let same: Lexicon = [entry("同", &[("一样", &["同样"]), (" 一样 ", &["相同"])])]
            .into_iter()
            .collect();
        assert!(build(&same, &spec, 64).is_err());
    }

    #[test]
    fn split_is_by_entry_and_deterministic() {
        let lex = lexicon(50);
        let spec = SplitSpec {
            seed: 9,
            ..SplitSpec::default()
        };
        let ds = build(&lex, &spec, 64).unwrap();
        assert_eq!(ds, build(&lex, &spec, 64).unwrap());
        let sets: Vec<HashSet<&str>> = ds
            .splits()
            .iter()
            .map(|(_, v)| v.iter().map(|i| i.entry.as_str()).collect())
            .collect();
        assert_eq!(
            sets.iter().map(HashSet::len).collect::<Vec<_>>(),
            [40, 5, 5]
        );
        assert!(
            sets[0].is_disjoint(&sets[1])
                && sets[0].is_disjoint(&sets[2])
                && sets[1].is_disjoint(&sets[2])
        );
        let stats = ds.stats();
        assert_eq!(stats.train.count + stats.val.count + stats.test.count, 100);
        let other = build(&lex, &SplitSpec { seed: 10, ..spec }, 64).unwrap();
        assert_ne!(ds.test, other.test);
    }

    #[test]
    fn truncation_centers_on_the_entry() {
        assert_eq!(truncate_context("甲乙丙丁戊己庚辛", "戊", 3), "丁戊己");
        assert_eq!(truncate_context("甲乙丙丁戊己庚辛", "甲", 3), "甲乙丙");
        assert_eq!(truncate_context("甲乙丙丁戊己庚辛", "辛", 3), "己庚辛");
        assert_eq!(truncate_context("甲乙", "乙", 3), "甲乙");
        let t = truncate_context("甲乙丙丁戊己庚辛", "丙丁", 4);
        assert!(t.contains("丙丁") && t.chars().count() == 4);
    }

    #[test]
    fn overlap_filter_removes_test_entries() {
        let lex = lexicon(30);
        let ds = build(&lex, &SplitSpec::default(), 64).unwrap();
        let (pruned, removed) = filter_pretrain_overlap(&lex, &ds.test);
        assert_eq!(removed, 3);
        assert!(ds.test.iter().all(|i| !pruned.contains(&i.entry)));
        let (same, zero) = filter_pretrain_overlap(&pruned, &ds.test);
        assert_eq!((same.len(), zero), (pruned.len(), 0));
    }

    #[test]
    fn few_shot_samples_are_seeded() {
        let ds = build(&lexicon(200), &SplitSpec::default(), 64).unwrap();
        let shots = sample_few_shot(&ds.train, 10, 3, 0).unwrap();
        assert_eq!(shots.iter().map(Vec::len).collect::<Vec<_>>(), [10, 10, 10]);
        assert_eq!(shots, sample_few_shot(&ds.train, 10, 3, 0).unwrap());
        assert_ne!(shots[0], shots[1]);
        assert!(sample_few_shot(&ds.train[..5], 10, 3, 0).is_err());
    }

    #[test]
    fn scorer_identities() {
        let ds = build(&lexicon(40), &SplitSpec::default(), 64).unwrap();
        let all = &ds.train;
        assert_eq!(evaluate(&OracleScorer, all).unwrap().accuracy(), 1.0);
        let gold0 = all.iter().filter(|i| i.gold == 0).count() as Scalar / all.len() as Scalar;
        assert_eq!(evaluate(&ConstantScorer(0), all).unwrap().accuracy(), gold0);
        let r = evaluate(&RandomScorer { seed: 1 }, all).unwrap();
        assert_eq!(r, evaluate(&RandomScorer { seed: 1 }, all).unwrap());
        assert_eq!(r.by_k[&3].total, all.len());
        assert!(evaluate(&OracleScorer, &[]).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let ds = build(&lexicon(10), &SplitSpec::default(), 64).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.jsonl");
        write_jsonl(&path, &ds.train).unwrap();
        assert_eq!(read_jsonl(&path).unwrap(), ds.train);
        std::fs::write(
            &path,
            "{\"entry\":\"甲\",\"context\":\"乙\",\"choices\":[\"a\",\"b\"],\"gold\":0}\n",
        )
        .unwrap();
        assert!(matches!(
            read_jsonl(&path),
            Err(Error::Format { line: 1, .. })
        ));
    }
}
