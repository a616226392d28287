//! End-to-end workflows over a [`RunConfig`], each writing its artifacts and
//! the resolved configuration into `out_dir`.
//!
//! A pre-training directory holds everything downstream commands need:
//! the vocabulary, the radical table, the final checkpoint and, when glyph
//! features were used, the fixed glyph table.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::dict::{ingest, IngestConfig, Ingested, Lexicon};
use crate::encoder::{EncoderModel, RadicalTable, Tokenizer, Vocab};
use crate::error::{invalid, Error, Result};
use crate::glyph::{
    glyph_feature_table, glyph_pairs, train_glyph, GlyphAtlas, GlyphConfig, GlyphEncoder,
    GlyphTrainConfig,
};
use crate::polymrc::{self, PolyMrcDataset, PolyMrcInstance, PolyMrcStats};
use crate::retrieval::{head_loss, load_task, task_features, train_head, FusionMode, TaskHead};
use crate::shuowen::{load_model, pretrain, LossReport, FINAL_CHECKPOINT};
use crate::tensor::{load_checkpoint, save_checkpoint, ParamStore, Scalar};

pub const VOCAB_FILE: &str = "vocab.txt";
pub const RADICALS_FILE: &str = "radicals.tsv";
pub const GLYPH_TABLE: &str = "glyph_table.ckpt";
pub const REJECTIONS_FILE: &str = "rejections.txt";
pub const STATS_FILE: &str = "stats.json";
pub const FUSION_REPORT: &str = "fusion.json";

fn required<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::Config(format!("`{key}` is required for this command")))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(Error::io(path))
}

/// Loads the configured dictionary; rejected records are in the report.
pub fn load_dictionary(cfg: &RunConfig) -> Result<Ingested> {
    let path = required(&cfg.dictionary, "dictionary")?;
    let ingested = ingest(path, IngestConfig { strict: cfg.strict })?;
    Ok(ingested)
}

pub fn radical_table(cfg: &RunConfig) -> Result<RadicalTable> {
    match &cfg.radicals {
        Some(p) => RadicalTable::load(p),
        None => Ok(RadicalTable::default()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub entries: usize,
    pub rejected: usize,
    /// Entries per sense count.
    pub sense_counts: BTreeMap<usize, usize>,
}

/// Validates a dictionary, writes the clean lexicon and the rejections.
pub fn run_ingest(cfg: &RunConfig) -> Result<IngestSummary> {
    let ingested = load_dictionary(cfg)?;
    let dir = &cfg.out_dir;
    cfg.write_to(dir)?;
    let lex_path = dir.join("lexicon.jsonl");
    ingested
        .lexicon
        .save(&lex_path)
        .map_err(Error::io(&lex_path))?;
    let rej = dir.join(REJECTIONS_FILE);
    std::fs::write(&rej, ingested.report.to_string()).map_err(Error::io(&rej))?;
    let summary = IngestSummary {
        entries: ingested.lexicon.len(),
        rejected: ingested.report.len(),
        sense_counts: crate::dict::sense_count_histogram(&ingested.lexicon),
    };
    write_json(&dir.join("ingest.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct PretrainSummary {
    pub reports: Vec<LossReport>,
    pub glyph_losses: Vec<Scalar>,
    pub rejected: usize,
}

/// Glyph pre-training followed by dictionary pre-training.
pub fn run_pretrain(cfg: &RunConfig) -> Result<PretrainSummary> {
    let ingested = load_dictionary(cfg)?;
    let lex = &ingested.lexicon;
    if lex.is_empty() {
        return Err(invalid!("the dictionary has no usable entries"));
    }
    let dir = &cfg.out_dir;
    cfg.write_to(dir)?;
    let tok = Tokenizer::new(Vocab::from_lexicon(lex, []), radical_table(cfg)?);
    tok.vocab().save(dir.join(VOCAB_FILE))?;
    if let Some(src) = &cfg.radicals {
        let dst = dir.join(RADICALS_FILE);
        std::fs::copy(src, &dst).map_err(Error::io(src))?;
    }
    let mut model = EncoderModel::new(
        cfg.encoder(tok.vocab().len(), tok.radicals().num_ids()),
        cfg.seed,
    )?;

    let mut glyph_losses = Vec::new();
    if let (Some(atlas_path), true) = (&cfg.atlas, cfg.glyph_steps > 0) {
        let atlas = GlyphAtlas::load(atlas_path)?;
        let pairs = glyph_pairs(lex, &atlas);
        let mut glyph = GlyphEncoder::new(GlyphConfig::new(atlas.side(), cfg.d), cfg.seed)?;
        let gcfg = GlyphTrainConfig {
            steps: cfg.glyph_steps,
            ..GlyphTrainConfig::default()
        };
        glyph_losses = train_glyph(
            &pairs, &atlas, &mut glyph, &mut model, &tok, &gcfg, cfg.seed,
        )?;
        let table = glyph_feature_table(cfg.glyph_source, &glyph, &model, &tok, &atlas)?;
        let mut store = ParamStore::new();
        store.add("glyph.table", table.clone(), false);
        let path = dir.join(GLYPH_TABLE);
        save_checkpoint(&path, &store, &BTreeMap::new())?;
        model.set_glyph_features(Some(table))?;
    }

    let reports = pretrain(lex, &tok, &mut model, &cfg.pretrain(), cfg.seed, Some(dir))?;
    Ok(PretrainSummary {
        reports,
        glyph_losses,
        rejected: ingested.report.len(),
    })
}

/// A pre-trained encoder and the tokenizer it was trained with.
pub struct Artifacts {
    pub model: EncoderModel,
    pub tok: Tokenizer,
}

impl Artifacts {
    pub fn load(dir: &Path) -> Result<Self> {
        let vocab = Vocab::load(dir.join(VOCAB_FILE))?;
        let radicals_path = dir.join(RADICALS_FILE);
        let radicals = if radicals_path.exists() {
            RadicalTable::load(&radicals_path)?
        } else {
            RadicalTable::default()
        };
        let mut model = load_model(dir.join(FINAL_CHECKPOINT))?;
        let glyph_path = dir.join(GLYPH_TABLE);
        if glyph_path.exists() {
            let ckpt = load_checkpoint(&glyph_path)?;
            let id = ckpt
                .params
                .find("glyph.table")
                .ok_or_else(|| invalid!("{} has no glyph table", glyph_path.display()))?;
            model.set_glyph_features(Some(ckpt.params.get(id).clone()))?;
        }
        Ok(Self {
            model,
            tok: Tokenizer::new(vocab, radicals),
        })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        Self::load(required(&cfg.model_dir, "model_dir")?)
    }
}

/// Builds the PolyMRC splits and writes `{train,val,test}.jsonl` and the stats.
pub fn run_build_polymrc(cfg: &RunConfig) -> Result<(PolyMrcDataset, PolyMrcStats)> {
    let ingested = load_dictionary(cfg)?;
    let ds = polymrc::build(&ingested.lexicon, &cfg.split(), cfg.max_context)?;
    let dir = &cfg.out_dir;
    cfg.write_to(dir)?;
    for (name, split) in ds.splits() {
        polymrc::write_jsonl(dir.join(format!("{name}.jsonl")), split)?;
    }
    let stats = ds.stats();
    write_json(&dir.join(STATS_FILE), &stats)?;
    Ok((ds, stats))
}

/// Removes test entries from the configured dictionary and writes the pruned
/// lexicon. Returns the number of removed entries.
pub fn run_filter(cfg: &RunConfig, test: &[PolyMrcInstance]) -> Result<(Lexicon, usize)> {
    let ingested = load_dictionary(cfg)?;
    let (pruned, removed) = polymrc::filter_pretrain_overlap(&ingested.lexicon, test);
    let dir = &cfg.out_dir;
    cfg.write_to(dir)?;
    let path = dir.join("pretrain_lexicon.jsonl");
    pruned.save(&path).map_err(Error::io(&path))?;
    Ok((pruned, removed))
}

/// Writes `shots-<s>.jsonl` for each few-shot sample.
pub fn run_few_shot(cfg: &RunConfig, train: &[PolyMrcInstance]) -> Result<Vec<PathBuf>> {
    let shots = polymrc::sample_few_shot(train, cfg.few_shot_n, cfg.few_shot_seeds, cfg.seed)?;
    let dir = &cfg.out_dir;
    cfg.write_to(dir)?;
    shots
        .iter()
        .enumerate()
        .map(|(s, shot)| {
            let path = dir.join(format!("shots-{s}.jsonl"));
            polymrc::write_jsonl(&path, shot)?;
            Ok(path)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionReport {
    pub seed: u64,
    /// Mean cross-entropy over the whole task after training.
    pub baseline_final: Scalar,
    pub fused_final: Scalar,
    pub baseline_losses: Vec<Scalar>,
    pub fused_losses: Vec<Scalar>,
}

impl FusionReport {
    pub fn fusion_wins(&self) -> bool {
        self.fused_final < self.baseline_final
    }
}

/// Trains two heads with the same seed on frozen features, one on `lm ⊕ 0`
/// and one on `lm ⊕ dict`.
pub fn fusion_comparison(
    examples: &[crate::retrieval::TaskExample],
    lex: &Lexicon,
    art: &Artifacts,
    cfg: &RunConfig,
    seed: u64,
) -> Result<FusionReport> {
    let labels: Vec<usize> = examples.iter().map(|e| e.label).collect();
    let classes = labels.iter().max().map_or(0, |m| m + 1).max(2);
    let run = |mode| -> Result<(Scalar, Vec<Scalar>)> {
        let features = task_features(examples, lex, &art.model, &art.model, &art.tok, mode)?;
        let mut head = TaskHead::new(features[0].len(), classes, seed)?;
        let losses = train_head(&mut head, &features, &labels, &cfg.head(), seed)?;
        Ok((head_loss(&head, &features, &labels)?, losses))
    };
    let (baseline_final, baseline_losses) = run(FusionMode::Baseline)?;
    let (fused_final, fused_losses) = run(FusionMode::Fused)?;
    Ok(FusionReport {
        seed,
        baseline_final,
        fused_final,
        baseline_losses,
        fused_losses,
    })
}

pub fn run_fuse_train(cfg: &RunConfig) -> Result<FusionReport> {
    let art = Artifacts::from_config(cfg)?;
    let lex = load_dictionary(cfg)?.lexicon;
    let examples = load_task(required(&cfg.task, "task")?)?;
    if examples.is_empty() {
        return Err(invalid!("the task file has no examples"));
    }
    let report = fusion_comparison(&examples, &lex, &art, cfg, cfg.seed)?;
    cfg.write_to(&cfg.out_dir)?;
    write_json(&cfg.out_dir.join(FUSION_REPORT), &report)?;
    Ok(report)
}
