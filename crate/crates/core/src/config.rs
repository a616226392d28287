//! Flat run configuration.
//!
//! Values resolve in the order defaults < TOML file < `CDBERT_<KEY>`
//! environment variables < explicit overrides (command-line flags). Unknown
//! keys are errors at every layer, including unknown `CDBERT_` variables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoder::EncoderConfig;
use crate::error::{invalid, Error, Result};
use crate::glyph::GlyphSource;
use crate::polymrc::SplitSpec;
use crate::retrieval::HeadTrainConfig;
use crate::shuowen::{AdamWSettings, BatchConfig, LossWeights, PretrainConfig};
use crate::tensor::Scalar;

pub const ENV_PREFIX: &str = "CDBERT_";
/// Name of the resolved configuration written into every output directory.
pub const RESOLVED_CONFIG: &str = "config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dictionary: Option<PathBuf>,
    pub radicals: Option<PathBuf>,
    pub atlas: Option<PathBuf>,
    /// Directory of a finished `pretrain` run, read by downstream commands.
    pub model_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Reject the whole dictionary on the first bad record.
    pub strict: bool,

    pub d: usize,
    pub layers: usize,
    pub heads: usize,
    pub ffn_mult: usize,
    pub max_len: usize,

    pub lambda_mem: Scalar,
    pub lambda_cl4sa: Scalar,
    pub lambda_el: Scalar,
    pub w_anto: Scalar,
    pub w_rand: Scalar,

    pub lr: Scalar,
    pub warmup_ratio: Scalar,
    pub weight_decay: Scalar,
    pub batch_size: usize,
    pub epochs: usize,
    /// Exact step count; 0 means `epochs` decides.
    pub steps: usize,
    pub checkpoint_every: usize,

    /// Glyph pre-training steps before dictionary pre-training; 0 disables
    /// glyph features even when an atlas is given.
    pub glyph_steps: usize,
    pub glyph_source: GlyphSource,

    pub split_train: Scalar,
    pub split_val: Scalar,
    pub split_test: Scalar,
    /// Longest PolyMRC context kept, in characters.
    pub max_context: usize,
    pub few_shot_n: usize,
    pub few_shot_seeds: usize,

    pub task: Option<PathBuf>,
    pub head_steps: usize,
    pub head_batch_size: usize,
    pub head_lr: Scalar,
}

impl Default for RunConfig {
    fn default() -> Self {
        let enc = EncoderConfig::new(1, 1);
        let weights = LossWeights::default();
        let batch = BatchConfig::default();
        let opt = AdamWSettings::default();
        let split = SplitSpec::default();
        let head = HeadTrainConfig::default();
        Self {
            dictionary: None,
            radicals: None,
            atlas: None,
            model_dir: None,
            out_dir: PathBuf::from("runs/default"),
            seed: 0,
            strict: false,
            d: enc.d,
            layers: enc.layers,
            heads: enc.heads,
            ffn_mult: enc.ffn_mult,
            max_len: enc.max_len,
            lambda_mem: weights.mem,
            lambda_cl4sa: weights.cl4sa,
            lambda_el: weights.el,
            w_anto: batch.w_anto,
            w_rand: batch.w_rand,
            lr: opt.lr,
            warmup_ratio: opt.warmup_ratio,
            weight_decay: opt.weight_decay,
            batch_size: batch.batch_size,
            epochs: batch.epochs,
            steps: 0,
            checkpoint_every: 0,
            glyph_steps: 0,
            glyph_source: GlyphSource::Visual,
            split_train: split.train,
            split_val: split.val,
            split_test: split.test,
            max_context: enc.max_len - 2,
            few_shot_n: 10,
            few_shot_seeds: 3,
            task: None,
            head_steps: head.steps,
            head_batch_size: head.batch_size,
            head_lr: head.lr,
        }
    }
}

fn keys() -> Vec<String> {
    match toml::Value::try_from(RunConfig::default()).expect("defaults serialize") {
        toml::Value::Table(t) => {
            let mut k: Vec<String> = t.keys().cloned().collect();
            // Optional paths are absent from the serialized defaults.
            k.extend(["dictionary", "radicals", "atlas", "model_dir", "task"].map(String::from));
            k.sort();
            k.dedup();
            k
        }
        _ => unreachable!("a struct serializes to a table"),
    }
}

/// Parses an environment value as a TOML value, falling back to a string.
fn env_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    /// Resolves a configuration from an optional file, the given environment
    /// variables and explicit overrides, in increasing precedence.
    pub fn resolve(
        file: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
        overrides: toml::Table,
    ) -> Result<Self> {
        let known = keys();
        let mut table = match toml::Value::try_from(Self::default()).expect("defaults serialize") {
            toml::Value::Table(t) => t,
            _ => unreachable!("a struct serializes to a table"),
        };
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
            let parsed: toml::Table = toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
            for (k, v) in parsed {
                if !known.contains(&k) {
                    return Err(Error::Config(format!(
                        "{}: unknown key `{k}`",
                        path.display()
                    )));
                }
                table.insert(k, v);
            }
        }
        let env: BTreeMap<String, String> = env.into_iter().collect();
        for (name, raw) in env {
            let Some(key) = name.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let key = key.to_ascii_lowercase();
            if !known.contains(&key) {
                return Err(Error::Config(format!("unknown variable {name}")));
            }
            table.insert(key, env_value(&raw));
        }
        for (k, v) in overrides {
            if !known.contains(&k) {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
            table.insert(k, v);
        }
        let config: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        config
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    /// Resolves with the process environment.
    pub fn from_env(file: Option<&Path>, overrides: toml::Table) -> Result<Self> {
        Self::resolve(file, std::env::vars(), overrides)
    }

    pub fn validate(&self) -> Result<()> {
        self.split().validate()?;
        if self.batch_size == 0 || self.head_batch_size == 0 {
            return Err(invalid!("batch sizes must be positive"));
        }
        if !(self.lr > 0.0 && self.head_lr > 0.0) {
            return Err(invalid!("learning rates must be positive"));
        }
        if !(0.0..1.0).contains(&self.warmup_ratio) {
            return Err(invalid!("warmup_ratio must lie in [0, 1)"));
        }
        if self.max_context == 0 || self.max_context + 2 > self.max_len {
            return Err(invalid!(
                "max_context {} must be positive and leave room for [CLS] and [SEP] within max_len {}",
                self.max_context,
                self.max_len
            ));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Writes the resolved configuration into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
        let path = dir.join(RESOLVED_CONFIG);
        std::fs::write(&path, self.to_toml()).map_err(Error::io(&path))?;
        Ok(path)
    }

    pub fn encoder(&self, vocab_size: usize, radical_vocab_size: usize) -> EncoderConfig {
        EncoderConfig {
            d: self.d,
            layers: self.layers,
            heads: self.heads,
            ffn_mult: self.ffn_mult,
            max_len: self.max_len,
            vocab_size,
            radical_vocab_size,
        }
    }

    pub fn pretrain(&self) -> PretrainConfig {
        PretrainConfig {
            batch: BatchConfig {
                batch_size: self.batch_size,
                epochs: self.epochs,
                steps: (self.steps > 0).then_some(self.steps),
                w_anto: self.w_anto,
                w_rand: self.w_rand,
            },
            weights: LossWeights {
                mem: self.lambda_mem,
                cl4sa: self.lambda_cl4sa,
                el: self.lambda_el,
            },
            optimizer: AdamWSettings {
                lr: self.lr,
                warmup_ratio: self.warmup_ratio,
                weight_decay: self.weight_decay,
                ..AdamWSettings::default()
            },
            checkpoint_every: self.checkpoint_every,
        }
    }

    pub fn split(&self) -> SplitSpec {
        SplitSpec {
            train: self.split_train,
            val: self.split_val,
            test: self.split_test,
            seed: self.seed,
        }
    }

    pub fn head(&self) -> HeadTrainConfig {
        HeadTrainConfig {
            steps: self.head_steps,
            batch_size: self.head_batch_size,
            lr: self.head_lr,
            ..HeadTrainConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> Vec<(String, String)> {
        Vec::new()
    }

    #[test]
    fn defaults_follow_the_pretraining_recipe() {
        let c = RunConfig::resolve(None, none(), toml::Table::new()).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(
            (c.lr, c.warmup_ratio, c.batch_size, c.epochs),
            (5e-5, 0.05, 64, 10)
        );
        assert_eq!((c.lambda_mem, c.lambda_cl4sa, c.lambda_el), (0.6, 0.2, 0.2));
        assert_eq!(c.max_len, 256);
    }

    #[test]
    fn precedence_is_file_then_env_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "seed = 3\nlr = 1e-3\nsteps = 7\ndictionary = \"d.jsonl\"\n",
        )
        .unwrap();
        let env = vec![
            ("CDBERT_LR".to_string(), "2e-3".to_string()),
            ("CDBERT_OUT_DIR".to_string(), "elsewhere".to_string()),
            ("UNRELATED".to_string(), "x".to_string()),
        ];
        let mut cli = toml::Table::new();
        cli.insert("out_dir".into(), toml::Value::String("cli".into()));
        let c = RunConfig::resolve(Some(&path), env, cli).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.steps, 7);
        assert_eq!(c.lr, 2e-3);
        assert_eq!(c.out_dir, PathBuf::from("cli"));
        assert_eq!(c.dictionary, Some(PathBuf::from("d.jsonl")));
    }

    #[test]
    fn unknown_keys_are_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "lerning_rate = 1e-3\n").unwrap();
        let err = RunConfig::resolve(Some(&path), none(), toml::Table::new()).unwrap_err();
        assert!(err.to_string().contains("lerning_rate"), "{err}");
        let env = vec![("CDBERT_SEEED".to_string(), "1".to_string())];
        assert!(RunConfig::resolve(None, env, toml::Table::new()).is_err());
        std::fs::write(&path, "seed = \"three\"\n").unwrap();
        assert!(RunConfig::resolve(Some(&path), none(), toml::Table::new()).is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let c = RunConfig {
            atlas: Some("g.atlas".into()),
            glyph_source: GlyphSource::Text,
            ..RunConfig::default()
        };
        let path = c.write_to(dir.path()).unwrap();
        let again = RunConfig::resolve(Some(&path), none(), toml::Table::new()).unwrap();
        assert_eq!(again, c);
    }
}
