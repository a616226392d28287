use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cdbert::checks::full_suite;
use cdbert::config::RunConfig;
use cdbert::dict::DictError;
use cdbert::pipeline::{self, write_json, Artifacts};
use cdbert::polymrc::{self, evaluate, ModelScorer, OracleScorer};
use cdbert::retrieval::retrieve;
use cdbert::Error;

/// Dictionary-grounded character encoder: pre-training, PolyMRC and fusion.
#[derive(Parser)]
#[command(name = "cdbert", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set steps=200`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dictionary and write the clean lexicon plus rejections.
    Ingest {
        /// Abort on the first malformed record.
        #[arg(long)]
        strict: bool,
    },
    /// Glyph and dictionary pre-training.
    Pretrain,
    /// Finite-difference check of every operation and loss.
    Gradcheck,
    /// Build the PolyMRC splits and prune test entries from the dictionary.
    BuildPolymrc,
    /// Accuracy of a pre-trained model (or the gold oracle) on instances.
    EvalPolymrc {
        instances: PathBuf,
        /// Score with the gold label instead of a model.
        #[arg(long)]
        oracle: bool,
    },
    /// Sample few-shot training sets from a PolyMRC train split.
    FewShot { train: PathBuf },
    /// Print sense weights for every dictionary entry found in each text.
    Retrieve {
        #[arg(required = true)]
        text: Vec<String>,
    },
    /// Train task heads with and without dictionary fusion.
    FuseTrain,
}

enum Failure {
    Lib(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    /// 1 runtime, 3 configuration, 4 file access, 5 malformed data,
    /// 6 failed check. Usage errors exit with 2 from the argument parser.
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 6,
            Failure::Lib(e) => match e {
                Error::Config(_) => 3,
                Error::Io { .. } | Error::Dict(DictError::Io { .. }) => 4,
                Error::Format { .. } | Error::Dict(DictError::Malformed { .. }) => 5,
                Error::Checkpoint(_) => 5,
                _ => 1,
            },
        }
    }

    fn category(&self) -> &'static str {
        match self.code() {
            3 => "config error",
            4 => "file error",
            5 => "data error",
            6 => "check failed",
            _ => "error",
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Check(m) => f.write_str(m),
        }
    }
}

fn overrides(common: &Common, command: &Command) -> Result<toml::Table, Failure> {
    let mut t = toml::Table::new();
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("`--set {kv}` is not KEY=VALUE")))?;
        let value = toml::from_str::<toml::Table>(&format!("v = {v}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(v.to_string()));
        t.insert(k.trim().to_string(), value);
    }
    if let Some(seed) = common.seed {
        let seed = i64::try_from(seed).map_err(|_| Error::Config("seed must fit in i64".into()))?;
        t.insert("seed".into(), toml::Value::Integer(seed));
    }
    if let Some(out) = &common.out {
        t.insert(
            "out_dir".into(),
            toml::Value::String(out.display().to_string()),
        );
    }
    if let Command::Ingest { strict: true } = command {
        t.insert("strict".into(), toml::Value::Boolean(true));
    }
    Ok(t)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::Gradcheck = cli.command {
        let cfg = RunConfig::from_env(
            cli.common.config.as_deref(),
            overrides(&cli.common, &cli.command)?,
        )?;
        let reports = full_suite(cfg.seed)?;
        let mut failed = Vec::new();
        for r in &reports {
            let mark = if r.passed() { "ok  " } else { "FAIL" };
            println!(
                "{mark} {:<28} max rel err {:.3e} ({} coords)",
                r.name, r.max_rel_err, r.coords
            );
            if !r.passed() {
                failed.push(r.name.clone());
            }
        }
        return match failed.is_empty() {
            true => Ok(()),
            false => Err(Failure::Check(format!(
                "gradient mismatch in {}",
                failed.join(", ")
            ))),
        };
    }
    let cfg = RunConfig::from_env(
        cli.common.config.as_deref(),
        overrides(&cli.common, &cli.command)?,
    )?;
    match cli.command {
        Command::Gradcheck => unreachable!("handled above"),
        Command::Ingest { .. } => print_json(&pipeline::run_ingest(&cfg)?),
        Command::Pretrain => {
            let summary = pipeline::run_pretrain(&cfg)?;
            let (first, last) = match (summary.reports.first(), summary.reports.last()) {
                (Some(a), Some(b)) => (a.total, b.total),
                _ => (0.0, 0.0),
            };
            println!(
                "{} steps, loss {first:.4} -> {last:.4}, {} dictionary records rejected, wrote {}",
                summary.reports.len(),
                summary.rejected,
                cfg.out_dir.display()
            );
        }
        Command::BuildPolymrc => {
            let (ds, stats) = pipeline::run_build_polymrc(&cfg)?;
            let (_, removed) = pipeline::run_filter(&cfg, &ds.test)?;
            print_json(&stats);
            println!("{removed} test entries removed from the pre-training lexicon");
        }
        Command::EvalPolymrc { instances, oracle } => {
            let data = polymrc::read_jsonl(&instances)?;
            let report = if oracle {
                evaluate(&OracleScorer, &data)?
            } else {
                let art = Artifacts::from_config(&cfg)?;
                evaluate(
                    &ModelScorer {
                        model: &art.model,
                        tok: &art.tok,
                    },
                    &data,
                )?
            };
            cfg.write_to(&cfg.out_dir)?;
            write_json(&cfg.out_dir.join("eval.json"), &report)?;
            print_json(&report);
        }
        Command::FewShot { train } => {
            let data = polymrc::read_jsonl(&train)?;
            for path in pipeline::run_few_shot(&cfg, &data)? {
                println!("{}", path.display());
            }
        }
        Command::Retrieve { text } => {
            let art = Artifacts::from_config(&cfg)?;
            let lex = pipeline::load_dictionary(&cfg)?.lexicon;
            for t in &text {
                for s in retrieve(t, &lex, &art.model, &art.tok)? {
                    let line = serde_json::json!({
                        "surface": s.matched.surface,
                        "start": s.matched.start,
                        "end": s.matched.end,
                        "weights": s.weights,
                    });
                    println!("{line}");
                }
            }
        }
        Command::FuseTrain => {
            let r = pipeline::run_fuse_train(&cfg)?;
            println!(
                "final train loss: baseline {:.6}, fused {:.6}",
                r.baseline_final, r.fused_final
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cdbert: {}: {e}", e.category());
            ExitCode::from(e.code())
        }
    }
}
