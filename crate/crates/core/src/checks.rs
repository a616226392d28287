//! End-to-end gradient checks of the training losses.
//!
//! Each loss is evaluated on a tiny model whose weights are drawn at a
//! larger scale than the training initialization, so that gradients are far
//! from zero and the relative-error measure is meaningful.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dict::{DictEntry, Lexicon, Sense};
use crate::encoder::{BoundEncoder, EncoderConfig, EncoderModel, RadicalTable, Tokenizer, Vocab};
use crate::error::Result;
use crate::glyph::{
    glyph_contrastive_loss, GlyphAtlas, GlyphAugmentation, GlyphConfig, GlyphEncoder, GlyphPair,
};
use crate::shuowen::{
    cl4sa_batch_loss, el_batch_loss, el_loss, mem_batch_loss, ContrastPair, ContrastSide, ELItem,
    MemItem, NegativeKind,
};
use crate::tensor::gradcheck::{check, op_suite, random_tensor, GradcheckOptions, GradcheckReport};
use crate::tensor::{Bound, ParamStore, Tape, Tensor, Var};

/// Coordinates probed per parameter tensor.
const COORDS_PER_PARAM: usize = 16;
const WEIGHT_SCALE: f64 = 0.4;

fn lexicon() -> Lexicon {
    let mut flower = DictEntry::new(
        "花",
        vec![
            Sense::new("植物的繁殖器官", vec!["花开了".into()]),
            Sense::new("用掉钱财", vec!["花钱".into()]),
            Sense::new("模糊不清", vec!["眼花".into()]),
        ],
    );
    flower.synonyms = vec!["华".into()];
    let mut pretty = DictEntry::new("美丽", vec![Sense::new("好看", vec!["美丽的湖".into()])]);
    pretty.synonyms = vec!["漂亮".into()];
    pretty.antonyms = vec!["丑陋".into()];
    let ugly = DictEntry::new("丑陋", vec![Sense::new("难看", vec![])]);
    [flower, pretty, ugly].into_iter().collect()
}

fn randomized(params: &ParamStore, rng: &mut ChaCha8Rng) -> Vec<Tensor> {
    params
        .iter()
        .map(|p| random_tensor(rng, p.value.shape(), WEIGHT_SCALE))
        .collect()
}

fn atlas() -> GlyphAtlas {
    let mut atlas = GlyphAtlas::new(8).expect("valid side");
    for (k, c) in "花丑美".chars().enumerate() {
        let pixels = (0..64).map(|i| ((i * (k + 3) * 37) % 251) as u8).collect();
        atlas.insert(c, pixels).expect("non-empty glyph");
    }
    atlas
}

/// Gradient checks for MEM, CL4SA, EL and the glyph contrastive loss, each
/// through the whole encoder.
pub fn loss_suite(seed: u64) -> Result<Vec<GradcheckReport>> {
    let lex = lexicon();
    let tok = Tokenizer::new(
        Vocab::from_lexicon(&lex, ["华漂亮"]),
        RadicalTable::from_pairs([('花', "艹"), ('华', "十"), ('丑', "一")]),
    );
    let mut config = EncoderConfig::new(tok.vocab().len(), tok.radicals().num_ids());
    config.d = 8;
    config.max_len = 32;
    let model = EncoderModel::new(config, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = randomized(model.params(), &mut rng);
    let opts = GradcheckOptions {
        max_coords: Some(COORDS_PER_PARAM),
        seed,
        ..GradcheckOptions::default()
    };
    let flower = lex.get("花").expect("fixture entry");
    let pretty = lex.get("美丽").expect("fixture entry");

    let mem = vec![MemItem::new(flower, 1), MemItem::new(pretty, 0)];
    let pairs = vec![
        ContrastPair {
            anchor: ContrastSide::new("美丽", Some(pretty)),
            positive: ContrastSide::new("漂亮", None),
            negative: ContrastSide::new("丑陋", lex.get("丑陋")),
            kind: NegativeKind::Antonym,
            weight: 1.0,
        },
        ContrastPair {
            anchor: ContrastSide::new("花", Some(flower)),
            positive: ContrastSide::new("华", None),
            negative: ContrastSide::new("美丽", Some(pretty)),
            kind: NegativeKind::Sampled,
            weight: 0.5,
        },
    ];
    let definitions: Vec<String> = flower.senses.iter().map(|s| s.definition.clone()).collect();
    let el = vec![
        ELItem {
            entry: "花".into(),
            gold: 2,
            definitions: definitions.clone(),
            example: "眼花".into(),
        },
        ELItem {
            entry: "花".into(),
            gold: 0,
            definitions: definitions[..2].to_vec(),
            example: "花开了".into(),
        },
    ];

    let mut reports = Vec::new();
    reports.push(check("mem_loss", &weights, opts, |t, v| {
        mem_batch_loss(&mem[..1], &bind(&model, t, v), &tok).map_err(tensor_err)
    })?);
    reports.push(check("mem_loss(batch)", &weights, opts, |t, v| {
        mem_batch_loss(&mem, &bind(&model, t, v), &tok).map_err(tensor_err)
    })?);
    reports.push(check("cl4sa_loss", &weights, opts, |t, v| {
        cl4sa_batch_loss(&pairs, &bind(&model, t, v), &tok).map_err(tensor_err)
    })?);
    reports.push(check("el_loss", &weights, opts, |t, v| {
        el_loss(&el[0], &bind(&model, t, v), &tok)
            .map(|(l, _)| l)
            .map_err(tensor_err)
    })?);
    reports.push(check("el_loss(batch)", &weights, opts, |t, v| {
        el_batch_loss(&el, &bind(&model, t, v), &tok).map_err(tensor_err)
    })?);

    let atlas = atlas();
    let glyph = GlyphEncoder::new(
        GlyphConfig {
            channels1: 2,
            channels2: 3,
            ..GlyphConfig::new(8, 8)
        },
        seed,
    )?;
    let glyph_pairs: Vec<GlyphPair> = "花丑美"
        .chars()
        .zip(["植物", "难看", "好"])
        .map(|(character, def)| GlyphPair {
            character,
            definition: def.into(),
        })
        .collect();
    let augment = [
        GlyphAugmentation::new(10, 0.9, None)?,
        GlyphAugmentation::IDENTITY,
        GlyphAugmentation::new(-10, 1.0, Some(0.1))?,
    ];
    let mut joint = randomized(glyph.params(), &mut rng);
    let split = joint.len();
    // Keep the temperature near its default so the logits stay moderate.
    joint[split - 1] = Tensor::scalar(1.0);
    joint.extend(weights.iter().cloned());
    reports.push(check("glyph_contrastive_loss", &joint, opts, |t, v| {
        let g = glyph.bind_vars(t, Bound::from_vars(v[..split].to_vec()));
        let e = bind(&model, t, &v[split..]);
        glyph_contrastive_loss(&glyph_pairs, &g, &e, &tok, &atlas, Some(&augment))
            .map_err(tensor_err)
    })?);
    Ok(reports)
}

fn bind<'a>(model: &'a EncoderModel, tape: &'a Tape, vars: &[Var]) -> BoundEncoder<'a> {
    model.bind_vars(tape, Bound::from_vars(vars.to_vec()))
}

/// Every tape operation followed by every loss.
pub fn full_suite(seed: u64) -> Result<Vec<GradcheckReport>> {
    let mut reports = op_suite(seed)?;
    reports.extend(loss_suite(seed)?);
    Ok(reports)
}

/// The gradcheck harness speaks tensor errors; losses report crate errors.
fn tensor_err(e: crate::Error) -> crate::tensor::TensorError {
    match e {
        crate::Error::Tensor(t) => t,
        other => crate::tensor::TensorError::Invalid {
            op: "loss",
            msg: other.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_loss_passes() {
        for report in loss_suite(3).unwrap() {
            eprintln!(
                "{:<24} {:.3e} over {} coords",
                report.name, report.max_rel_err, report.coords
            );
            assert!(report.passed(), "{}: {}", report.name, report.max_rel_err);
        }
    }
}
