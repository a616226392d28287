//! Dictionary pre-training: masked entry modeling (MEM), contrastive sense
//! alignment (CL4SA) and example learning (EL), combined as
//! `L = λ1 L_mem + λ2 L_cl4sa + λ3 L_el`.
//!
//! MEM encodes `[CLS] entry [SEP] definition [SEP]`, masks every character of
//! the entry and predicts them back. CL4SA scores `a = h_ent · h_syn` and
//! `b = h_ent · h_neg` on [CLS] states and minimizes `w · ln(1 + e^(b - a))`.
//! EL attends from the [CLS] state of an example sentence over the [CLS]
//! states of the entry's senses and trains the attention towards the sense
//! the example illustrates.

mod batches;
mod losses;
mod metrics;
mod train;

pub use batches::{
    build_pretrain_batches, contrast_pairs, el_items, mem_items, BatchConfig, BatchStream,
    PretrainBatch,
};
pub use losses::{
    argmax, cl4sa_batch_loss, cl4sa_batch_scores, cl4sa_from_scores, cl4sa_loss, cl4sa_scores,
    el_batch_logits, el_batch_loss, el_logits, el_loss, mem_batch_loss, mem_loss, mem_predict,
    mem_predict_batch, ContrastPair, ContrastSide, ELItem, MaskPlan, MemItem, NegativeKind,
};
pub use metrics::{el_accuracy, mem_recovery, synonym_antonym_similarity, SimilarityGap};
pub use train::{
    checkpoint_meta, checkpoint_name, combined_grads, combined_loss, combined_step, load_model,
    pretrain, AdamWSettings, LossReport, LossWeights, PretrainConfig, FINAL_CHECKPOINT, TRAIN_LOG,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dict::{DictEntry, Lexicon, Sense};
    use crate::encoder::{EncoderConfig, EncoderModel, RadicalTable, Tokenizer, Vocab, MASK};
    use crate::tensor::{Tape, Tensor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn entry(surface: &str, defs: &[(&str, &[&str])]) -> DictEntry {
        DictEntry::new(
            surface,
            defs.iter()
                .map(|(d, ex)| Sense::new(*d, ex.iter().map(|s| s.to_string()).collect()))
                .collect(),
        )
    }

    fn small_lexicon() -> Lexicon {
        let mut a = entry(
            "花",
            &[
                ("植物的花朵", &["花很香"]),
                ("用掉钱", &["花了钱"]),
                ("模糊", &["眼花了"]),
            ],
        );
        a.synonyms = vec!["朵".into()];
        let mut b = entry("美丽", &[("好看", &["美丽的山"])]);
        b.synonyms = vec!["漂亮".into()];
        b.antonyms = vec!["丑陋".into()];
        let c = entry("丑陋", &[("难看", &[])]);
        let d = entry("山", &[("高地", &["一座山"])]);
        [a, b, c, d].into_iter().collect()
    }

    fn setup(lex: &Lexicon, d: usize) -> (Tokenizer, EncoderModel) {
        let tok = Tokenizer::new(Vocab::from_lexicon(lex, []), RadicalTable::default());
        let mut cfg = EncoderConfig::new(tok.vocab().len(), tok.radicals().num_ids());
        cfg.d = d;
        cfg.max_len = 32;
        (tok, EncoderModel::new(cfg, 5).unwrap())
    }

    #[test]
    fn two_character_entry_masks_both_positions() {
        let lex = small_lexicon();
        let (tok, _) = setup(&lex, 8);
        let item = MemItem::new(lex.get("美丽").unwrap(), 0);
        let (input, plan) = item.layout(&tok, 32);
        assert_eq!(plan.positions, vec![1, 2]);
        assert!(plan.positions.iter().all(|p| input.a_span.contains(p)));
        assert_eq!(plan.original, tok.ids("美丽"));
        assert_eq!(&input.ids[1..3], &[MASK, MASK]);
    }

    #[test]
    fn cl4sa_closed_forms() {
        let lex = small_lexicon();
        let (_, model) = setup(&lex, 8);
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        let s = |v: f64| tape.constant(Tensor::scalar(v));
        let l = cl4sa_from_scores(&enc, s(0.3), s(0.3), 0.5).unwrap();
        assert!((tape.item(l).unwrap() - 0.5 * std::f64::consts::LN_2).abs() < 1e-12);
        let l = cl4sa_from_scores(&enc, s(1.0), s(0.0), 1.0).unwrap();
        assert!((tape.item(l).unwrap() - 0.31326168751822286).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (a, b): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let literal = -(a.exp() / (a.exp() + b.exp())).ln();
            let stable = tape
                .item(cl4sa_from_scores(&enc, s(a), s(b), 1.0).unwrap())
                .unwrap();
            assert!((literal - stable).abs() < 1e-6);
        }
    }

    #[test]
    fn cl4sa_decreases_in_margin() {
        let lex = small_lexicon();
        let (_, model) = setup(&lex, 8);
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        let mut prev = f64::INFINITY;
        for k in -10..=10 {
            let a = tape.constant(Tensor::scalar(k as f64 * 0.5));
            let b = tape.constant(Tensor::scalar(0.0));
            let l = tape
                .item(cl4sa_from_scores(&enc, a, b, 1.0).unwrap())
                .unwrap();
            assert!(l > 0.0 && l < prev);
            prev = l;
        }
    }

    #[test]
    fn el_with_identical_definitions_is_uniform() {
        let lex = small_lexicon();
        let (tok, model) = setup(&lex, 8);
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        let item = ELItem {
            entry: "花".into(),
            gold: 1,
            definitions: vec!["模糊".into(); 3],
            example: "眼花了".into(),
        };
        let (loss, attn) = el_loss(&item, &enc, &tok).unwrap();
        assert!((tape.item(loss).unwrap() - 3f64.ln()).abs() < 1e-9);
        for &w in tape.value(attn).data() {
            assert!((w - 1.0 / 3.0).abs() < 1e-9);
        }
        let single = ELItem {
            definitions: vec!["模糊".into()],
            gold: 0,
            ..item
        };
        assert!(el_loss(&single, &enc, &tok).is_err());
    }

    #[test]
    fn untrained_losses_are_near_uniform() {
        let lex = small_lexicon();
        let (tok, model) = setup(&lex, 16);
        let tape = Tape::new();
        let enc = model.bind_frozen(&tape);
        let v = tok.vocab().len() as f64;
        for item in mem_items(&lex) {
            let l = tape.item(mem_loss(&item, &enc, &tok).unwrap()).unwrap();
            assert!((l - v.ln()).abs() < 0.15 * v.ln(), "{l} vs ln {v}");
        }
        let items = el_items(&lex);
        let mut mean = 0.0;
        for item in &items {
            let two = ELItem {
                definitions: item.definitions[..2].to_vec(),
                gold: item.gold.min(1),
                ..item.clone()
            };
            mean += tape.item(el_loss(&two, &enc, &tok).unwrap().0).unwrap();
        }
        mean /= items.len() as f64;
        assert!((mean - 2f64.ln()).abs() < 0.3 * 2f64.ln());
    }

    #[test]
    fn combined_weights_sum() {
        assert_eq!(LossWeights::default().combine(1.0, 1.0, 1.0), 1.0);
    }

    #[test]
    fn batch_enumeration_rules() {
        let lex = small_lexicon();
        let cfg = BatchConfig {
            batch_size: 4,
            epochs: 1,
            ..BatchConfig::default()
        };
        let batches: Vec<_> = build_pretrain_batches(&lex, &cfg, 9).collect();
        let mem: Vec<_> = batches.iter().flat_map(|b| &b.mem).collect();
        assert_eq!(
            mem_items(&lex).iter().filter(|m| m.entry == "花").count(),
            3
        );
        for k in 0..3 {
            assert!(mem.iter().any(|m| m.entry == "花" && m.sense == k));
        }
        let pairs: Vec<_> = batches.iter().flat_map(|b| &b.cl4sa).collect();
        let flower = pairs.iter().find(|p| p.anchor.surface == "花").unwrap();
        assert_eq!(flower.kind, NegativeKind::Sampled);
        assert_eq!(flower.weight, cfg.w_rand);
        assert!(flower.negative.surface != "花" && flower.negative.surface != "朵");
        let pretty = pairs.iter().find(|p| p.anchor.surface == "美丽").unwrap();
        assert_eq!(
            (pretty.kind, pretty.weight),
            (NegativeKind::Antonym, cfg.w_anto)
        );
        assert_eq!(pretty.negative.definition.as_deref(), Some("难看"));
        assert_eq!(pretty.positive.definition, None);
        assert_eq!(el_items(&lex).len(), 3);

        let again: Vec<_> = build_pretrain_batches(&lex, &cfg, 9).collect();
        assert_eq!(batches, again);
        let steps = BatchConfig {
            steps: Some(7),
            ..cfg
        };
        assert_eq!(build_pretrain_batches(&lex, &steps, 9).count(), 7);
    }

    #[test]
    fn zero_lambda_matches_training_without_the_objective() {
        let lex = small_lexicon();
        let (tok, model) = setup(&lex, 8);
        let cfg = BatchConfig {
            batch_size: 8,
            ..BatchConfig::default()
        };
        let batch = build_pretrain_batches(&lex, &cfg, 2).next().unwrap();
        let only_mem = LossWeights {
            mem: 0.6,
            cl4sa: 0.0,
            el: 0.0,
        };
        let stripped = PretrainBatch {
            cl4sa: vec![],
            el: vec![],
            ..batch.clone()
        };
        let (g1, r1) = combined_grads(&batch, &model, &tok, &only_mem).unwrap();
        let (g2, r2) = combined_grads(&stripped, &model, &tok, &only_mem).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(r1, r2);
        assert_eq!((r1.cl4sa, r1.el), (0.0, 0.0));
        let empty = PretrainBatch::default();
        assert!(combined_grads(&empty, &model, &tok, &LossWeights::default()).is_err());
    }
}
