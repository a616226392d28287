use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::dict::{DictEntry, Sense};
use crate::encoder::{EncoderConfig, RadicalTable, Vocab};
use crate::error::Error;

fn bar(side: usize, row: usize) -> Vec<u8> {
    let mut p = vec![0u8; side * side];
    for j in 2..side - 2 {
        p[row * side + j] = 200;
    }
    p
}

fn small_atlas() -> GlyphAtlas {
    let mut atlas = GlyphAtlas::new(8).unwrap();
    atlas.insert('一', bar(8, 4)).unwrap();
    let two = bar(8, 2)
        .iter()
        .zip(bar(8, 5))
        .map(|(a, b)| (*a).max(b))
        .collect();
    atlas.insert('二', two).unwrap();
    let mut dot = vec![0u8; 64];
    dot[3 * 8 + 3] = 255;
    atlas.insert('丶', dot).unwrap();
    atlas
}

#[test]
fn atlas_text_round_trip() {
    let atlas = small_atlas();
    let text = atlas.to_text();
    assert!(text.starts_with("GLYPH v1 8 3\n一\n"));
    let again = GlyphAtlas::parse(&text, Path::new("mem")).unwrap();
    assert_eq!(again, atlas);
    assert_eq!(again.to_text(), text);
    assert_eq!(again.len(), 3);
    assert!(again.chars().all(|c| again.bitmap(c).unwrap().len() == 64));
}

#[test]
fn empty_glyph_is_named() {
    let mut text = small_atlas().to_text();
    text = text.replace("GLYPH v1 8 3", "GLYPH v1 8 4");
    text.push_str("口\n");
    for _ in 0..8 {
        text.push_str("0 0 0 0 0 0 0 0\n");
    }
    let err = GlyphAtlas::parse(&text, Path::new("a.atlas")).unwrap_err();
    assert!(matches!(err, Error::Format { .. }));
    assert!(
        err.to_string().contains("'口'") && err.to_string().contains("empty"),
        "{err}"
    );
}

#[test]
fn size_mismatches_are_rejected() {
    let text = small_atlas().to_text();
    let short_row = text.replacen("0 0 0 0 0 0 0 0\n", "0 0 0 0 0 0 0\n", 1);
    assert!(GlyphAtlas::parse(&short_row, Path::new("a")).is_err());
    let wrong_count = text.replace("GLYPH v1 8 3", "GLYPH v1 8 5");
    assert!(GlyphAtlas::parse(&wrong_count, Path::new("a")).is_err());
    let big = text.replacen("200", "256", 1);
    assert!(GlyphAtlas::parse(&big, Path::new("a")).is_err());
    let mut atlas = GlyphAtlas::new(8).unwrap();
    assert!(atlas.insert('x', vec![1; 63]).is_err());
    assert!(GlyphAtlas::new(10).is_err());
}

#[test]
fn augmentation_keeps_size_and_range() {
    let atlas = small_atlas();
    let clean = atlas.bitmap('一').unwrap();
    assert_eq!(GlyphAugmentation::IDENTITY.apply(&clean, 8), clean);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let aug = GlyphAugmentation::sample(&mut rng);
        assert!(ROTATIONS.contains(&aug.rotation) && SCALES.contains(&aug.scale));
        let out = aug.apply(&clean, 8);
        assert_eq!(out.len(), 64);
        assert!(out.iter().all(|v| (0.0..=1.0).contains(v)));
    }
    assert!(GlyphAugmentation::new(15, 1.0, None).is_err());
    assert!(GlyphAugmentation::new(10, 0.8, None).is_err());
    let turned = GlyphAugmentation::new(10, 0.9, Some(0.1))
        .unwrap()
        .apply(&clean, 8);
    assert_ne!(turned, clean);
}

#[test]
fn rotation_moves_ink_about_the_center() {
    let side = 24;
    let mut bitmap = vec![0.0; side * side];
    for j in 4..20 {
        bitmap[11 * side + j] = 1.0;
        bitmap[12 * side + j] = 1.0;
    }
    let rotated = GlyphAugmentation::new(10, 1.0, None)
        .unwrap()
        .apply(&bitmap, side);
    let mass = |b: &[Scalar]| b.iter().sum::<Scalar>();
    // Rotation about the center roughly preserves the ink and its centroid.
    assert!((mass(&rotated) - mass(&bitmap)).abs() < 0.1 * mass(&bitmap));
    let centroid = |b: &[Scalar]| {
        let m = mass(b);
        let (mut y, mut x) = (0.0, 0.0);
        for (k, v) in b.iter().enumerate() {
            y += v * (k / side) as Scalar;
            x += v * (k % side) as Scalar;
        }
        (y / m, x / m)
    };
    let (a, b) = (centroid(&bitmap), centroid(&rotated));
    assert!((a.0 - b.0).abs() < 0.5 && (a.1 - b.1).abs() < 0.5);
    // The far ends of the bar move vertically in opposite directions.
    let rows_at = |b: &[Scalar], col: usize| {
        (0..side)
            .map(|i| b[i * side + col] * i as Scalar)
            .sum::<Scalar>()
    };
    assert!(
        (rows_at(&rotated, 5) - rows_at(&bitmap, 5))
            * (rows_at(&rotated, 18) - rows_at(&bitmap, 18))
            < 0.0
    );
}

#[test]
fn symmetric_ce_closed_forms() {
    let tape = Tape::new();
    let same = tape.constant(Tensor::matrix(2, 2, vec![0.3, 0.3, 0.3, 0.3]).unwrap());
    let l = tape
        .item(symmetric_cross_entropy(&tape, same).unwrap())
        .unwrap();
    assert!((l - 2f64.ln()).abs() < 1e-12);
    for b in 2..7 {
        let uniform = tape.constant(Tensor::full(&[b, b], 1.7));
        let l = tape
            .item(symmetric_cross_entropy(&tape, uniform).unwrap())
            .unwrap();
        assert!((l - (b as f64).ln()).abs() < 1e-6);
    }
    let tau = DEFAULT_TEMPERATURE;
    let mut s = vec![-30.0 / tau; 9];
    for i in 0..3 {
        s[i * 3 + i] = 30.0 / tau;
    }
    let saturated = tape.constant(Tensor::matrix(3, 3, s).unwrap());
    assert!(
        tape.item(symmetric_cross_entropy(&tape, saturated).unwrap())
            .unwrap()
            < 1e-12
    );
    let one = tape.constant(Tensor::full(&[1, 1], 0.0));
    assert!(symmetric_cross_entropy(&tape, one).is_err());
}

#[test]
fn swapping_roles_keeps_the_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data: Vec<Scalar> = (0..16)
        .map(|_| rand::Rng::random_range(&mut rng, -2.0..2.0))
        .collect();
    let tape = Tape::new();
    let s = tape.constant(Tensor::matrix(4, 4, data).unwrap());
    let a = tape
        .item(symmetric_cross_entropy(&tape, s).unwrap())
        .unwrap();
    let b = tape
        .item(symmetric_cross_entropy(&tape, tape.transpose(s).unwrap()).unwrap())
        .unwrap();
    assert!((a - b).abs() < 1e-12);
    assert!(a >= 0.0);
}

fn text_side(atlas: &GlyphAtlas) -> (Tokenizer, EncoderModel, Vec<GlyphPair>) {
    let lex: Lexicon = [
        DictEntry::new("一", vec![Sense::new("最小的正整数", vec![])]),
        DictEntry::new("二", vec![Sense::new("一加一", vec![])]),
        DictEntry::new("丶", vec![Sense::new("点", vec![])]),
        DictEntry::new("一二", vec![Sense::new("少许", vec![])]),
    ]
    .into_iter()
    .collect();
    let tok = Tokenizer::new(Vocab::from_lexicon(&lex, []), RadicalTable::default());
    let mut cfg = EncoderConfig::new(tok.vocab().len(), tok.radicals().num_ids());
    cfg.d = 8;
    cfg.max_len = 32;
    let pairs = glyph_pairs(&lex, atlas);
    (tok, EncoderModel::new(cfg, 1).unwrap(), pairs)
}

#[test]
fn contrastive_loss_requires_two_pairs() {
    let atlas = small_atlas();
    let (tok, text, pairs) = text_side(&atlas);
    assert_eq!(pairs.len(), 3);
    let glyph = GlyphEncoder::new(GlyphConfig::new(8, 8), 0).unwrap();
    let tape = Tape::new();
    let (g, e) = (glyph.bind(&tape), text.bind(&tape));
    assert!(glyph_contrastive_loss(&pairs[..1], &g, &e, &tok, &atlas, None).is_err());
    let l = glyph_contrastive_loss(&pairs, &g, &e, &tok, &atlas, None).unwrap();
    let v = tape.item(l).unwrap();
    assert!(v >= 0.0 && v.is_finite());
    let augs = [GlyphAugmentation::IDENTITY; 3];
    let same = glyph_contrastive_loss(&pairs, &g, &e, &tok, &atlas, Some(&augs)).unwrap();
    assert!((tape.item(same).unwrap() - v).abs() < 1e-12);
    assert!(glyph_contrastive_loss(&pairs, &g, &e, &tok, &atlas, Some(&augs[..2])).is_err());
}

#[test]
fn feature_shape_and_determinism() {
    let atlas = small_atlas();
    let glyph = GlyphEncoder::new(GlyphConfig::new(8, 8), 0).unwrap();
    let a = glyph_feature('二', &glyph, &atlas, None).unwrap();
    assert_eq!(a.len(), 8);
    assert_eq!(a, glyph_feature('二', &glyph, &atlas, None).unwrap());
    assert!(glyph_feature('三', &glyph, &atlas, None).is_err());
    assert!((glyph.temperature() - DEFAULT_TEMPERATURE).abs() < 1e-12);
}

#[test]
fn feature_table_rows() {
    let atlas = small_atlas();
    let (tok, text, _) = text_side(&atlas);
    let glyph = GlyphEncoder::new(GlyphConfig::new(8, 8), 0).unwrap();
    for source in [GlyphSource::Visual, GlyphSource::Text] {
        let table = glyph_feature_table(source, &glyph, &text, &tok, &atlas).unwrap();
        assert_eq!(table.shape(), &[tok.vocab().len(), 8]);
        let id = tok.vocab().id('一');
        assert!(table.row(id).iter().any(|&v| v != 0.0));
        let no_glyph = tok.vocab().id('最');
        assert!(table.row(no_glyph).iter().all(|&v| v == 0.0));
    }
    let visual = glyph_feature_table(GlyphSource::Visual, &glyph, &text, &tok, &atlas).unwrap();
    let id = tok.vocab().id('丶');
    assert_eq!(
        visual.row(id),
        glyph_feature('丶', &glyph, &atlas, None)
            .unwrap()
            .as_slice()
    );
    let wide = GlyphEncoder::new(GlyphConfig::new(8, 16), 0).unwrap();
    assert!(glyph_feature_table(GlyphSource::Visual, &wide, &text, &tok, &atlas).is_err());
}

#[test]
fn training_lowers_the_loss() {
    let atlas = small_atlas();
    let (tok, mut text, pairs) = text_side(&atlas);
    let mut glyph = GlyphEncoder::new(GlyphConfig::new(8, 8), 0).unwrap();
    let cfg = GlyphTrainConfig {
        steps: 40,
        batch_size: 3,
        augment: false,
        ..GlyphTrainConfig::default()
    };
    let losses = train_glyph(&pairs, &atlas, &mut glyph, &mut text, &tok, &cfg, 0).unwrap();
    assert_eq!(losses.len(), 40);
    assert!(
        losses[39] < 0.5 * losses[0],
        "{} -> {}",
        losses[0],
        losses[39]
    );
}
