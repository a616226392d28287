use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cdbert::dict::{ingest, IngestConfig};
use cdbert::encoder::{EncoderConfig, EncoderModel, RadicalTable, Tokenizer, Vocab};
use cdbert::glyph::{
    cosine, glyph_feature, glyph_pairs, train_glyph, GlyphAtlas, GlyphAugmentation, GlyphConfig,
    GlyphEncoder, GlyphTrainConfig,
};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

/// After contrastive training a distorted glyph stays closer to its own clean
/// glyph than to a different character.
#[test]
fn trained_features_survive_augmentation() {
    let lex = ingest(data("toy_dict.jsonl"), IngestConfig::default())
        .unwrap()
        .lexicon;
    let tok = Tokenizer::new(
        Vocab::from_lexicon(&lex, []),
        RadicalTable::load(data("radicals.tsv")).unwrap(),
    );
    let atlas = GlyphAtlas::load(data("glyphs.atlas")).unwrap();
    let mut cfg = EncoderConfig::new(tok.vocab().len(), tok.radicals().num_ids());
    cfg.d = 32;
    let mut text = EncoderModel::new(cfg, 3).unwrap();
    let mut glyph = GlyphEncoder::new(GlyphConfig::new(atlas.side(), cfg.d), 3).unwrap();
    let pairs = glyph_pairs(&lex, &atlas);
    let train = GlyphTrainConfig {
        steps: 60,
        ..GlyphTrainConfig::default()
    };
    let losses = train_glyph(&pairs, &atlas, &mut glyph, &mut text, &tok, &train, 3).unwrap();
    assert!(losses[losses.len() - 5..].iter().sum::<f64>() < losses[..5].iter().sum::<f64>());

    let chars: Vec<char> = atlas.chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut own, mut other) = (0.0, 0.0);
    for (i, &c) in chars.iter().enumerate() {
        let unrelated = chars[(i + 1) % chars.len()];
        let aug = GlyphAugmentation::sample(&mut rng);
        let distorted = glyph_feature(c, &glyph, &atlas, Some(&aug)).unwrap();
        own += cosine(&distorted, &glyph_feature(c, &glyph, &atlas, None).unwrap());
        other += cosine(
            &distorted,
            &glyph_feature(unrelated, &glyph, &atlas, None).unwrap(),
        );
    }
    let n = chars.len() as f64;
    assert!(
        own / n > other / n,
        "own {} vs other {}",
        own / n,
        other / n
    );
}
