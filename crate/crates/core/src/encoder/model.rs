use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::vocab::PAD;
use super::PairInput;
use crate::error::{invalid, Error, Result};
use crate::tensor::{Bound, ParamId, ParamStore, Scalar, Tape, Tensor, Var};

const INIT_STD: Scalar = 0.02;
/// Added to attention scores of padded keys.
const MASKED: Scalar = -1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderConfig {
    pub d: usize,
    pub layers: usize,
    pub heads: usize,
    pub ffn_mult: usize,
    pub max_len: usize,
    pub vocab_size: usize,
    pub radical_vocab_size: usize,
}

impl EncoderConfig {
    /// Defaults for everything except the two vocabulary sizes.
    pub fn new(vocab_size: usize, radical_vocab_size: usize) -> Self {
        Self {
            d: 64,
            layers: 2,
            heads: 2,
            ffn_mult: 4,
            max_len: 256,
            vocab_size,
            radical_vocab_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.heads == 0 || !self.d.is_multiple_of(self.heads) {
            return Err(invalid!(
                "hidden size {} is not divisible by {} heads",
                self.d,
                self.heads
            ));
        }
        if self.max_len < 3
            || self.vocab_size == 0
            || self.radical_vocab_size == 0
            || self.ffn_mult == 0
        {
            return Err(invalid!("degenerate encoder config {self:?}"));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d / self.heads
    }

    /// Number of scalar parameters of an [`EncoderModel`] with this config.
    pub fn param_count(&self) -> usize {
        let (d, f, v) = (self.d, self.ffn_mult * self.d, self.vocab_size);
        let embeddings = (v + self.max_len + self.radical_vocab_size) * d;
        let attention = 4 * (d * d + d);
        let ffn = d * f + f + f * d + d;
        let norms = 2 * 2 * d;
        embeddings + self.layers * (attention + ffn + norms) + 2 * d + d * v + v
    }
}

#[derive(Debug, Clone, PartialEq)]
struct LayerIds {
    ln1_g: ParamId,
    ln1_b: ParamId,
    wq: ParamId,
    bq: ParamId,
    wk: ParamId,
    bk: ParamId,
    wv: ParamId,
    bv: ParamId,
    wo: ParamId,
    bo: ParamId,
    ln2_g: ParamId,
    ln2_b: ParamId,
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
}

#[derive(Debug, Clone, PartialEq)]
struct Ids {
    tok: ParamId,
    pos: ParamId,
    rad: ParamId,
    layers: Vec<LayerIds>,
    lnf_g: ParamId,
    lnf_b: ParamId,
    mlm_w: ParamId,
    mlm_b: ParamId,
}

/// Pre-LN transformer encoder over characters with additive token, position
/// and radical embeddings, and an untied masked-LM head.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderModel {
    config: EncoderConfig,
    params: ParamStore,
    ids: Ids,
    /// Fixed per-token glyph features `[vocab, d]`, added to the input embedding.
    glyph: Option<Tensor>,
}

struct Init {
    rng: ChaCha8Rng,
    normal: Normal<Scalar>,
}

impl Init {
    fn normal(&mut self, shape: &[usize]) -> Tensor {
        let n = shape.iter().product();
        let data = (0..n).map(|_| self.normal.sample(&mut self.rng)).collect();
        Tensor::from_vec(shape.to_vec(), data).expect("shape product")
    }
}

impl EncoderModel {
    /// Weights ~ N(0, 0.02²), biases 0, layer-norm gains 1.
    pub fn new(config: EncoderConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init = Init {
            rng: ChaCha8Rng::seed_from_u64(seed),
            normal: Normal::new(0.0, INIT_STD).expect("valid std"),
        };
        let (d, f, v) = (config.d, config.ffn_mult * config.d, config.vocab_size);
        let mut p = ParamStore::new();
        let tok = p.add("embed.token", init.normal(&[v, d]), true);
        let pos = p.add("embed.position", init.normal(&[config.max_len, d]), true);
        let rad = p.add(
            "embed.radical",
            init.normal(&[config.radical_vocab_size, d]),
            true,
        );
        let mut layers = Vec::with_capacity(config.layers);
        for l in 0..config.layers {
            let mut add = |name: &str, t: Tensor| {
                let decay = t.rank() == 2;
                p.add(format!("layer{l}.{name}"), t, decay)
            };
            layers.push(LayerIds {
                ln1_g: add("ln1.gamma", Tensor::full(&[d], 1.0)),
                ln1_b: add("ln1.beta", Tensor::zeros(&[d])),
                wq: add("attn.wq", init.normal(&[d, d])),
                bq: add("attn.bq", Tensor::zeros(&[d])),
                wk: add("attn.wk", init.normal(&[d, d])),
                bk: add("attn.bk", Tensor::zeros(&[d])),
                wv: add("attn.wv", init.normal(&[d, d])),
                bv: add("attn.bv", Tensor::zeros(&[d])),
                wo: add("attn.wo", init.normal(&[d, d])),
                bo: add("attn.bo", Tensor::zeros(&[d])),
                ln2_g: add("ln2.gamma", Tensor::full(&[d], 1.0)),
                ln2_b: add("ln2.beta", Tensor::zeros(&[d])),
                w1: add("ffn.w1", init.normal(&[d, f])),
                b1: add("ffn.b1", Tensor::zeros(&[f])),
                w2: add("ffn.w2", init.normal(&[f, d])),
                b2: add("ffn.b2", Tensor::zeros(&[d])),
            });
        }
        let lnf_g = p.add("final_ln.gamma", Tensor::full(&[d], 1.0), false);
        let lnf_b = p.add("final_ln.beta", Tensor::zeros(&[d]), false);
        let mlm_w = p.add("mlm.w", init.normal(&[d, v]), true);
        let mlm_b = p.add("mlm.b", Tensor::zeros(&[v]), false);
        Ok(Self {
            config,
            params: p,
            ids: Ids {
                tok,
                pos,
                rad,
                layers,
                lnf_g,
                lnf_b,
                mlm_w,
                mlm_b,
            },
            glyph: None,
        })
    }

    /// Model whose weights are taken by name from `params`.
    pub fn from_params(config: EncoderConfig, params: &ParamStore) -> Result<Self> {
        let mut model = Self::new(config, 0)?;
        model.params.load_from(params)?;
        Ok(model)
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    /// Installs (or clears) a fixed `[vocab, d]` glyph feature table.
    pub fn set_glyph_features(&mut self, table: Option<Tensor>) -> Result<()> {
        if let Some(t) = &table {
            let want = [self.config.vocab_size, self.config.d];
            if t.shape() != want {
                return Err(invalid!(
                    "glyph table shape {:?}, expected {want:?}",
                    t.shape()
                ));
            }
        }
        self.glyph = table;
        Ok(())
    }

    pub fn glyph_features(&self) -> Option<&Tensor> {
        self.glyph.as_ref()
    }

    /// Id of the radical embedding table, e.g. for ablations.
    pub fn radical_table_id(&self) -> ParamId {
        self.ids.rad
    }

    /// Registers all weights on `tape` as trainable leaves.
    pub fn bind<'a>(&'a self, tape: &'a Tape) -> BoundEncoder<'a> {
        self.bind_vars(tape, self.params.bind(tape))
    }

    /// Registers all weights on `tape` as constants.
    pub fn bind_frozen<'a>(&'a self, tape: &'a Tape) -> BoundEncoder<'a> {
        self.bind_vars(tape, self.params.bind_frozen(tape))
    }

    /// Uses caller-provided tape handles, aligned with [`EncoderModel::params`].
    pub fn bind_vars<'a>(&'a self, tape: &'a Tape, vars: Bound) -> BoundEncoder<'a> {
        let glyph = self.glyph.as_ref().map(|g| tape.constant(g.clone()));
        BoundEncoder {
            model: self,
            tape,
            vars,
            glyph,
        }
    }
}

/// Forward pass output.
#[derive(Debug, Clone)]
pub struct Encoded {
    /// `[L, d]` after the final layer norm.
    pub hidden: Var,
    /// `[d]`, the hidden state at position 0.
    pub cls: Var,
    /// `[layer][head]` attention weights, each `[L, L]` with rows on the simplex.
    pub attention: Vec<Vec<Var>>,
}

/// Output of [`BoundEncoder::forward_packed`].
#[derive(Debug, Clone)]
pub struct Packed {
    /// `[total_len, d]`: the hidden states of all sequences, stacked.
    pub hidden: Var,
    /// Row of each sequence's first position in `hidden`.
    pub starts: Vec<usize>,
    pub lens: Vec<usize>,
    /// `[sequence][layer][head]` attention weights.
    pub attention: Vec<Vec<Vec<Var>>>,
}

impl Packed {
    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    /// `[n, d]`: the [CLS] state of every sequence.
    pub fn cls_rows(&self, tape: &Tape) -> Result<Var> {
        Ok(tape.embedding_lookup(self.hidden, &self.starts)?)
    }

    /// Rows of `hidden` for `(sequence, position)` pairs.
    pub fn gather(&self, tape: &Tape, at: &[(usize, usize)]) -> Result<Var> {
        let rows = at
            .iter()
            .map(|&(s, p)| {
                if s >= self.len() || p >= self.lens[s] {
                    return Err(invalid!(
                        "position {p} of sequence {s} is outside the batch"
                    ));
                }
                Ok(self.starts[s] + p)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(tape.embedding_lookup(self.hidden, &rows)?)
    }
}

/// An [`EncoderModel`] whose weights are recorded on a tape.
pub struct BoundEncoder<'a> {
    model: &'a EncoderModel,
    tape: &'a Tape,
    vars: Bound,
    glyph: Option<Var>,
}

impl<'a> BoundEncoder<'a> {
    pub fn tape(&self) -> &'a Tape {
        self.tape
    }

    pub fn model(&self) -> &'a EncoderModel {
        self.model
    }

    pub fn bound(&self) -> &Bound {
        &self.vars
    }

    fn v(&self, id: ParamId) -> Var {
        self.vars.var(id)
    }

    pub fn forward(&self, input: &PairInput) -> Result<Encoded> {
        let mut packed = self.forward_packed(std::slice::from_ref(input))?;
        let cls = self.tape.row(packed.hidden, 0)?;
        Ok(Encoded {
            hidden: packed.hidden,
            cls,
            attention: packed.attention.pop().expect("one sequence"),
        })
    }

    /// Encodes several inputs in one pass. Sequences are stacked row-wise
    /// without padding, so every dense layer runs as one matmul while
    /// attention stays within each sequence.
    pub fn forward_packed(&self, inputs: &[PairInput]) -> Result<Packed> {
        let cfg = &self.model.config;
        let t = self.tape;
        let ids = &self.model.ids;
        if inputs.is_empty() {
            return Err(invalid!("no inputs to encode"));
        }
        let mut starts = Vec::with_capacity(inputs.len());
        let (mut tokens, mut radicals, mut positions) = (Vec::new(), Vec::new(), Vec::new());
        for input in inputs {
            let len = input.ids.len();
            if len > cfg.max_len {
                return Err(Error::Overlong {
                    actual: len,
                    max: cfg.max_len,
                });
            }
            if len == 0 {
                return Err(invalid!("empty input"));
            }
            if input.radicals.len() != len {
                return Err(invalid!(
                    "{} radical ids for {len} tokens",
                    input.radicals.len()
                ));
            }
            starts.push(tokens.len());
            tokens.extend_from_slice(&input.ids);
            radicals.extend_from_slice(&input.radicals);
            positions.extend(0..len);
        }
        let mut x = t.embedding_lookup(self.v(ids.tok), &tokens)?;
        x = t.add(x, t.embedding_lookup(self.v(ids.pos), &positions)?)?;
        x = t.add(x, t.embedding_lookup(self.v(ids.rad), &radicals)?)?;
        if let Some(g) = self.glyph {
            x = t.add(x, t.embedding_lookup(g, &tokens)?)?;
        }

        let masks: Vec<Option<Var>> = inputs
            .iter()
            .map(|input| {
                let len = input.ids.len();
                input.ids.contains(&PAD).then(|| {
                    let mut m = vec![0.0; len * len];
                    for row in m.chunks_mut(len) {
                        for (j, &id) in input.ids.iter().enumerate() {
                            if id == PAD {
                                row[j] = MASKED;
                            }
                        }
                    }
                    t.constant(Tensor::from_vec(vec![len, len], m).expect("square mask"))
                })
            })
            .collect();

        let dh = cfg.head_dim();
        let inv_sqrt = 1.0 / (dh as Scalar).sqrt();
        let mut attention = vec![Vec::with_capacity(cfg.layers); inputs.len()];
        for layer in &ids.layers {
            let h = t.layer_norm(x, self.v(layer.ln1_g), self.v(layer.ln1_b))?;
            let q = t.add_row(t.matmul(h, self.v(layer.wq))?, self.v(layer.bq))?;
            let k = t.add_row(t.matmul(h, self.v(layer.wk))?, self.v(layer.bk))?;
            let v = t.add_row(t.matmul(h, self.v(layer.wv))?, self.v(layer.bv))?;
            let mut per_seq = Vec::with_capacity(inputs.len());
            for (s, input) in inputs.iter().enumerate() {
                let (r0, r1) = (starts[s], starts[s] + input.ids.len());
                let (qs, ks, vs) = if inputs.len() == 1 {
                    (q, k, v)
                } else {
                    (
                        t.slice(q, 0, r0, r1)?,
                        t.slice(k, 0, r0, r1)?,
                        t.slice(v, 0, r0, r1)?,
                    )
                };
                let mut heads = Vec::with_capacity(cfg.heads);
                let mut weights = Vec::with_capacity(cfg.heads);
                for head in 0..cfg.heads {
                    let (c0, c1) = (head * dh, (head + 1) * dh);
                    let qh = t.slice(qs, 1, c0, c1)?;
                    let kh = t.slice(ks, 1, c0, c1)?;
                    let vh = t.slice(vs, 1, c0, c1)?;
                    let mut scores = t.scale(t.matmul_t(qh, kh)?, inv_sqrt)?;
                    if let Some(m) = masks[s] {
                        scores = t.add(scores, m)?;
                    }
                    let a = t.softmax_lastdim(scores)?;
                    heads.push(t.matmul(a, vh)?);
                    weights.push(a);
                }
                per_seq.push(if heads.len() == 1 {
                    heads[0]
                } else {
                    t.concat(&heads, 1)?
                });
                attention[s].push(weights);
            }
            let merged = if per_seq.len() == 1 {
                per_seq[0]
            } else {
                t.concat(&per_seq, 0)?
            };
            let o = t.add_row(t.matmul(merged, self.v(layer.wo))?, self.v(layer.bo))?;
            x = t.add(x, o)?;
            let h2 = t.layer_norm(x, self.v(layer.ln2_g), self.v(layer.ln2_b))?;
            let f = t.gelu(t.add_row(t.matmul(h2, self.v(layer.w1))?, self.v(layer.b1))?)?;
            let f = t.add_row(t.matmul(f, self.v(layer.w2))?, self.v(layer.b2))?;
            x = t.add(x, f)?;
        }
        let hidden = t.layer_norm(x, self.v(ids.lnf_g), self.v(ids.lnf_b))?;
        Ok(Packed {
            hidden,
            starts,
            lens: inputs.iter().map(PairInput::len).collect(),
            attention,
        })
    }

    /// Masked-LM logits `[positions.len(), vocab]` for rows of `hidden`.
    pub fn mlm_logits(&self, hidden: Var, positions: &[usize]) -> Result<Var> {
        let rows = self.tape.embedding_lookup(hidden, positions)?;
        self.mlm_head(rows)
    }

    /// Masked-LM logits `[n, vocab]` for already gathered `[n, d]` states.
    pub fn mlm_head(&self, rows: Var) -> Result<Var> {
        let t = self.tape;
        let logits = t.matmul(rows, self.v(self.model.ids.mlm_w))?;
        Ok(t.add_row(logits, self.v(self.model.ids.mlm_b))?)
    }
}
