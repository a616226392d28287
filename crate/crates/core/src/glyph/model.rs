use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tensor::{Bound, ParamId, ParamStore, Scalar, Tape, Tensor, Var};

/// Initial contrastive temperature.
pub const DEFAULT_TEMPERATURE: Scalar = 0.07;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlyphConfig {
    /// Bitmap side; must be divisible by 4 (two 2x2 poolings).
    pub side: usize,
    pub channels1: usize,
    pub channels2: usize,
    /// Odd convolution kernel size.
    pub kernel: usize,
    /// Output dimension, equal to the text encoder's hidden size.
    pub d: usize,
}

impl GlyphConfig {
    pub fn new(side: usize, d: usize) -> Self {
        Self {
            side,
            channels1: 8,
            channels2: 16,
            kernel: 3,
            d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.side == 0 || !self.side.is_multiple_of(4) {
            return Err(invalid!(
                "glyph side {} must be a positive multiple of 4",
                self.side
            ));
        }
        if self.kernel.is_multiple_of(2) {
            return Err(invalid!("kernel {} must be odd", self.kernel));
        }
        if self.channels1 == 0 || self.channels2 == 0 || self.d == 0 {
            return Err(invalid!("glyph channels and d must be positive"));
        }
        Ok(())
    }

    fn pooled_cells(&self) -> usize {
        (self.side / 4) * (self.side / 4)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Ids {
    conv1_w: ParamId,
    conv1_b: ParamId,
    conv2_w: ParamId,
    conv2_b: ParamId,
    proj_w: ParamId,
    proj_b: ParamId,
    log_inv_temp: ParamId,
}

/// Two conv + GELU + 2x2 average-pool blocks, then a linear map to `d`.
/// Also owns the learned contrastive temperature, stored as `ln(1/τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphEncoder {
    config: GlyphConfig,
    params: ParamStore,
    ids: Ids,
}

impl GlyphEncoder {
    /// Weights ~ N(0, 1/fan_in), biases 0, τ = [`DEFAULT_TEMPERATURE`].
    pub fn new(config: GlyphConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = |rows: usize, cols: usize| {
            let dist = Normal::new(0.0, (1.0 / rows as Scalar).sqrt()).expect("valid std");
            let data = (0..rows * cols).map(|_| dist.sample(&mut rng)).collect();
            Tensor::matrix(rows, cols, data).expect("shape product")
        };
        let kk = config.kernel * config.kernel;
        let (c1, c2) = (config.channels1, config.channels2);
        let mut p = ParamStore::new();
        let conv1_w = p.add("glyph.conv1.w", normal(kk, c1), true);
        let conv1_b = p.add("glyph.conv1.b", Tensor::zeros(&[c1]), false);
        let conv2_w = p.add("glyph.conv2.w", normal(kk * c1, c2), true);
        let conv2_b = p.add("glyph.conv2.b", Tensor::zeros(&[c2]), false);
        let proj_w = p.add(
            "glyph.proj.w",
            normal(config.pooled_cells() * c2, config.d),
            true,
        );
        let proj_b = p.add("glyph.proj.b", Tensor::zeros(&[config.d]), false);
        let log_inv_temp = p.add(
            "glyph.log_inv_temp",
            Tensor::scalar((1.0 / DEFAULT_TEMPERATURE).ln()),
            false,
        );
        Ok(Self {
            config,
            params: p,
            ids: Ids {
                conv1_w,
                conv1_b,
                conv2_w,
                conv2_b,
                proj_w,
                proj_b,
                log_inv_temp,
            },
        })
    }

    pub fn from_params(config: GlyphConfig, params: &ParamStore) -> Result<Self> {
        let mut model = Self::new(config, 0)?;
        model.params.load_from(params)?;
        Ok(model)
    }

    pub fn config(&self) -> &GlyphConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn temperature(&self) -> Scalar {
        (-self.params.get(self.ids.log_inv_temp).data()[0]).exp()
    }

    pub fn bind<'a>(&'a self, tape: &'a Tape) -> BoundGlyph<'a> {
        self.bind_vars(tape, self.params.bind(tape))
    }

    pub fn bind_frozen<'a>(&'a self, tape: &'a Tape) -> BoundGlyph<'a> {
        self.bind_vars(tape, self.params.bind_frozen(tape))
    }

    /// Uses caller-provided tape handles, aligned with [`GlyphEncoder::params`].
    pub fn bind_vars<'a>(&'a self, tape: &'a Tape, vars: Bound) -> BoundGlyph<'a> {
        BoundGlyph {
            model: self,
            tape,
            vars,
        }
    }
}

pub struct BoundGlyph<'a> {
    model: &'a GlyphEncoder,
    tape: &'a Tape,
    vars: Bound,
}

impl<'a> BoundGlyph<'a> {
    pub fn tape(&self) -> &'a Tape {
        self.tape
    }

    pub fn model(&self) -> &'a GlyphEncoder {
        self.model
    }

    pub fn bound(&self) -> &Bound {
        &self.vars
    }

    /// `ln(1/τ)` as a one-element tape value.
    pub fn log_inv_temp(&self) -> Var {
        self.vars.var(self.model.ids.log_inv_temp)
    }

    /// `[B, d]` features of `B` bitmaps, each `side × side` row-major.
    pub fn features(&self, bitmaps: &[Vec<Scalar>]) -> Result<Var> {
        let cfg = &self.model.config;
        let ids = &self.model.ids;
        let t = self.tape;
        let v = |id| self.vars.var(id);
        let side = cfg.side;
        if bitmaps.is_empty() {
            return Err(invalid!("no glyphs to encode"));
        }
        let mut rows = Vec::with_capacity(bitmaps.len());
        for bitmap in bitmaps {
            if bitmap.len() != side * side {
                return Err(invalid!(
                    "bitmap has {} pixels, expected {}",
                    bitmap.len(),
                    side * side
                ));
            }
            let x = t.constant(Tensor::matrix(side * side, 1, bitmap.clone())?);
            let h = t.im2col(x, side, side, cfg.kernel)?;
            let h = t.gelu(t.add_row(t.matmul(h, v(ids.conv1_w))?, v(ids.conv1_b))?)?;
            let h = t.avg_pool2(h, side, side)?;
            let half = side / 2;
            let h = t.im2col(h, half, half, cfg.kernel)?;
            let h = t.gelu(t.add_row(t.matmul(h, v(ids.conv2_w))?, v(ids.conv2_b))?)?;
            let h = t.avg_pool2(h, half, half)?;
            rows.push(t.reshape(h, vec![1, cfg.pooled_cells() * cfg.channels2])?);
        }
        let flat = if rows.len() == 1 {
            rows[0]
        } else {
            t.concat(&rows, 0)?
        };
        Ok(t.add_row(t.matmul(flat, v(ids.proj_w))?, v(ids.proj_b))?)
    }
}
