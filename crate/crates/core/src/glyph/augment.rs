use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::tensor::Scalar;

pub const ROTATIONS: [i32; 3] = [-10, 0, 10];
pub const SCALES: [Scalar; 2] = [0.9, 1.0];
/// Largest horizontal shear factor drawn by [`GlyphAugmentation::sample`].
pub const MAX_SHEAR: Scalar = 0.15;

/// A geometric distortion of a glyph about its center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlyphAugmentation {
    /// Degrees, one of [`ROTATIONS`].
    pub rotation: i32,
    /// One of [`SCALES`].
    pub scale: Scalar,
    /// Horizontal shear factor: `x' = x + shear * y`.
    pub shear: Option<Scalar>,
}

impl Default for GlyphAugmentation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl GlyphAugmentation {
    pub const IDENTITY: Self = Self {
        rotation: 0,
        scale: 1.0,
        shear: None,
    };

    pub fn new(rotation: i32, scale: Scalar, shear: Option<Scalar>) -> Result<Self> {
        if !ROTATIONS.contains(&rotation) {
            return Err(invalid!("rotation {rotation} is not one of {ROTATIONS:?}"));
        }
        if !SCALES.contains(&scale) {
            return Err(invalid!("scale {scale} is not one of {SCALES:?}"));
        }
        if let Some(s) = shear {
            if !s.is_finite() || s.abs() > 1.0 {
                return Err(invalid!("shear {s} must lie in [-1, 1]"));
            }
        }
        Ok(Self {
            rotation,
            scale,
            shear,
        })
    }

    /// Uniform rotation and scale; shear is applied half the time.
    pub fn sample(rng: &mut impl Rng) -> Self {
        let rotation = ROTATIONS[rng.random_range(0..ROTATIONS.len())];
        let scale = SCALES[rng.random_range(0..SCALES.len())];
        let shear = rng
            .random_bool(0.5)
            .then(|| rng.random_range(-MAX_SHEAR..=MAX_SHEAR));
        Self {
            rotation,
            scale,
            shear,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rotation == 0 && self.scale == 1.0 && self.shear.is_none_or(|s| s == 0.0)
    }

    /// Warps a `side × side` bitmap. Each output pixel samples the source
    /// bilinearly at the inverse-mapped location; outside pixels read 0 and
    /// results are clamped to `[0, 1]`.
    pub fn apply(&self, bitmap: &[Scalar], side: usize) -> Vec<Scalar> {
        assert_eq!(bitmap.len(), side * side, "bitmap is not side x side");
        if self.is_identity() {
            return bitmap.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        }
        let (sin, cos) = (self.rotation as Scalar).to_radians().sin_cos();
        let shear = self.shear.unwrap_or(0.0);
        let c = (side as Scalar - 1.0) / 2.0;
        let at = |y: isize, x: isize| -> Scalar {
            if y < 0 || x < 0 || y >= side as isize || x >= side as isize {
                0.0
            } else {
                bitmap[y as usize * side + x as usize]
            }
        };
        let mut out = vec![0.0; side * side];
        for i in 0..side {
            for j in 0..side {
                // Forward map: shear, then rotate, then scale. Invert in reverse order.
                let (u, v) = (
                    (j as Scalar - c) / self.scale,
                    (i as Scalar - c) / self.scale,
                );
                let (u, v) = (cos * u + sin * v, -sin * u + cos * v);
                let (x, y) = (u - shear * v + c, v + c);
                let (x0, y0) = (x.floor(), y.floor());
                let (fx, fy) = (x - x0, y - y0);
                let (x0, y0) = (x0 as isize, y0 as isize);
                let top = at(y0, x0) * (1.0 - fx) + at(y0, x0 + 1) * fx;
                let bottom = at(y0 + 1, x0) * (1.0 - fx) + at(y0 + 1, x0 + 1) * fx;
                out[i * side + j] = (top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0);
            }
        }
        out
    }
}
