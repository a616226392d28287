//! Dense row-major tensors and a tape-based reverse-mode autodiff engine.
//!
//! Values live in [`Tensor`]. Differentiable computation is recorded on a
//! [`Tape`]: every forward op appends a node, and [`Tape::backward`] walks the
//! nodes once in reverse recording order. Model parameters are owned by a
//! [`ParamStore`] and bound onto a fresh tape for each optimization step.
//!
//! ```
//! use cdbert::tensor::{Tape, Tensor};
//!
//! let tape = Tape::new();
//! let w = tape.param(Tensor::from_vec(vec![2], vec![1.0, -2.0]).unwrap());
//! let x = tape.constant(Tensor::from_vec(vec![2], vec![3.0, 4.0]).unwrap());
//! let loss = tape.dot(w, x).unwrap();
//! let grads = tape.backward(loss).unwrap();
//! assert_eq!(grads.get(w).unwrap().data(), &[3.0, 4.0]);
//! ```

mod checkpoint;
pub mod gradcheck;
mod kernels;
mod optim;
mod params;
mod tape;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint,
    CheckpointError,
};
pub use optim::{AdamState, AdamW, LinearWarmup};
pub use params::{Bound, Param, ParamId, ParamStore};
pub use tape::{Grads, Tape, Var};

use thiserror::Error;

/// Element type for all tensor storage.
///
/// Storage is 64-bit so that central finite differences at `eps = 1e-3`
/// resolve gradients well below the `1e-4` relative tolerance.
pub type Scalar = f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("{op} expects rank {expected}, got shape {got:?}")]
    Rank {
        op: &'static str,
        expected: usize,
        got: Vec<usize>,
    },
    #[error("data length {len} does not match shape {shape:?}")]
    DataLength { shape: Vec<usize>, len: usize },
    #[error("index {index} out of range for extent {extent} in {op}")]
    IndexOutOfRange {
        op: &'static str,
        index: usize,
        extent: usize,
    },
    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("variable belongs to tape {var_tape}, not tape {tape}")]
    ForeignVar { var_tape: u64, tape: u64 },
    #[error("invalid argument to {op}: {msg}")]
    Invalid { op: &'static str, msg: String },
}

pub type Result<T, E = TensorError> = std::result::Result<T, E>;

/// Dense tensor with contiguous row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<Scalar>,
}

impl Tensor {
    pub fn from_vec(shape: Vec<usize>, data: Vec<Scalar>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TensorError::DataLength {
                shape,
                len: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn full(shape: &[usize], value: Scalar) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![value; shape.iter().product()],
        }
    }

    /// Rank-0 tensor holding one value.
    pub fn scalar(value: Scalar) -> Self {
        Self {
            shape: Vec::new(),
            data: vec![value],
        }
    }

    pub fn vector(data: Vec<Scalar>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<Scalar>) -> Result<Self> {
        Self::from_vec(vec![rows, cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Scalar] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Scalar> {
        self.data
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1 && self.shape.iter().all(|&e| e == 1)
    }

    /// The single value of a one-element tensor.
    pub fn item(&self) -> Result<Scalar> {
        if self.is_scalar() {
            Ok(self.data[0])
        } else {
            Err(TensorError::NonScalarLoss(self.shape.clone()))
        }
    }

    /// Extent of the last axis (1 for rank-0 tensors).
    pub fn last_dim(&self) -> usize {
        self.shape.last().copied().unwrap_or(1)
    }

    /// Row `i` of a rank-2 tensor.
    pub fn row(&self, i: usize) -> &[Scalar] {
        let cols = self.last_dim();
        &self.data[i * cols..(i + 1) * cols]
    }

    pub fn reshaped(mut self, shape: Vec<usize>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != self.data.len() {
            return Err(TensorError::DataLength {
                shape,
                len: self.data.len(),
            });
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(Scalar) -> Scalar) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> Scalar {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
