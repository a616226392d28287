use std::cell::{Ref, RefCell};
use std::sync::atomic::{AtomicU64, Ordering};

use super::kernels::{self, gemm, Layout};
use super::{Result, Scalar, Tensor, TensorError};

static NEXT_TAPE_ID: AtomicU64 = AtomicU64::new(1);

const LAYER_NORM_EPS: Scalar = 1e-5;
const NORMALIZE_EPS: Scalar = 1e-12;

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    tape: u64,
    idx: usize,
}

impl Var {
    pub fn tape_id(&self) -> u64 {
        self.tape
    }
}

#[derive(Clone, Copy, Debug)]
enum Broadcast {
    None,
    /// Left operand is a one-element tensor.
    Lhs,
    /// Right operand is a one-element tensor.
    Rhs,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul {
        a: usize,
        b: usize,
        trans_b: bool,
        m: usize,
        k: usize,
        n: usize,
    },
    Transpose {
        a: usize,
        rows: usize,
        cols: usize,
    },
    Add {
        a: usize,
        b: usize,
        bcast: Broadcast,
    },
    Sub {
        a: usize,
        b: usize,
    },
    Mul {
        a: usize,
        b: usize,
        bcast: Broadcast,
    },
    Scale {
        a: usize,
        factor: Scalar,
    },
    AddRow {
        a: usize,
        row: usize,
    },
    Concat {
        parts: Vec<(usize, usize)>,
        outer: usize,
        inner: usize,
    },
    Slice {
        a: usize,
        outer: usize,
        inner: usize,
        axis_len: usize,
        start: usize,
        end: usize,
    },
    Gather {
        table: usize,
        ids: Vec<usize>,
    },
    LayerNorm {
        x: usize,
        gamma: usize,
        beta: usize,
        xhat: Vec<Scalar>,
        rstd: Vec<Scalar>,
    },
    Gelu {
        a: usize,
    },
    Softmax {
        a: usize,
    },
    LogSoftmax {
        a: usize,
    },
    Sum {
        a: usize,
    },
    Mean {
        a: usize,
    },
    Dot {
        a: usize,
        b: usize,
    },
    CrossEntropy {
        logits: usize,
        targets: Vec<usize>,
        probs: Vec<Scalar>,
    },
    Softplus {
        a: usize,
    },
    Exp {
        a: usize,
    },
    Reshape {
        a: usize,
    },
    NormalizeRows {
        a: usize,
        norms: Vec<Scalar>,
    },
    Im2Col {
        a: usize,
        height: usize,
        width: usize,
        channels: usize,
        kernel: usize,
    },
    AvgPool2 {
        a: usize,
        height: usize,
        width: usize,
        channels: usize,
    },
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Records forward operations for reverse-mode differentiation.
///
/// Nodes are appended in execution order, which is also a topological
/// order; [`Tape::backward`] visits each node at most once, in reverse.
/// A tape is confined to one thread.
pub struct Tape {
    id: u64,
    nodes: RefCell<Vec<Node>>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

/// Gradients produced by [`Tape::backward`], indexed by [`Var`].
pub struct Grads {
    tape: u64,
    grads: Vec<Option<Tensor>>,
}

impl Grads {
    /// Gradient of the loss with respect to `v`, or `None` when `v` does
    /// not reach the loss or does not require gradients.
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        if v.tape != self.tape {
            return None;
        }
        self.grads.get(v.idx).and_then(|g| g.as_ref())
    }
}

impl Tape {
    pub fn new() -> Self {
        Self {
            id: NEXT_TAPE_ID.fetch_add(1, Ordering::Relaxed),
            nodes: RefCell::new(Vec::new()),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Leaf that receives a gradient.
    pub fn param(&self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Leaf excluded from differentiation.
    pub fn constant(&self, value: Tensor) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> Ref<'_, Tensor> {
        let idx = self.index(v).expect("variable recorded on another tape");
        Ref::map(self.nodes.borrow(), |n| &n[idx].value)
    }

    pub fn shape(&self, v: Var) -> Vec<usize> {
        self.value(v).shape().to_vec()
    }

    pub fn item(&self, v: Var) -> Result<Scalar> {
        self.index(v)?;
        self.value(v).item()
    }

    fn index(&self, v: Var) -> Result<usize> {
        if v.tape != self.id {
            return Err(TensorError::ForeignVar {
                var_tape: v.tape,
                tape: self.id,
            });
        }
        Ok(v.idx)
    }

    fn push(&self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var {
            tape: self.id,
            idx: nodes.len() - 1,
        }
    }

    fn needs_grad(&self, idx: &[usize]) -> bool {
        let nodes = self.nodes.borrow();
        idx.iter().any(|&i| nodes[i].requires_grad)
    }

    fn record(&self, value: Tensor, op: Op, parents: &[usize]) -> Var {
        let rg = self.needs_grad(parents);
        self.push(value, op, rg)
    }

    fn broadcast_mode(op: &'static str, a: &Tensor, b: &Tensor) -> Result<Broadcast> {
        if a.shape() == b.shape() {
            Ok(Broadcast::None)
        } else if b.numel() == 1 {
            Ok(Broadcast::Rhs)
        } else if a.numel() == 1 {
            Ok(Broadcast::Lhs)
        } else {
            Err(TensorError::ShapeMismatch {
                op,
                lhs: a.shape().to_vec(),
                rhs: b.shape().to_vec(),
            })
        }
    }

    fn binary_elementwise(
        &self,
        op: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(Scalar, Scalar) -> Scalar,
    ) -> Result<(Tensor, Broadcast, usize, usize)> {
        let (ia, ib) = (self.index(a)?, self.index(b)?);
        let nodes = self.nodes.borrow();
        let (ta, tb) = (&nodes[ia].value, &nodes[ib].value);
        let mode = Self::broadcast_mode(op, ta, tb)?;
        let out = match mode {
            Broadcast::None => Tensor {
                shape: ta.shape.clone(),
                data: ta
                    .data
                    .iter()
                    .zip(&tb.data)
                    .map(|(&x, &y)| f(x, y))
                    .collect(),
            },
            Broadcast::Rhs => {
                let s = tb.data[0];
                Tensor {
                    shape: ta.shape.clone(),
                    data: ta.data.iter().map(|&x| f(x, s)).collect(),
                }
            }
            Broadcast::Lhs => {
                let s = ta.data[0];
                Tensor {
                    shape: tb.shape.clone(),
                    data: tb.data.iter().map(|&y| f(s, y)).collect(),
                }
            }
        };
        Ok((out, mode, ia, ib))
    }

    /// Elementwise sum; one side may be a one-element tensor.
    pub fn add(&self, a: Var, b: Var) -> Result<Var> {
        let (out, bcast, ia, ib) = self.binary_elementwise("add", a, b, |x, y| x + y)?;
        Ok(self.record(
            out,
            Op::Add {
                a: ia,
                b: ib,
                bcast,
            },
            &[ia, ib],
        ))
    }

    /// Elementwise difference of same-shape tensors.
    pub fn sub(&self, a: Var, b: Var) -> Result<Var> {
        let (ia, ib) = (self.index(a)?, self.index(b)?);
        let out = {
            let nodes = self.nodes.borrow();
            let (ta, tb) = (&nodes[ia].value, &nodes[ib].value);
            if ta.shape != tb.shape {
                return Err(TensorError::ShapeMismatch {
                    op: "sub",
                    lhs: ta.shape.clone(),
                    rhs: tb.shape.clone(),
                });
            }
            Tensor {
                shape: ta.shape.clone(),
                data: ta.data.iter().zip(&tb.data).map(|(x, y)| x - y).collect(),
            }
        };
        Ok(self.record(out, Op::Sub { a: ia, b: ib }, &[ia, ib]))
    }

    /// Elementwise product; one side may be a one-element tensor.
    pub fn mul(&self, a: Var, b: Var) -> Result<Var> {
        let (out, bcast, ia, ib) = self.binary_elementwise("mul", a, b, |x, y| x * y)?;
        Ok(self.record(
            out,
            Op::Mul {
                a: ia,
                b: ib,
                bcast,
            },
            &[ia, ib],
        ))
    }

    pub fn scale(&self, a: Var, factor: Scalar) -> Result<Var> {
        let ia = self.index(a)?;
        let out = self.nodes.borrow()[ia].value.map(|x| x * factor);
        Ok(self.record(out, Op::Scale { a: ia, factor }, &[ia]))
    }

    fn matrix_dims(&self, op: &'static str, idx: usize) -> Result<(usize, usize)> {
        let nodes = self.nodes.borrow();
        match nodes[idx].value.shape() {
            &[r, c] => Ok((r, c)),
            s => Err(TensorError::Rank {
                op,
                expected: 2,
                got: s.to_vec(),
            }),
        }
    }

    fn matmul_impl(&self, a: Var, b: Var, trans_b: bool) -> Result<Var> {
        let (ia, ib) = (self.index(a)?, self.index(b)?);
        let (m, k) = self.matrix_dims("matmul", ia)?;
        let (br, bc) = self.matrix_dims("matmul", ib)?;
        let (kb, n) = if trans_b { (bc, br) } else { (br, bc) };
        if k != kb {
            let nodes = self.nodes.borrow();
            return Err(TensorError::ShapeMismatch {
                op: "matmul",
                lhs: nodes[ia].value.shape.clone(),
                rhs: nodes[ib].value.shape.clone(),
            });
        }
        let mut out = vec![0.0; m * n];
        {
            let nodes = self.nodes.borrow();
            let lb = if trans_b {
                Layout::Transposed
            } else {
                Layout::Normal
            };
            gemm(
                m,
                k,
                n,
                1.0,
                &nodes[ia].value.data,
                Layout::Normal,
                &nodes[ib].value.data,
                lb,
                0.0,
                &mut out,
            );
        }
        let value = Tensor {
            shape: vec![m, n],
            data: out,
        };
        Ok(self.record(
            value,
            Op::MatMul {
                a: ia,
                b: ib,
                trans_b,
                m,
                k,
                n,
            },
            &[ia, ib],
        ))
    }

    /// `[m, k] x [k, n] -> [m, n]`.
    pub fn matmul(&self, a: Var, b: Var) -> Result<Var> {
        self.matmul_impl(a, b, false)
    }

    /// `[m, k] x [n, k]^T -> [m, n]`.
    pub fn matmul_t(&self, a: Var, b: Var) -> Result<Var> {
        self.matmul_impl(a, b, true)
    }

    pub fn transpose(&self, a: Var) -> Result<Var> {
        let ia = self.index(a)?;
        let (rows, cols) = self.matrix_dims("transpose", ia)?;
        let data = {
            let nodes = self.nodes.borrow();
            let src = &nodes[ia].value.data;
            let mut t = vec![0.0; src.len()];
            for i in 0..rows {
                for j in 0..cols {
                    t[j * rows + i] = src[i * cols + j];
                }
            }
            t
        };
        let value = Tensor {
            shape: vec![cols, rows],
            data,
        };
        Ok(self.record(value, Op::Transpose { a: ia, rows, cols }, &[ia]))
    }

    /// Adds a `[n]` row vector to every row of a `[.., n]` tensor.
    pub fn add_row(&self, a: Var, row: Var) -> Result<Var> {
        let (ia, ir) = (self.index(a)?, self.index(row)?);
        let value = {
            let nodes = self.nodes.borrow();
            let (ta, tr) = (&nodes[ia].value, &nodes[ir].value);
            let n = ta.last_dim();
            if tr.rank() != 1 || tr.numel() != n || ta.rank() == 0 {
                return Err(TensorError::ShapeMismatch {
                    op: "add_row",
                    lhs: ta.shape.clone(),
                    rhs: tr.shape.clone(),
                });
            }
            let mut data = ta.data.clone();
            for chunk in data.chunks_mut(n) {
                for (x, &r) in chunk.iter_mut().zip(&tr.data) {
                    *x += r;
                }
            }
            Tensor {
                shape: ta.shape.clone(),
                data,
            }
        };
        Ok(self.record(value, Op::AddRow { a: ia, row: ir }, &[ia, ir]))
    }

    /// Concatenates along `axis`; all other extents must agree.
    pub fn concat(&self, parts: &[Var], axis: usize) -> Result<Var> {
        if parts.is_empty() {
            return Err(TensorError::Invalid {
                op: "concat",
                msg: "no inputs".into(),
            });
        }
        let idx: Vec<usize> = parts
            .iter()
            .map(|&p| self.index(p))
            .collect::<Result<_>>()?;
        let value;
        let mut part_info = Vec::with_capacity(idx.len());
        let (outer, inner);
        {
            let nodes = self.nodes.borrow();
            let first = &nodes[idx[0]].value;
            if axis >= first.rank() {
                return Err(TensorError::Rank {
                    op: "concat",
                    expected: axis + 1,
                    got: first.shape.clone(),
                });
            }
            outer = first.shape[..axis].iter().product::<usize>();
            inner = first.shape[axis + 1..].iter().product::<usize>();
            let mut total = 0;
            for &i in &idx {
                let s = &nodes[i].value.shape;
                let compatible = s.len() == first.rank()
                    && s[..axis] == first.shape[..axis]
                    && s[axis + 1..] == first.shape[axis + 1..];
                if !compatible {
                    return Err(TensorError::ShapeMismatch {
                        op: "concat",
                        lhs: first.shape.clone(),
                        rhs: s.clone(),
                    });
                }
                part_info.push((i, s[axis]));
                total += s[axis];
            }
            let mut data = Vec::with_capacity(outer * total * inner);
            for o in 0..outer {
                for &(i, len) in &part_info {
                    let block = len * inner;
                    data.extend_from_slice(&nodes[i].value.data[o * block..(o + 1) * block]);
                }
            }
            let mut shape = first.shape.clone();
            shape[axis] = total;
            value = Tensor { shape, data };
        }
        Ok(self.record(
            value,
            Op::Concat {
                parts: part_info,
                outer,
                inner,
            },
            &idx,
        ))
    }

    /// Stacks same-length vectors (or `[1, d]` rows) into `[n, d]`.
    pub fn stack_rows(&self, rows: &[Var]) -> Result<Var> {
        let reshaped: Vec<Var> = rows
            .iter()
            .map(|&r| {
                let n = self.value(r).numel();
                self.reshape(r, vec![1, n])
            })
            .collect::<Result<_>>()?;
        self.concat(&reshaped, 0)
    }

    /// Half-open range `[start, end)` along `axis`.
    pub fn slice(&self, a: Var, axis: usize, start: usize, end: usize) -> Result<Var> {
        let ia = self.index(a)?;
        let (value, outer, inner, axis_len) = {
            let nodes = self.nodes.borrow();
            let t = &nodes[ia].value;
            if axis >= t.rank() {
                return Err(TensorError::Rank {
                    op: "slice",
                    expected: axis + 1,
                    got: t.shape.clone(),
                });
            }
            let axis_len = t.shape[axis];
            if start > end || end > axis_len {
                return Err(TensorError::IndexOutOfRange {
                    op: "slice",
                    index: end,
                    extent: axis_len,
                });
            }
            let outer: usize = t.shape[..axis].iter().product();
            let inner: usize = t.shape[axis + 1..].iter().product();
            let mut data = Vec::with_capacity(outer * (end - start) * inner);
            for o in 0..outer {
                let base = o * axis_len * inner;
                data.extend_from_slice(&t.data[base + start * inner..base + end * inner]);
            }
            let mut shape = t.shape.clone();
            shape[axis] = end - start;
            (Tensor { shape, data }, outer, inner, axis_len)
        };
        Ok(self.record(
            value,
            Op::Slice {
                a: ia,
                outer,
                inner,
                axis_len,
                start,
                end,
            },
            &[ia],
        ))
    }

    /// Row `i` of a rank-2 tensor as a rank-1 vector.
    pub fn row(&self, a: Var, i: usize) -> Result<Var> {
        let r = self.slice(a, 0, i, i + 1)?;
        let n = self.value(r).numel();
        self.reshape(r, vec![n])
    }

    /// Gathers rows of a `[rows, d]` table: `[ids.len(), d]`.
    pub fn embedding_lookup(&self, table: Var, ids: &[usize]) -> Result<Var> {
        let it = self.index(table)?;
        let value = {
            let nodes = self.nodes.borrow();
            let t = &nodes[it].value;
            let (rows, d) = match t.shape() {
                &[r, d] => (r, d),
                s => {
                    return Err(TensorError::Rank {
                        op: "embedding_lookup",
                        expected: 2,
                        got: s.to_vec(),
                    })
                }
            };
            let mut data = Vec::with_capacity(ids.len() * d);
            for &id in ids {
                if id >= rows {
                    return Err(TensorError::IndexOutOfRange {
                        op: "embedding_lookup",
                        index: id,
                        extent: rows,
                    });
                }
                data.extend_from_slice(&t.data[id * d..(id + 1) * d]);
            }
            Tensor {
                shape: vec![ids.len(), d],
                data,
            }
        };
        Ok(self.record(
            value,
            Op::Gather {
                table: it,
                ids: ids.to_vec(),
            },
            &[it],
        ))
    }

    /// Normalizes over the last axis, then applies `gamma * x + beta`.
    pub fn layer_norm(&self, x: Var, gamma: Var, beta: Var) -> Result<Var> {
        let (ix, ig, ib) = (self.index(x)?, self.index(gamma)?, self.index(beta)?);
        let (value, xhat, rstd) = {
            let nodes = self.nodes.borrow();
            let (tx, tg, tb) = (&nodes[ix].value, &nodes[ig].value, &nodes[ib].value);
            let n = tx.last_dim();
            if tg.shape() != [n] || tb.shape() != [n] || tx.rank() == 0 {
                return Err(TensorError::ShapeMismatch {
                    op: "layer_norm",
                    lhs: tx.shape.clone(),
                    rhs: tg.shape.clone(),
                });
            }
            let rows = tx.numel() / n.max(1);
            let mut out = vec![0.0; tx.numel()];
            let mut xhat = vec![0.0; tx.numel()];
            let mut rstd = vec![0.0; rows];
            for r in 0..rows {
                let row = &tx.data[r * n..(r + 1) * n];
                let mean = row.iter().sum::<Scalar>() / n as Scalar;
                let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<Scalar>() / n as Scalar;
                let rs = 1.0 / (var + LAYER_NORM_EPS).sqrt();
                rstd[r] = rs;
                for j in 0..n {
                    let h = (row[j] - mean) * rs;
                    xhat[r * n + j] = h;
                    out[r * n + j] = h * tg.data[j] + tb.data[j];
                }
            }
            (
                Tensor {
                    shape: tx.shape.clone(),
                    data: out,
                },
                xhat,
                rstd,
            )
        };
        Ok(self.record(
            value,
            Op::LayerNorm {
                x: ix,
                gamma: ig,
                beta: ib,
                xhat,
                rstd,
            },
            &[ix, ig, ib],
        ))
    }

    fn unary(
        &self,
        a: Var,
        f: impl Fn(Scalar) -> Scalar,
        op: impl FnOnce(usize) -> Op,
    ) -> Result<Var> {
        let ia = self.index(a)?;
        let out = self.nodes.borrow()[ia].value.map(f);
        Ok(self.record(out, op(ia), &[ia]))
    }

    /// GELU, tanh approximation.
    pub fn gelu(&self, a: Var) -> Result<Var> {
        self.unary(a, kernels::gelu, |a| Op::Gelu { a })
    }

    pub fn exp(&self, a: Var) -> Result<Var> {
        self.unary(a, Scalar::exp, |a| Op::Exp { a })
    }

    /// `ln(1 + e^x)`, evaluated without overflow.
    pub fn softplus(&self, a: Var) -> Result<Var> {
        self.unary(a, kernels::softplus, |a| Op::Softplus { a })
    }

    fn rowwise(&self, a: Var, f: impl Fn(&[Scalar], &mut [Scalar])) -> Result<(Tensor, usize)> {
        let ia = self.index(a)?;
        let nodes = self.nodes.borrow();
        let t = &nodes[ia].value;
        let n = t.last_dim();
        let mut out = vec![0.0; t.numel()];
        if n > 0 {
            for (src, dst) in t.data.chunks(n).zip(out.chunks_mut(n)) {
                f(src, dst);
            }
        }
        Ok((
            Tensor {
                shape: t.shape.clone(),
                data: out,
            },
            ia,
        ))
    }

    /// Softmax over the last axis, with max subtraction.
    pub fn softmax_lastdim(&self, a: Var) -> Result<Var> {
        let (value, ia) = self.rowwise(a, kernels::softmax_row)?;
        Ok(self.record(value, Op::Softmax { a: ia }, &[ia]))
    }

    pub fn log_softmax_lastdim(&self, a: Var) -> Result<Var> {
        let (value, ia) = self.rowwise(a, |src, dst| {
            let lse = kernels::log_sum_exp(src);
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = s - lse;
            }
        })?;
        Ok(self.record(value, Op::LogSoftmax { a: ia }, &[ia]))
    }

    /// Divides each row (last axis) by its Euclidean norm.
    pub fn normalize_rows(&self, a: Var) -> Result<Var> {
        let ia = self.index(a)?;
        let (value, norms) = {
            let nodes = self.nodes.borrow();
            let t = &nodes[ia].value;
            let n = t.last_dim();
            let mut out = t.data.clone();
            let mut norms = Vec::with_capacity(t.numel() / n.max(1));
            for row in out.chunks_mut(n.max(1)) {
                let norm = (row.iter().map(|v| v * v).sum::<Scalar>() + NORMALIZE_EPS).sqrt();
                for v in row.iter_mut() {
                    *v /= norm;
                }
                norms.push(norm);
            }
            (
                Tensor {
                    shape: t.shape.clone(),
                    data: out,
                },
                norms,
            )
        };
        Ok(self.record(value, Op::NormalizeRows { a: ia, norms }, &[ia]))
    }

    pub fn sum(&self, a: Var) -> Result<Var> {
        let ia = self.index(a)?;
        let s: Scalar = self.nodes.borrow()[ia].value.data.iter().sum();
        Ok(self.record(Tensor::scalar(s), Op::Sum { a: ia }, &[ia]))
    }

    pub fn mean(&self, a: Var) -> Result<Var> {
        let ia = self.index(a)?;
        let m = {
            let nodes = self.nodes.borrow();
            let t = &nodes[ia].value;
            if t.numel() == 0 {
                return Err(TensorError::Invalid {
                    op: "mean",
                    msg: "empty tensor".into(),
                });
            }
            t.data.iter().sum::<Scalar>() / t.numel() as Scalar
        };
        Ok(self.record(Tensor::scalar(m), Op::Mean { a: ia }, &[ia]))
    }

    /// Sum of elementwise products of two same-shape tensors.
    pub fn dot(&self, a: Var, b: Var) -> Result<Var> {
        let (ia, ib) = (self.index(a)?, self.index(b)?);
        let s = {
            let nodes = self.nodes.borrow();
            let (ta, tb) = (&nodes[ia].value, &nodes[ib].value);
            if ta.shape != tb.shape {
                return Err(TensorError::ShapeMismatch {
                    op: "dot",
                    lhs: ta.shape.clone(),
                    rhs: tb.shape.clone(),
                });
            }
            ta.data
                .iter()
                .zip(&tb.data)
                .map(|(x, y)| x * y)
                .sum::<Scalar>()
        };
        Ok(self.record(Tensor::scalar(s), Op::Dot { a: ia, b: ib }, &[ia, ib]))
    }

    /// Mean over rows of `-log_softmax(logits)[target]`, via log-sum-exp.
    pub fn cross_entropy(&self, logits: Var, targets: &[usize]) -> Result<Var> {
        let il = self.index(logits)?;
        let (loss, probs) = {
            let nodes = self.nodes.borrow();
            let t = &nodes[il].value;
            let (rows, classes) = match t.shape() {
                &[r, c] => (r, c),
                &[c] => (1, c),
                s => {
                    return Err(TensorError::Rank {
                        op: "cross_entropy",
                        expected: 2,
                        got: s.to_vec(),
                    })
                }
            };
            if targets.len() != rows || rows == 0 {
                return Err(TensorError::Invalid {
                    op: "cross_entropy",
                    msg: format!("{} targets for {} rows", targets.len(), rows),
                });
            }
            let mut probs = vec![0.0; rows * classes];
            let mut total = 0.0;
            for (r, &target) in targets.iter().enumerate() {
                if target >= classes {
                    return Err(TensorError::IndexOutOfRange {
                        op: "cross_entropy",
                        index: target,
                        extent: classes,
                    });
                }
                let row = &t.data[r * classes..(r + 1) * classes];
                let lse = kernels::log_sum_exp(row);
                total += lse - row[target];
                for (p, &x) in probs[r * classes..(r + 1) * classes].iter_mut().zip(row) {
                    *p = (x - lse).exp();
                }
            }
            (total / rows as Scalar, probs)
        };
        Ok(self.record(
            Tensor::scalar(loss),
            Op::CrossEntropy {
                logits: il,
                targets: targets.to_vec(),
                probs,
            },
            &[il],
        ))
    }

    pub fn reshape(&self, a: Var, shape: Vec<usize>) -> Result<Var> {
        let ia = self.index(a)?;
        let value = self.nodes.borrow()[ia].value.clone().reshaped(shape)?;
        Ok(self.record(value, Op::Reshape { a: ia }, &[ia]))
    }

    /// Same-padded `kernel x kernel` patch extraction for a feature map
    /// stored as `[height * width, channels]`; yields
    /// `[height * width, channels * kernel * kernel]`.
    pub fn im2col(&self, a: Var, height: usize, width: usize, kernel: usize) -> Result<Var> {
        let ia = self.index(a)?;
        if kernel.is_multiple_of(2) {
            return Err(TensorError::Invalid {
                op: "im2col",
                msg: format!("kernel {kernel} must be odd"),
            });
        }
        let (value, channels) = {
            let nodes = self.nodes.borrow();
            let t = &nodes[ia].value;
            let channels = match t.shape() {
                &[p, c] if p == height * width => c,
                s => {
                    return Err(TensorError::ShapeMismatch {
                        op: "im2col",
                        lhs: s.to_vec(),
                        rhs: vec![height * width, 0],
                    })
                }
            };
            let kk = kernel * kernel;
            let cols = channels * kk;
            let mut out = vec![0.0; height * width * cols];
            for_each_patch(height, width, kernel, |p, src, tap| {
                for c in 0..channels {
                    out[p * cols + c * kk + tap] = t.data[src * channels + c];
                }
            });
            (
                Tensor {
                    shape: vec![height * width, cols],
                    data: out,
                },
                channels,
            )
        };
        Ok(self.record(
            value,
            Op::Im2Col {
                a: ia,
                height,
                width,
                channels,
                kernel,
            },
            &[ia],
        ))
    }

    /// 2x2 average pooling over a `[height * width, channels]` feature map.
    pub fn avg_pool2(&self, a: Var, height: usize, width: usize) -> Result<Var> {
        let ia = self.index(a)?;
        if !height.is_multiple_of(2) || !width.is_multiple_of(2) {
            return Err(TensorError::Invalid {
                op: "avg_pool2",
                msg: format!("extent {height}x{width} must be even"),
            });
        }
        let (value, channels) = {
            let nodes = self.nodes.borrow();
            let t = &nodes[ia].value;
            let channels = match t.shape() {
                &[p, c] if p == height * width => c,
                s => {
                    return Err(TensorError::ShapeMismatch {
                        op: "avg_pool2",
                        lhs: s.to_vec(),
                        rhs: vec![height * width, 0],
                    })
                }
            };
            let (oh, ow) = (height / 2, width / 2);
            let mut out = vec![0.0; oh * ow * channels];
            for i in 0..height {
                for j in 0..width {
                    let dst = (i / 2) * ow + j / 2;
                    for c in 0..channels {
                        out[dst * channels + c] += 0.25 * t.data[(i * width + j) * channels + c];
                    }
                }
            }
            (
                Tensor {
                    shape: vec![oh * ow, channels],
                    data: out,
                },
                channels,
            )
        };
        Ok(self.record(
            value,
            Op::AvgPool2 {
                a: ia,
                height,
                width,
                channels,
            },
            &[ia],
        ))
    }

    /// Reverse sweep from a scalar loss.
    pub fn backward(&self, loss: Var) -> Result<Grads> {
        let li = self.index(loss)?;
        let nodes = self.nodes.borrow();
        if !nodes[li].value.is_scalar() {
            return Err(TensorError::NonScalarLoss(nodes[li].value.shape.clone()));
        }
        let mut grads: Vec<Option<Vec<Scalar>>> = Vec::new();
        grads.resize_with(nodes.len(), || None);
        grads[li] = Some(vec![1.0]);

        for i in (0..=li).rev() {
            let Some(g) = grads[i].take() else { continue };
            if nodes[i].requires_grad {
                propagate(&nodes, i, &g, &mut grads);
            }
            grads[i] = Some(g);
        }

        let grads = grads
            .into_iter()
            .zip(nodes.iter())
            .map(|(g, node)| {
                g.filter(|_| node.requires_grad).map(|data| Tensor {
                    shape: node.value.shape.clone(),
                    data,
                })
            })
            .collect();
        Ok(Grads {
            tape: self.id,
            grads,
        })
    }
}

fn for_each_patch(
    height: usize,
    width: usize,
    kernel: usize,
    mut f: impl FnMut(usize, usize, usize),
) {
    let pad = (kernel / 2) as isize;
    for i in 0..height {
        for j in 0..width {
            let p = i * width + j;
            for di in 0..kernel {
                let si = i as isize + di as isize - pad;
                if si < 0 || si >= height as isize {
                    continue;
                }
                for dj in 0..kernel {
                    let sj = j as isize + dj as isize - pad;
                    if sj < 0 || sj >= width as isize {
                        continue;
                    }
                    f(p, si as usize * width + sj as usize, di * kernel + dj);
                }
            }
        }
    }
}

/// Adds into the gradient buffer of `target` when it requires one.
fn accumulate(
    nodes: &[Node],
    grads: &mut [Option<Vec<Scalar>>],
    target: usize,
    f: impl FnOnce(&mut [Scalar]),
) {
    if !nodes[target].requires_grad {
        return;
    }
    let buf = grads[target].get_or_insert_with(|| vec![0.0; nodes[target].value.numel()]);
    f(buf);
}

fn propagate(nodes: &[Node], i: usize, g: &[Scalar], grads: &mut [Option<Vec<Scalar>>]) {
    let out = &nodes[i].value;
    match &nodes[i].op {
        Op::Leaf => {}
        &Op::MatMul {
            a,
            b,
            trans_b,
            m,
            k,
            n,
        } => {
            let (va, vb) = (&nodes[a].value.data, &nodes[b].value.data);
            accumulate(nodes, grads, a, |buf| {
                let lb = if trans_b {
                    Layout::Normal
                } else {
                    Layout::Transposed
                };
                gemm(m, n, k, 1.0, g, Layout::Normal, vb, lb, 1.0, buf);
            });
            accumulate(nodes, grads, b, |buf| {
                if trans_b {
                    gemm(
                        n,
                        m,
                        k,
                        1.0,
                        g,
                        Layout::Transposed,
                        va,
                        Layout::Normal,
                        1.0,
                        buf,
                    );
                } else {
                    gemm(
                        k,
                        m,
                        n,
                        1.0,
                        va,
                        Layout::Transposed,
                        g,
                        Layout::Normal,
                        1.0,
                        buf,
                    );
                }
            });
        }
        &Op::Transpose { a, rows, cols } => accumulate(nodes, grads, a, |buf| {
            for i in 0..rows {
                for j in 0..cols {
                    buf[i * cols + j] += g[j * rows + i];
                }
            }
        }),
        &Op::Add { a, b, bcast } => {
            for (side, scalar_side) in [(a, Broadcast::Lhs), (b, Broadcast::Rhs)] {
                let reduce = matches!(
                    (bcast, scalar_side),
                    (Broadcast::Lhs, Broadcast::Lhs) | (Broadcast::Rhs, Broadcast::Rhs)
                );
                accumulate(nodes, grads, side, |buf| {
                    if reduce {
                        buf[0] += g.iter().sum::<Scalar>();
                    } else {
                        add_assign(buf, g);
                    }
                });
            }
        }
        &Op::Sub { a, b } => {
            accumulate(nodes, grads, a, |buf| add_assign(buf, g));
            accumulate(nodes, grads, b, |buf| {
                for (x, &gv) in buf.iter_mut().zip(g) {
                    *x -= gv;
                }
            });
        }
        &Op::Mul { a, b, bcast } => {
            let (va, vb) = (&nodes[a].value.data, &nodes[b].value.data);
            match bcast {
                Broadcast::None => {
                    accumulate(nodes, grads, a, |buf| {
                        for ((x, &gv), &y) in buf.iter_mut().zip(g).zip(vb) {
                            *x += gv * y;
                        }
                    });
                    accumulate(nodes, grads, b, |buf| {
                        for ((x, &gv), &y) in buf.iter_mut().zip(g).zip(va) {
                            *x += gv * y;
                        }
                    });
                }
                Broadcast::Rhs => {
                    let s = vb[0];
                    accumulate(nodes, grads, a, |buf| {
                        for (x, &gv) in buf.iter_mut().zip(g) {
                            *x += gv * s;
                        }
                    });
                    accumulate(nodes, grads, b, |buf| {
                        buf[0] += g.iter().zip(va).map(|(gv, y)| gv * y).sum::<Scalar>();
                    });
                }
                Broadcast::Lhs => {
                    let s = va[0];
                    accumulate(nodes, grads, a, |buf| {
                        buf[0] += g.iter().zip(vb).map(|(gv, y)| gv * y).sum::<Scalar>();
                    });
                    accumulate(nodes, grads, b, |buf| {
                        for (x, &gv) in buf.iter_mut().zip(g) {
                            *x += gv * s;
                        }
                    });
                }
            }
        }
        &Op::Scale { a, factor } => accumulate(nodes, grads, a, |buf| {
            for (x, &gv) in buf.iter_mut().zip(g) {
                *x += gv * factor;
            }
        }),
        &Op::AddRow { a, row } => {
            accumulate(nodes, grads, a, |buf| add_assign(buf, g));
            let n = nodes[row].value.numel();
            accumulate(nodes, grads, row, |buf| {
                for chunk in g.chunks(n) {
                    add_assign(buf, chunk);
                }
            });
        }
        Op::Concat {
            parts,
            outer,
            inner,
        } => {
            let total: usize = parts.iter().map(|p| p.1).sum();
            let mut offset = 0;
            for &(p, len) in parts {
                accumulate(nodes, grads, p, |buf| {
                    for o in 0..*outer {
                        let src = o * total * inner + offset * inner;
                        let dst = o * len * inner;
                        add_assign(&mut buf[dst..dst + len * inner], &g[src..src + len * inner]);
                    }
                });
                offset += len;
            }
        }
        &Op::Slice {
            a,
            outer,
            inner,
            axis_len,
            start,
            end,
        } => accumulate(nodes, grads, a, |buf| {
            let w = (end - start) * inner;
            for o in 0..outer {
                let dst = o * axis_len * inner + start * inner;
                add_assign(&mut buf[dst..dst + w], &g[o * w..(o + 1) * w]);
            }
        }),
        Op::Gather { table, ids } => {
            let d = nodes[*table].value.last_dim();
            accumulate(nodes, grads, *table, |buf| {
                for (r, &id) in ids.iter().enumerate() {
                    add_assign(&mut buf[id * d..(id + 1) * d], &g[r * d..(r + 1) * d]);
                }
            });
        }
        Op::LayerNorm {
            x,
            gamma,
            beta,
            xhat,
            rstd,
        } => {
            let n = out.last_dim();
            let gam = &nodes[*gamma].value.data;
            accumulate(nodes, grads, *gamma, |buf| {
                for (gr, hr) in g.chunks(n).zip(xhat.chunks(n)) {
                    for j in 0..n {
                        buf[j] += gr[j] * hr[j];
                    }
                }
            });
            accumulate(nodes, grads, *beta, |buf| {
                for gr in g.chunks(n) {
                    add_assign(buf, gr);
                }
            });
            accumulate(nodes, grads, *x, |buf| {
                for (r, (gr, hr)) in g.chunks(n).zip(xhat.chunks(n)).enumerate() {
                    let mut mean_dh = 0.0;
                    let mut mean_dh_h = 0.0;
                    for j in 0..n {
                        let dh = gr[j] * gam[j];
                        mean_dh += dh;
                        mean_dh_h += dh * hr[j];
                    }
                    mean_dh /= n as Scalar;
                    mean_dh_h /= n as Scalar;
                    for j in 0..n {
                        let dh = gr[j] * gam[j];
                        buf[r * n + j] += rstd[r] * (dh - mean_dh - hr[j] * mean_dh_h);
                    }
                }
            });
        }
        &Op::Gelu { a } => {
            let va = &nodes[a].value.data;
            accumulate(nodes, grads, a, |buf| {
                for ((x, &gv), &v) in buf.iter_mut().zip(g).zip(va) {
                    *x += gv * kernels::gelu_grad(v);
                }
            });
        }
        &Op::Exp { a } => accumulate(nodes, grads, a, |buf| {
            for ((x, &gv), &y) in buf.iter_mut().zip(g).zip(&out.data) {
                *x += gv * y;
            }
        }),
        &Op::Softplus { a } => {
            let va = &nodes[a].value.data;
            accumulate(nodes, grads, a, |buf| {
                for ((x, &gv), &v) in buf.iter_mut().zip(g).zip(va) {
                    *x += gv * kernels::sigmoid(v);
                }
            });
        }
        &Op::Softmax { a } => {
            let n = out.last_dim();
            accumulate(nodes, grads, a, |buf| {
                for ((br, gr), yr) in buf.chunks_mut(n).zip(g.chunks(n)).zip(out.data.chunks(n)) {
                    let dot: Scalar = gr.iter().zip(yr).map(|(a, b)| a * b).sum();
                    for j in 0..n {
                        br[j] += yr[j] * (gr[j] - dot);
                    }
                }
            });
        }
        &Op::LogSoftmax { a } => {
            let n = out.last_dim();
            accumulate(nodes, grads, a, |buf| {
                for ((br, gr), yr) in buf.chunks_mut(n).zip(g.chunks(n)).zip(out.data.chunks(n)) {
                    let total: Scalar = gr.iter().sum();
                    for j in 0..n {
                        br[j] += gr[j] - yr[j].exp() * total;
                    }
                }
            });
        }
        &Op::NormalizeRows { a, ref norms } => {
            let n = out.last_dim().max(1);
            accumulate(nodes, grads, a, |buf| {
                for (r, ((br, gr), yr)) in buf
                    .chunks_mut(n)
                    .zip(g.chunks(n))
                    .zip(out.data.chunks(n))
                    .enumerate()
                {
                    let dot: Scalar = gr.iter().zip(yr).map(|(a, b)| a * b).sum();
                    for j in 0..n {
                        br[j] += (gr[j] - yr[j] * dot) / norms[r];
                    }
                }
            });
        }
        &Op::Sum { a } => accumulate(nodes, grads, a, |buf| {
            for x in buf.iter_mut() {
                *x += g[0];
            }
        }),
        &Op::Mean { a } => accumulate(nodes, grads, a, |buf| {
            let share = g[0] / buf.len() as Scalar;
            for x in buf.iter_mut() {
                *x += share;
            }
        }),
        &Op::Dot { a, b } => {
            let (va, vb) = (&nodes[a].value.data, &nodes[b].value.data);
            accumulate(nodes, grads, a, |buf| {
                for (x, &y) in buf.iter_mut().zip(vb) {
                    *x += g[0] * y;
                }
            });
            accumulate(nodes, grads, b, |buf| {
                for (x, &y) in buf.iter_mut().zip(va) {
                    *x += g[0] * y;
                }
            });
        }
        Op::CrossEntropy {
            logits,
            targets,
            probs,
        } => {
            let rows = targets.len();
            let classes = probs.len() / rows;
            let share = g[0] / rows as Scalar;
            accumulate(nodes, grads, *logits, |buf| {
                for (r, &t) in targets.iter().enumerate() {
                    for c in 0..classes {
                        let onehot = if c == t { 1.0 } else { 0.0 };
                        buf[r * classes + c] += share * (probs[r * classes + c] - onehot);
                    }
                }
            });
        }
        &Op::Reshape { a } => accumulate(nodes, grads, a, |buf| add_assign(buf, g)),
        &Op::Im2Col {
            a,
            height,
            width,
            channels,
            kernel,
        } => {
            let kk = kernel * kernel;
            let cols = channels * kk;
            accumulate(nodes, grads, a, |buf| {
                for_each_patch(height, width, kernel, |p, src, tap| {
                    for c in 0..channels {
                        buf[src * channels + c] += g[p * cols + c * kk + tap];
                    }
                });
            });
        }
        &Op::AvgPool2 {
            a,
            height,
            width,
            channels,
        } => {
            let ow = width / 2;
            accumulate(nodes, grads, a, |buf| {
                for i in 0..height {
                    for j in 0..width {
                        let src = (i / 2) * ow + j / 2;
                        for c in 0..channels {
                            buf[(i * width + j) * channels + c] += 0.25 * g[src * channels + c];
                        }
                    }
                }
            });
        }
    }
}

fn add_assign(dst: &mut [Scalar], src: &[Scalar]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_var(tape: &Tape, v: &[f64]) -> Var {
        tape.param(Tensor::vector(v.to_vec()))
    }

    #[test]
    fn softmax_uniform_and_overflow_safe() {
        let tape = Tape::new();
        let x = vec_var(&tape, &[0.0, 0.0, 0.0]);
        let y = tape.softmax_lastdim(x).unwrap();
        for &p in tape.value(y).data() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        let x = vec_var(&tape, &[1000.0, 1000.0]);
        let y = tape.softmax_lastdim(x).unwrap();
        assert_eq!(tape.value(y).data(), &[0.5, 0.5]);
    }

    #[test]
    fn dot_arithmetic() {
        let tape = Tape::new();
        let a = vec_var(&tape, &[1.0, 2.0]);
        let b = vec_var(&tape, &[3.0, 4.0]);
        let d = tape.dot(a, b).unwrap();
        assert_eq!(tape.item(d).unwrap(), 11.0);
    }

    #[test]
    fn cross_entropy_closed_forms() {
        let tape = Tape::new();
        let x = tape.param(Tensor::matrix(1, 3, vec![0.0; 3]).unwrap());
        let l = tape.cross_entropy(x, &[0]).unwrap();
        assert!((tape.item(l).unwrap() - 3f64.ln()).abs() < 1e-12);

        let x = tape.param(Tensor::matrix(1, 2, vec![30.0, -30.0]).unwrap());
        let l = tape.cross_entropy(x, &[0]).unwrap();
        assert!(tape.item(l).unwrap() < 1e-20);
    }

    #[test]
    fn cross_entropy_rejects_bad_target() {
        let tape = Tape::new();
        let x = tape.param(Tensor::matrix(1, 3, vec![0.0; 3]).unwrap());
        assert!(matches!(
            tape.cross_entropy(x, &[3]),
            Err(TensorError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn linear_and_mean_gradients() {
        let tape = Tape::new();
        let w = vec_var(&tape, &[0.5, -1.5, 2.0]);
        let x = tape.constant(Tensor::vector(vec![3.0, 1.0, -2.0]));
        let loss = tape.dot(w, x).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(w).unwrap().data(), &[3.0, 1.0, -2.0]);
        assert!(grads.get(x).is_none());

        let tape = Tape::new();
        let w = vec_var(&tape, &[1.0, 2.0, 3.0, 4.0]);
        let loss = tape.mean(w).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(w).unwrap().data(), &[0.25; 4]);
    }

    #[test]
    fn unreachable_leaf_has_no_gradient() {
        let tape = Tape::new();
        let w = vec_var(&tape, &[1.0]);
        let unused = vec_var(&tape, &[2.0]);
        let loss = tape.sum(w).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert!(grads.get(unused).is_none());
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let tape = Tape::new();
        let w = vec_var(&tape, &[1.0, 2.0]);
        assert!(matches!(
            tape.backward(w),
            Err(TensorError::NonScalarLoss(_))
        ));
    }

    #[test]
    fn foreign_var_is_rejected() {
        let t1 = Tape::new();
        let t2 = Tape::new();
        let a = vec_var(&t1, &[1.0]);
        let b = vec_var(&t2, &[1.0]);
        assert!(matches!(t2.add(a, b), Err(TensorError::ForeignVar { .. })));
    }

    #[test]
    fn no_silent_broadcast() {
        let tape = Tape::new();
        let a = tape.param(Tensor::zeros(&[2, 3]));
        let b = tape.param(Tensor::zeros(&[3]));
        assert!(matches!(
            tape.add(a, b),
            Err(TensorError::ShapeMismatch { .. })
        ));
        let s = tape.param(Tensor::scalar(2.0));
        assert!(tape.mul(a, s).is_ok());
    }

    #[test]
    fn concat_and_slice_round_trip() {
        let tape = Tape::new();
        let a = tape.param(Tensor::matrix(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        let b = tape.param(Tensor::matrix(2, 1, vec![5.0, 6.0]).unwrap());
        let c = tape.concat(&[a, b], 1).unwrap();
        assert_eq!(tape.value(c).data(), &[1.0, 2.0, 5.0, 3.0, 4.0, 6.0]);
        let s = tape.slice(c, 1, 1, 3).unwrap();
        assert_eq!(tape.value(s).data(), &[2.0, 5.0, 4.0, 6.0]);
    }

    #[test]
    fn im2col_center_tap_is_identity() {
        let tape = Tape::new();
        let x = tape.param(Tensor::matrix(4, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        let cols = tape.im2col(x, 2, 2, 3).unwrap();
        let v = tape.value(cols);
        assert_eq!(v.shape(), &[4, 9]);
        for p in 0..4 {
            assert_eq!(v.row(p)[4], (p + 1) as f64);
        }
        // top-left pixel has no upper or left neighbours
        assert_eq!(&v.row(0)[..4], &[0.0, 0.0, 0.0, 0.0]);
    }
}
