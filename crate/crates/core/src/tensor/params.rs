use super::{Grads, Result, Tape, Tensor, TensorError, Var};

/// Index of a parameter inside its [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Tensor,
    /// Whether AdamW applies weight decay to this parameter.
    pub decay: bool,
}

/// Named parameters in registration order.
///
/// Registration order fixes checkpoint layout and optimizer state order, so
/// two stores built by the same code are laid out identically.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    params: Vec<Param>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor, decay: bool) -> ParamId {
        let name = name.into();
        debug_assert!(self.find(&name).is_none(), "duplicate parameter {name}");
        self.params.push(Param { name, value, decay });
        ParamId(self.params.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].value
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.params[id.0].value
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Param> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Param> {
        self.params.iter_mut()
    }

    /// Total number of scalar parameters.
    pub fn numel(&self) -> usize {
        self.params.iter().map(|p| p.value.numel()).sum()
    }

    /// Registers every parameter as a gradient-carrying leaf on `tape`.
    pub fn bind(&self, tape: &Tape) -> Bound {
        Bound {
            vars: self
                .params
                .iter()
                .map(|p| tape.param(p.value.clone()))
                .collect(),
        }
    }

    /// Registers every parameter as a constant leaf (no gradients).
    pub fn bind_frozen(&self, tape: &Tape) -> Bound {
        Bound {
            vars: self
                .params
                .iter()
                .map(|p| tape.constant(p.value.clone()))
                .collect(),
        }
    }

    /// Gradients aligned with registration order; parameters that did not
    /// reach the loss get zeros.
    pub fn collect_grads(&self, bound: &Bound, grads: &Grads) -> Vec<Tensor> {
        self.params
            .iter()
            .zip(&bound.vars)
            .map(|(p, &v)| {
                grads
                    .get(v)
                    .cloned()
                    .unwrap_or_else(|| Tensor::zeros(p.value.shape()))
            })
            .collect()
    }

    /// Replaces values by name, requiring an exact name and shape match.
    pub fn load_from(&mut self, other: &ParamStore) -> Result<()> {
        if other.len() != self.len() {
            return Err(TensorError::Invalid {
                op: "load_params",
                msg: format!("expected {} parameters, found {}", self.len(), other.len()),
            });
        }
        for p in &mut self.params {
            let id = other.find(&p.name).ok_or_else(|| TensorError::Invalid {
                op: "load_params",
                msg: format!("missing parameter {}", p.name),
            })?;
            let src = other.get(id);
            if src.shape() != p.value.shape() {
                return Err(TensorError::ShapeMismatch {
                    op: "load_params",
                    lhs: p.value.shape().to_vec(),
                    rhs: src.shape().to_vec(),
                });
            }
            p.value = src.clone();
        }
        Ok(())
    }
}

/// Tape handles for each parameter of a store, in registration order.
#[derive(Debug, Clone)]
pub struct Bound {
    vars: Vec<Var>,
}

impl Bound {
    /// Wraps handles that the caller registered itself, in registration order.
    pub fn from_vars(vars: Vec<Var>) -> Self {
        Self { vars }
    }

    pub fn var(&self, id: ParamId) -> Var {
        self.vars[id.0]
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}
