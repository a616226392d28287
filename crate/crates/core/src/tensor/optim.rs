use super::{ParamStore, Scalar, Tensor};

/// AdamW with decoupled weight decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamW {
    pub lr: Scalar,
    pub beta1: Scalar,
    pub beta2: Scalar,
    pub eps: Scalar,
    pub weight_decay: Scalar,
}

impl Default for AdamW {
    fn default() -> Self {
        Self {
            lr: 5e-5,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.01,
        }
    }
}

/// First and second moment estimates, aligned with a [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
}

impl AdamState {
    pub fn new(store: &ParamStore) -> Self {
        let zeros: Vec<Tensor> = store
            .iter()
            .map(|p| Tensor::zeros(p.value.shape()))
            .collect();
        Self {
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }
}

impl AdamW {
    /// One update at learning rate `lr` (the schedule is applied by the caller).
    ///
    /// Parameters flagged `decay = false` skip weight decay.
    pub fn step(
        &self,
        store: &mut ParamStore,
        grads: &[Tensor],
        state: &mut AdamState,
        lr: Scalar,
    ) {
        assert_eq!(grads.len(), store.len(), "one gradient per parameter");
        state.step += 1;
        let t = state.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (i, (param, grad)) in store.iter_mut().zip(grads).enumerate() {
            assert_eq!(
                param.value.shape(),
                grad.shape(),
                "gradient shape for {}",
                param.name
            );
            let decay = if param.decay { self.weight_decay } else { 0.0 };
            let m = state.m[i].data_mut();
            let v = state.v[i].data_mut();
            for (j, (p, &g)) in param
                .value
                .data_mut()
                .iter_mut()
                .zip(grad.data())
                .enumerate()
            {
                *p -= lr * decay * *p;
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g;
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g * g;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

/// Linear warmup over the first `warmup_ratio` of steps, then linear decay
/// to zero at `total_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearWarmup {
    pub peak_lr: Scalar,
    pub warmup_steps: usize,
    pub total_steps: usize,
}

impl LinearWarmup {
    pub fn new(peak_lr: Scalar, warmup_ratio: Scalar, total_steps: usize) -> Self {
        let warmup_steps = (warmup_ratio * total_steps as Scalar).ceil() as usize;
        Self {
            peak_lr,
            warmup_steps,
            total_steps,
        }
    }

    /// Learning rate for the 0-based `step`.
    pub fn lr(&self, step: usize) -> Scalar {
        if step < self.warmup_steps {
            return self.peak_lr * (step + 1) as Scalar / self.warmup_steps as Scalar;
        }
        let remaining = self.total_steps.saturating_sub(step) as Scalar;
        let span = self.total_steps.saturating_sub(self.warmup_steps).max(1) as Scalar;
        self.peak_lr * (remaining / span).clamp(0.0, 1.0)
    }
}
