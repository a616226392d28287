//! Central finite-difference verification of tape gradients.
//!
//! The numeric side only ever evaluates forward values, so it shares no code
//! path with [`Tape::backward`].

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Result, Scalar, Tape, Tensor, Var};

/// Perturbation size for central differences.
pub const DEFAULT_EPS: Scalar = 1e-3;
/// Acceptance threshold on [`GradcheckReport::max_rel_err`].
pub const TOLERANCE: Scalar = 1e-4;
/// Denominator floor: `|a - n| / max(|a|, |n|, REL_FLOOR)`. Keeps the
/// measure meaningful for coordinates whose true gradient is ~0.
pub const REL_FLOOR: Scalar = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub name: String,
    pub max_rel_err: Scalar,
    pub coords: usize,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err < TOLERANCE
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GradcheckOptions {
    pub eps: Scalar,
    /// Probe at most this many coordinates per input (all when `None`).
    pub max_coords: Option<usize>,
    pub seed: u64,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            max_coords: None,
            seed: 0,
        }
    }
}

pub fn relative_error(analytic: Scalar, numeric: Scalar) -> Scalar {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

fn evaluate<F>(f: &F, inputs: &[Tensor]) -> Result<Scalar>
where
    F: Fn(&Tape, &[Var]) -> Result<Var>,
{
    let tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.constant(t.clone())).collect();
    let out = f(&tape, &vars)?;
    tape.item(out)
}

/// Compares the tape gradient of scalar `f` against central differences
/// for every input tensor.
pub fn check<F>(
    name: &str,
    inputs: &[Tensor],
    opts: GradcheckOptions,
    f: F,
) -> Result<GradcheckReport>
where
    F: Fn(&Tape, &[Var]) -> Result<Var>,
{
    let tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.param(t.clone())).collect();
    let out = f(&tape, &vars)?;
    let grads = tape.backward(out)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut probe = inputs.to_vec();
    let mut max_rel_err: Scalar = 0.0;
    let mut coords = 0;
    for (k, var) in vars.iter().enumerate() {
        let numel = inputs[k].numel();
        let analytic = grads
            .get(*var)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(inputs[k].shape()));
        let picks: Vec<usize> = match opts.max_coords {
            Some(limit) if limit < numel => {
                let mut p = sample(&mut rng, numel, limit).into_vec();
                p.sort_unstable();
                p
            }
            _ => (0..numel).collect(),
        };
        for j in picks {
            let orig = probe[k].data()[j];
            probe[k].data_mut()[j] = orig + opts.eps;
            let plus = evaluate(&f, &probe)?;
            probe[k].data_mut()[j] = orig - opts.eps;
            let minus = evaluate(&f, &probe)?;
            probe[k].data_mut()[j] = orig;
            let numeric = (plus - minus) / (2.0 * opts.eps);
            max_rel_err = max_rel_err.max(relative_error(analytic.data()[j], numeric));
            coords += 1;
        }
    }
    Ok(GradcheckReport {
        name: name.to_string(),
        max_rel_err,
        coords,
    })
}

/// Tensor of standard-normal entries scaled by `scale`.
pub fn random_tensor(rng: &mut impl Rng, shape: &[usize], scale: Scalar) -> Tensor {
    let n = shape.iter().product();
    let data = (0..n)
        .map(|_| scale * rng.sample::<Scalar, _>(StandardNormal))
        .collect();
    Tensor::from_vec(shape.to_vec(), data).expect("shape product")
}

/// Reduces an arbitrary-shape output to a scalar through fixed random weights,
/// so that every output coordinate contributes a distinct sensitivity.
fn project(tape: &Tape, out: Var, seed: u64) -> Result<Var> {
    let shape = tape.shape(out);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let weights = tape.constant(random_tensor(&mut rng, &shape, 1.0));
    tape.dot(out, weights)
}

/// Gradient checks for every differentiable tape operation.
pub fn op_suite(seed: u64) -> Result<Vec<GradcheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = GradcheckOptions {
        seed,
        ..GradcheckOptions::default()
    };
    let mut r = |shape: &[usize]| random_tensor(&mut rng, shape, 1.0);
    let mut reports = Vec::new();

    macro_rules! probe {
        ($name:expr, [$($input:expr),*], |$tape:ident, $v:ident| $body:expr) => {
            reports.push(check($name, &[$($input),*], opts, |$tape: &Tape, $v: &[Var]| {
                let out = $body?;
                project($tape, out, seed)
            })?);
        };
    }

    probe!("matmul", [r(&[3, 4]), r(&[4, 5])], |t, v| t
        .matmul(v[0], v[1]));
    probe!("matmul_t", [r(&[3, 4]), r(&[5, 4])], |t, v| t
        .matmul_t(v[0], v[1]));
    probe!("transpose", [r(&[3, 4])], |t, v| t.transpose(v[0]));
    probe!("add", [r(&[2, 3]), r(&[2, 3])], |t, v| t.add(v[0], v[1]));
    probe!("add_scalar", [r(&[2, 3]), r(&[1])], |t, v| t
        .add(v[0], v[1]));
    probe!("sub", [r(&[2, 3]), r(&[2, 3])], |t, v| t.sub(v[0], v[1]));
    probe!("mul", [r(&[2, 3]), r(&[2, 3])], |t, v| t.mul(v[0], v[1]));
    probe!("mul_scalar", [r(&[2, 3]), r(&[])], |t, v| t.mul(v[0], v[1]));
    probe!("scale", [r(&[2, 3])], |t, v| t.scale(v[0], -0.37));
    probe!("add_row", [r(&[3, 4]), r(&[4])], |t, v| t
        .add_row(v[0], v[1]));
    probe!("concat", [r(&[2, 3]), r(&[2, 2])], |t, v| t
        .concat(&[v[0], v[1]], 1));
    probe!("slice", [r(&[4, 3])], |t, v| t.slice(v[0], 0, 1, 3));
    probe!("embedding_lookup", [r(&[5, 3])], |t, v| t
        .embedding_lookup(v[0], &[4, 0, 4, 2]));
    probe!("layer_norm", [r(&[3, 6]), r(&[6]), r(&[6])], |t, v| t
        .layer_norm(v[0], v[1], v[2]));
    probe!("gelu", [r(&[2, 5])], |t, v| t.gelu(v[0]));
    probe!("softmax_lastdim", [r(&[3, 4])], |t, v| t
        .softmax_lastdim(v[0]));
    probe!("log_softmax_lastdim", [r(&[3, 4])], |t, v| t
        .log_softmax_lastdim(v[0]));
    probe!("mean", [r(&[2, 3])], |t, v| t.mean(v[0]));
    probe!("sum", [r(&[2, 3])], |t, v| t.sum(v[0]));
    probe!("dot", [r(&[5]), r(&[5])], |t, v| t.dot(v[0], v[1]));
    probe!("cross_entropy", [r(&[3, 4])], |t, v| t
        .cross_entropy(v[0], &[2, 0, 3]));
    probe!("softplus", [r(&[2, 4])], |t, v| t.softplus(v[0]));
    probe!("exp", [r(&[2, 3])], |t, v| t.exp(v[0]));
    probe!("reshape", [r(&[2, 3])], |t, v| t.reshape(v[0], vec![3, 2]));
    probe!("normalize_rows", [r(&[3, 4])], |t, v| t
        .normalize_rows(v[0]));
    probe!("im2col", [r(&[16, 2])], |t, v| t.im2col(v[0], 4, 4, 3));
    probe!("avg_pool2", [r(&[16, 2])], |t, v| t.avg_pool2(v[0], 4, 4));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_op_passes() {
        for report in op_suite(7).unwrap() {
            eprintln!("{:<22} {:.3e}", report.name, report.max_rel_err);
            assert!(report.passed(), "{}: {}", report.name, report.max_rel_err);
            assert!(report.coords > 0);
        }
    }

    #[test]
    fn detects_a_wrong_gradient() {
        // d/dx of x*x evaluated through a constant copy is invisible to the
        // tape, so the analytic gradient is half the true one.
        let x = Tensor::vector(vec![1.3]);
        let report = check("broken", &[x], GradcheckOptions::default(), |t, v| {
            let copy = t.value(v[0]).clone();
            let frozen = t.constant(copy);
            let y = t.mul(v[0], frozen)?;
            t.sum(y)
        })
        .unwrap();
        assert!(!report.passed());
    }
}
