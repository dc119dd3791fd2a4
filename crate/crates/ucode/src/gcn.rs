//! Two-layer GCN with batch normalization, hand-derived backward pass,
//! and Adam with decoupled weight decay.
//!
//! Forward: C = RReLU(BN1(Â · SiLU(BN0(Â X W0)) · W1)), batch norm applied
//! to each layer's pre-activation.

use crate::error::{Error, Result};
use crate::graph::SparseSymMatrix;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const RRELU_LO: f64 = 1.0 / 8.0;
pub const RRELU_HI: f64 = 1.0 / 3.0;
const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.9;

/// Per-layer batch-norm parameters and running statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchNormParams {
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

impl BatchNormParams {
    pub fn new(dim: usize) -> Self {
        BatchNormParams {
            gamma: Array1::ones(dim),
            beta: Array1::zeros(dim),
            running_mean: Array1::zeros(dim),
            running_var: Array1::ones(dim),
        }
    }
}

/// Weights and batch-norm state of the two-layer GCN.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelParams {
    pub w0: Array2<f64>,
    pub w1: Array2<f64>,
    pub bn0: BatchNormParams,
    pub bn1: BatchNormParams,
}

impl ModelParams {
    /// Glorot-uniform initialization of both weight matrices.
    pub fn init(l: usize, hidden: usize, k: usize, rng: &mut ChaCha8Rng) -> Self {
        let glorot = |fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            Array2::from_shape_fn((fan_in, fan_out), |_| rng.gen_range(-bound..bound))
        };
        ModelParams {
            w0: glorot(l, hidden, rng),
            w1: glorot(hidden, k, rng),
            bn0: BatchNormParams::new(hidden),
            bn1: BatchNormParams::new(k),
        }
    }

    pub fn shapes(&self) -> (usize, usize, usize) {
        (self.w0.nrows(), self.w0.ncols(), self.w1.ncols())
    }

    pub fn assert_finite(&self) -> Result<()> {
        let all_finite = self.w0.iter().chain(self.w1.iter()).all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::param("params", "non-finite weight entries"));
        }
        Ok(())
    }
}

pub fn silu(x: f64) -> f64 {
    x * crate::loss::sigmoid(x)
}

fn silu_grad(x: f64) -> f64 {
    let s = crate::loss::sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}

/// RReLU: identity for x ≥ 0; negative side scaled by a sampled slope in
/// train mode or by the mean slope (1/8 + 1/3)/2 in eval mode.
pub fn rrelu(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

pub fn rrelu_eval_slope() -> f64 {
    (RRELU_LO + RRELU_HI) / 2.0
}

/// How the RReLU negative slopes are chosen during a forward pass.
pub enum ForwardMode<'a> {
    /// Sample slopes per element; batch stats are used and running stats updated.
    Train(&'a mut ChaCha8Rng),
    /// Deterministic mean slope; running statistics are used for batch norm.
    Eval,
    /// Train-mode computation with externally fixed slopes (gradient checks).
    Frozen(&'a Array2<f64>),
}

#[derive(Debug, Clone)]
pub struct BnCache {
    x_hat: Array2<f64>,
    inv_std: Array1<f64>,
}

/// Everything the backward pass needs from a train-mode forward call.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    ax: Array2<f64>,          // Â X            (n×l)
    pub z0: Array2<f64>,      // Â X W0         (n×h)
    bn0: BnCache,
    bn0_out: Array2<f64>,     // BN0(z0)        (n×h)
    pub h_act: Array2<f64>,   // SiLU(bn0_out)  (n×h)
    ah: Array2<f64>,          // Â h_act        (n×h)
    pub z1: Array2<f64>,      // Â h_act W1     (n×k)
    bn1: BnCache,
    pub bn1_out: Array2<f64>, // BN1(z1)        (n×k)
    /// Sampled (or frozen) RReLU slopes, 1.0 where the input was >= 0.
    pub slopes: Array2<f64>,
    pub output: Array2<f64>,
}

/// Per-column standardization with ε = 1e-5 and scale-shift; train mode
/// uses batch statistics (population variance) and updates running stats.
pub fn batch_norm(
    x: &Array2<f64>,
    params: &mut BatchNormParams,
    train: bool,
) -> Result<(Array2<f64>, Option<BnCache>)> {
    let (n, m) = (x.nrows(), x.ncols());
    if m != params.gamma.len() {
        return Err(Error::dim("batch_norm", params.gamma.len(), m));
    }
    if train {
        if n < 2 {
            return Err(Error::param("batch_norm", "train mode needs at least 2 rows"));
        }
        let mut x_hat = Array2::zeros((n, m));
        let mut inv_std = Array1::zeros(m);
        let mut out = Array2::zeros((n, m));
        for j in 0..m {
            let col = x.column(j);
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let is = 1.0 / (var + BN_EPS).sqrt();
            inv_std[j] = is;
            for i in 0..n {
                let xh = (x[[i, j]] - mean) * is;
                x_hat[[i, j]] = xh;
                out[[i, j]] = params.gamma[j] * xh + params.beta[j];
            }
            params.running_mean[j] = BN_MOMENTUM * params.running_mean[j] + (1.0 - BN_MOMENTUM) * mean;
            params.running_var[j] = BN_MOMENTUM * params.running_var[j] + (1.0 - BN_MOMENTUM) * var;
        }
        Ok((out, Some(BnCache { x_hat, inv_std })))
    } else {
        let mut out = Array2::zeros((n, m));
        for j in 0..m {
            let is = 1.0 / (params.running_var[j] + BN_EPS).sqrt();
            for i in 0..n {
                out[[i, j]] = params.gamma[j] * (x[[i, j]] - params.running_mean[j]) * is + params.beta[j];
            }
        }
        Ok((out, None))
    }
}

/// Exact train-mode batch-norm backward.
fn batch_norm_backward(
    cache: &BnCache,
    gamma: &Array1<f64>,
    dy: &Array2<f64>,
) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
    let (n, m) = (dy.nrows(), dy.ncols());
    let nf = n as f64;
    let mut dx = Array2::zeros((n, m));
    let mut dgamma = Array1::zeros(m);
    let mut dbeta = Array1::zeros(m);
    for j in 0..m {
        let mut sum_dy = 0.0;
        let mut sum_dy_xhat = 0.0;
        for i in 0..n {
            sum_dy += dy[[i, j]];
            sum_dy_xhat += dy[[i, j]] * cache.x_hat[[i, j]];
        }
        dgamma[j] = sum_dy_xhat;
        dbeta[j] = sum_dy;
        let coeff = gamma[j] * cache.inv_std[j];
        for i in 0..n {
            dx[[i, j]] = coeff
                * (dy[[i, j]] - sum_dy / nf - cache.x_hat[[i, j]] * sum_dy_xhat / nf);
        }
    }
    (dx, dgamma, dbeta)
}

/// Full forward pass. In eval mode the cache carries no batch-norm
/// intermediates and must not be fed to `backward`.
pub fn forward(
    ahat: &SparseSymMatrix,
    x: &Array2<f64>,
    params: &mut ModelParams,
    mode: ForwardMode<'_>,
) -> Result<ForwardCache> {
    let (l, _h, k) = params.shapes();
    if x.ncols() != l {
        return Err(Error::dim("forward features", l, x.ncols()));
    }
    if ahat.dim() != x.nrows() {
        return Err(Error::dim("forward adjacency", x.nrows(), ahat.dim()));
    }
    let n = x.nrows();
    let train = !matches!(mode, ForwardMode::Eval);

    let ax = ahat.mul_dense(x);
    let z0 = ax.dot(&params.w0);
    let (bn0_out, bn0_cache) = batch_norm(&z0, &mut params.bn0, train)?;
    let h_act = bn0_out.mapv(silu);
    let ah = ahat.mul_dense(&h_act);
    let z1 = ah.dot(&params.w1);
    let (bn1_out, bn1_cache) = batch_norm(&z1, &mut params.bn1, train)?;

    let slopes = match mode {
        ForwardMode::Train(rng) => Array2::from_shape_fn((n, k), |(i, j)| {
            if bn1_out[[i, j]] >= 0.0 {
                1.0
            } else {
                rng.gen_range(RRELU_LO..RRELU_HI)
            }
        }),
        ForwardMode::Eval => bn1_out.mapv(|v| if v >= 0.0 { 1.0 } else { rrelu_eval_slope() }),
        ForwardMode::Frozen(s) => {
            if s.dim() != (n, k) {
                return Err(Error::dim("frozen slopes", format!("{n}x{k}"), format!("{:?}", s.dim())));
            }
            Array2::from_shape_fn((n, k), |(i, j)| {
                if bn1_out[[i, j]] >= 0.0 {
                    1.0
                } else {
                    s[[i, j]]
                }
            })
        }
    };
    let output = &bn1_out * &slopes;

    let empty = BnCache {
        x_hat: Array2::zeros((0, 0)),
        inv_std: Array1::zeros(0),
    };
    Ok(ForwardCache {
        ax,
        z0,
        bn0: bn0_cache.unwrap_or_else(|| empty.clone()),
        bn0_out,
        h_act,
        ah,
        z1,
        bn1: bn1_cache.unwrap_or(empty),
        bn1_out,
        slopes,
        output,
    })
}

/// Gradients for every trainable parameter.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w0: Array2<f64>,
    pub w1: Array2<f64>,
    pub bn0_gamma: Array1<f64>,
    pub bn0_beta: Array1<f64>,
    pub bn1_gamma: Array1<f64>,
    pub bn1_beta: Array1<f64>,
}

/// Reverse-mode pass through the cached train-mode forward.
pub fn backward(
    ahat: &SparseSymMatrix,
    cache: &ForwardCache,
    params: &ModelParams,
    grad_output: &Array2<f64>,
) -> Result<Gradients> {
    if grad_output.dim() != cache.output.dim() {
        return Err(Error::dim(
            "backward",
            format!("{:?}", cache.output.dim()),
            format!("{:?}", grad_output.dim()),
        ));
    }
    if cache.bn1.x_hat.is_empty() {
        return Err(Error::param("backward", "cache was produced in eval mode"));
    }
    // RReLU backward uses the recorded slopes
    let d_bn1_out = grad_output * &cache.slopes;
    let (d_z1, bn1_gamma, bn1_beta) =
        batch_norm_backward(&cache.bn1, &params.bn1.gamma, &d_bn1_out);
    let w1 = cache.ah.t().dot(&d_z1);
    let d_ah = d_z1.dot(&params.w1.t());
    // Âᵀ = Â
    let d_h_act = ahat.mul_dense(&d_ah);
    let d_bn0_out = &d_h_act * &cache.bn0_out.mapv(silu_grad);
    let (d_z0, bn0_gamma, bn0_beta) =
        batch_norm_backward(&cache.bn0, &params.bn0.gamma, &d_bn0_out);
    let w0 = cache.ax.t().dot(&d_z0);
    Ok(Gradients {
        w0,
        w1,
        bn0_gamma,
        bn0_beta,
        bn1_gamma,
        bn1_beta,
    })
}

/// First/second moment accumulators for Adam.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdamState {
    pub t: u64,
    m_w0: Array2<f64>,
    v_w0: Array2<f64>,
    m_w1: Array2<f64>,
    v_w1: Array2<f64>,
    m_bn: [Array1<f64>; 4],
    v_bn: [Array1<f64>; 4],
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        let z2 = |a: &Array2<f64>| Array2::zeros(a.raw_dim());
        let z1 = |a: &Array1<f64>| Array1::zeros(a.raw_dim());
        AdamState {
            t: 0,
            m_w0: z2(&params.w0),
            v_w0: z2(&params.w0),
            m_w1: z2(&params.w1),
            v_w1: z2(&params.w1),
            m_bn: [
                z1(&params.bn0.gamma),
                z1(&params.bn0.beta),
                z1(&params.bn1.gamma),
                z1(&params.bn1.beta),
            ],
            v_bn: [
                z1(&params.bn0.gamma),
                z1(&params.bn0.beta),
                z1(&params.bn1.gamma),
                z1(&params.bn1.beta),
            ],
        }
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

fn adam_update_inplace(
    param: &mut f64,
    grad: f64,
    m: &mut f64,
    v: &mut f64,
    lr: f64,
    bc1: f64,
    bc2: f64,
    decay: f64,
) {
    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * grad;
    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * grad * grad;
    let m_hat = *m / bc1;
    let v_hat = *v / bc2;
    *param -= lr * (m_hat / (v_hat.sqrt() + ADAM_EPS) + decay * *param);
}

/// One Adam step with bias correction. Decoupled weight decay applies to
/// the weight matrices only, never to the batch-norm parameters.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
    weight_decay: f64,
) {
    state.t += 1;
    let bc1 = 1.0 - ADAM_BETA1.powi(state.t as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(state.t as i32);

    for ((p, &g), (m, v)) in params
        .w0
        .iter_mut()
        .zip(grads.w0.iter())
        .zip(state.m_w0.iter_mut().zip(state.v_w0.iter_mut()))
    {
        adam_update_inplace(p, g, m, v, lr, bc1, bc2, weight_decay);
    }
    for ((p, &g), (m, v)) in params
        .w1
        .iter_mut()
        .zip(grads.w1.iter())
        .zip(state.m_w1.iter_mut().zip(state.v_w1.iter_mut()))
    {
        adam_update_inplace(p, g, m, v, lr, bc1, bc2, weight_decay);
    }
    let bn_params: [&mut Array1<f64>; 4] = [
        &mut params.bn0.gamma,
        &mut params.bn0.beta,
        &mut params.bn1.gamma,
        &mut params.bn1.beta,
    ];
    let bn_grads = [
        &grads.bn0_gamma,
        &grads.bn0_beta,
        &grads.bn1_gamma,
        &grads.bn1_beta,
    ];
    for (idx, p_arr) in bn_params.into_iter().enumerate() {
        for ((p, &g), (m, v)) in p_arr
            .iter_mut()
            .zip(bn_grads[idx].iter())
            .zip(state.m_bn[idx].iter_mut().zip(state.v_bn[idx].iter_mut()))
        {
            adam_update_inplace(p, g, m, v, lr, bc1, bc2, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::bowtie;
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn silu_fixtures() {
        assert_eq!(silu(0.0), 0.0);
        assert!((silu(100.0) - 100.0).abs() < 1e-9);
        assert!((silu(1.0) - 0.731058578).abs() < 1e-8);
    }

    #[test]
    fn rrelu_fixtures() {
        assert_eq!(rrelu(5.0, 0.2), 5.0);
        let eval = rrelu(-8.0, rrelu_eval_slope());
        assert!((eval - (-8.0 * 11.0 / 48.0)).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let slope = rng.gen_range(RRELU_LO..RRELU_HI);
            let v = rrelu(-1.0, slope);
            assert!((-1.0 / 3.0..=-1.0 / 8.0).contains(&v));
        }
    }

    #[test]
    fn batch_norm_fixtures() {
        let mut p = BatchNormParams::new(1);
        let x = ndarray::array![[1.0], [-1.0]];
        let (y, _) = batch_norm(&x, &mut p, true).unwrap();
        let expect = 1.0 / (1.0 + BN_EPS).sqrt();
        assert!((y[[0, 0]] - expect).abs() < 1e-12);
        assert!((y[[1, 0]] + expect).abs() < 1e-12);

        let constant = ndarray::array![[3.0], [3.0], [3.0]];
        let (y, _) = batch_norm(&constant, &mut p, true).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-9));

        let mut zero_gamma = BatchNormParams::new(1);
        zero_gamma.gamma.fill(0.0);
        zero_gamma.beta.fill(0.7);
        let (y, _) = batch_norm(&x, &mut zero_gamma, true).unwrap();
        assert!(y.iter().all(|v| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn batch_norm_train_standardizes() {
        let mut p = BatchNormParams::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = Array2::from_shape_fn((50, 3), |_| 5.0 * rng.gen::<f64>() - 1.0);
        let (y, _) = batch_norm(&x, &mut p, true).unwrap();
        for j in 0..3 {
            let col = y.column(j);
            let mean = col.sum() / 50.0;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 50.0;
            assert!(mean.abs() < 1e-8);
            assert!((var - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn batch_norm_train_needs_two_rows() {
        let mut p = BatchNormParams::new(1);
        let x = ndarray::array![[1.0]];
        assert!(batch_norm(&x, &mut p, true).is_err());
    }

    #[test]
    fn forward_zero_features_zero_output() {
        let g = bowtie();
        let ahat = g.normalized_adjacency();
        let x = Array2::zeros((5, 3));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut params = ModelParams::init(3, 4, 2, &mut rng);
        let cache = forward(&ahat, &x, &mut params, ForwardMode::Eval).unwrap();
        // BN0 has zero running mean / unit variance, β=0, so zeros stay zeros
        assert!(cache.output.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn forward_eval_deterministic() {
        let g = bowtie();
        let ahat = g.normalized_adjacency();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array2::from_shape_fn((5, 3), |_| rng.gen::<f64>());
        let mut params = ModelParams::init(3, 4, 2, &mut ChaCha8Rng::seed_from_u64(4));
        let a = forward(&ahat, &x, &mut params.clone(), ForwardMode::Eval).unwrap();
        let b = forward(&ahat, &x, &mut params, ForwardMode::Eval).unwrap();
        assert_eq!(a.output, b.output);
    }

    #[test]
    fn forward_train_deterministic_for_seed() {
        let g = bowtie();
        let ahat = g.normalized_adjacency();
        let x = Array2::from_shape_fn((5, 3), |(i, j)| (i * 3 + j) as f64 / 7.0);
        let run = |seed: u64| {
            let mut params = ModelParams::init(3, 4, 2, &mut ChaCha8Rng::seed_from_u64(seed));
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            forward(&ahat, &x, &mut params, ForwardMode::Train(&mut rng))
                .unwrap()
                .output
        };
        assert_eq!(run(6), run(6));
    }

    #[test]
    fn backward_zero_grad_gives_zero() {
        let g = bowtie();
        let ahat = g.normalized_adjacency();
        let x = Array2::from_shape_fn((5, 3), |(i, j)| ((i + j) as f64).sin());
        let mut params = ModelParams::init(3, 4, 2, &mut ChaCha8Rng::seed_from_u64(8));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cache = forward(&ahat, &x, &mut params, ForwardMode::Train(&mut rng)).unwrap();
        let grads = backward(&ahat, &cache, &params, &Array2::zeros((5, 2))).unwrap();
        assert!(grads.w0.iter().all(|v| *v == 0.0));
        assert!(grads.w1.iter().all(|v| *v == 0.0));
        assert!(grads.bn0_gamma.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn backward_is_linear_in_upstream_grad() {
        let g = bowtie();
        let ahat = g.normalized_adjacency();
        let x = Array2::from_shape_fn((5, 3), |(i, j)| ((i * 2 + j) as f64).cos());
        let mut params = ModelParams::init(3, 4, 2, &mut ChaCha8Rng::seed_from_u64(10));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cache = forward(&ahat, &x, &mut params, ForwardMode::Train(&mut rng)).unwrap();
        let up = Array2::from_shape_fn((5, 2), |(i, j)| (i + j) as f64 * 0.3 - 0.4);
        let g1 = backward(&ahat, &cache, &params, &up).unwrap();
        let g2 = backward(&ahat, &cache, &params, &(&up * 2.0)).unwrap();
        for (a, b) in g1.w0.iter().zip(g2.w0.iter()) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
        for (a, b) in g1.bn1_beta.iter().zip(g2.bn1_beta.iter()) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn adam_first_step_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut params = ModelParams::init(1, 1, 2, &mut rng);
        params.w0[[0, 0]] = 0.5;
        let before = params.w0[[0, 0]];
        let grads = Gradients {
            w0: ndarray::array![[1.0]],
            w1: Array2::zeros((1, 2)),
            bn0_gamma: Array1::zeros(1),
            bn0_beta: Array1::zeros(1),
            bn1_gamma: Array1::zeros(2),
            bn1_beta: Array1::zeros(2),
        };
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &grads, &mut state, 1e-3, 0.0);
        let update = params.w0[[0, 0]] - before;
        assert!((update + 1e-3).abs() < 1e-8, "update {update}");
    }

    #[test]
    fn adam_zero_grad_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut params = ModelParams::init(2, 3, 2, &mut rng);
        let snapshot = params.clone();
        let grads = Gradients {
            w0: Array2::zeros((2, 3)),
            w1: Array2::zeros((3, 2)),
            bn0_gamma: Array1::zeros(3),
            bn0_beta: Array1::zeros(3),
            bn1_gamma: Array1::zeros(2),
            bn1_beta: Array1::zeros(2),
        };
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &grads, &mut state, 1e-3, 0.0);
        assert_eq!(params.w0, snapshot.w0);
        assert_eq!(params.w1, snapshot.w1);
    }

    #[test]
    fn adam_pure_decay() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut params = ModelParams::init(1, 1, 2, &mut rng);
        params.w0[[0, 0]] = 1.0;
        let grads = Gradients {
            w0: Array2::zeros((1, 1)),
            w1: Array2::zeros((1, 2)),
            bn0_gamma: Array1::zeros(1),
            bn0_beta: Array1::zeros(1),
            bn1_gamma: Array1::zeros(2),
            bn1_beta: Array1::zeros(2),
        };
        let mut state = AdamState::new(&params);
        adam_step(&mut params, &grads, &mut state, 1e-3, 0.1);
        assert!((params.w0[[0, 0]] - (1.0 - 1e-4)).abs() < 1e-12);
    }
}
