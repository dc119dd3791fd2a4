//! Contrastive community-modularity loss: target vector, derangement
//! sampling, optional log amplification, loss value and analytic gradient.

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::modularity::{qm_raw, CommunityAssignment, CommunityModularityMatrix};
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Length-2k target: ones for the intra-community half, δ for the
/// inter-community half.
#[derive(Debug, Clone)]
pub struct TargetVector {
    y: Vec<f64>,
    k: usize,
    delta: f64,
}

impl TargetVector {
    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

pub fn target_vector(k: usize, delta: f64) -> Result<TargetVector> {
    if k < 2 {
        return Err(Error::param("k", format!("need k >= 2, got {k}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::param("delta", format!("must lie in [0, 1), got {delta}")));
    }
    let mut y = vec![1.0; k];
    y.extend(std::iter::repeat(delta).take(k));
    Ok(TargetVector { y, k, delta })
}

/// A derangement of {0..k−1}: p(i) ≠ i everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    p: Vec<usize>,
}

impl Permutation {
    /// Validates the derangement property.
    pub fn new(p: Vec<usize>) -> Result<Self> {
        let k = p.len();
        let mut seen = vec![false; k];
        for (i, &pi) in p.iter().enumerate() {
            if pi >= k || seen[pi] {
                return Err(Error::param("permutation", "not a bijection"));
            }
            if pi == i {
                return Err(Error::param("permutation", format!("fixed point at {i}")));
            }
            seen[pi] = true;
        }
        Ok(Permutation { p })
    }

    /// The k=2 swap, the only derangement on two elements.
    pub fn swap2() -> Self {
        Permutation { p: vec![1, 0] }
    }

    pub fn apply(&self, i: usize) -> usize {
        self.p[i]
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.p
    }
}

/// Uniformly sampled derangement via rejection sampling.
pub fn sample_permutation(k: usize, rng: &mut ChaCha8Rng) -> Permutation {
    assert!(k >= 2, "derangements need k >= 2");
    let mut p: Vec<usize> = (0..k).collect();
    loop {
        p.shuffle(rng);
        if p.iter().enumerate().all(|(i, &pi)| pi != i) {
            return Permutation { p: p.clone() };
        }
    }
}

/// Whether the contrastive permutation is fixed or resampled every epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermPolicy {
    FixedDerangement,
    ResampleEachEpoch,
}

/// Loss configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossConfig {
    pub delta: f64,
    pub amplify: bool,
    pub perm_policy: PermPolicy,
    /// Clamp floor for the logarithm inside `amplify`.
    pub epsilon: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            delta: 0.0,
            amplify: false,
            perm_policy: PermPolicy::ResampleEachEpoch,
            epsilon: 1e-12,
        }
    }
}

/// Numerically stable log σ(x): never -inf, exact in the saturated tails.
pub(crate) fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Row-normalize then take elementwise logs, clamping entries to ≥ epsilon.
/// Rows summing to zero fall back to the uniform 1/k row.
pub fn amplify(c: &CommunityAssignment, epsilon: f64) -> Array2<f64> {
    amplify_raw(c.matrix(), epsilon)
}

pub(crate) fn amplify_raw(m: &Array2<f64>, epsilon: f64) -> Array2<f64> {
    let k = m.ncols() as f64;
    let mut out = m.clone();
    for mut row in out.rows_mut() {
        let s: f64 = row.sum();
        if s <= 0.0 {
            row.fill((1.0 / k).ln());
        } else {
            row.mapv_inplace(|v| (v / s).max(epsilon).ln());
        }
    }
    out
}

/// Loss over an arbitrary real k×k matrix.
pub(crate) fn loss_raw(qm: &Array2<f64>, y: &TargetVector, perm: &Permutation) -> f64 {
    let k = y.k();
    debug_assert_eq!(qm.nrows(), k);
    let mut total = 0.0;
    for i in 0..k {
        let intra = y.values()[i] * log_sigmoid(qm[[i, i]]);
        // log(1 − σ(x)) = log σ(−x)
        let inter = (1.0 - y.values()[k + i]) * log_sigmoid(-qm[[perm.apply(i), i]]);
        total += intra + inter;
    }
    -total / (2.0 * k as f64)
}

/// Gradient of `loss_raw` with respect to the Q_M entries. Only diagonal
/// and permuted-diagonal positions are nonzero.
pub(crate) fn loss_grad_qm(qm: &Array2<f64>, y: &TargetVector, perm: &Permutation) -> Array2<f64> {
    let k = y.k();
    let scale = 1.0 / (2.0 * k as f64);
    let mut s = Array2::<f64>::zeros((k, k));
    for i in 0..k {
        // d/dx [log σ(x)] = 1 − σ(x)
        s[[i, i]] -= scale * y.values()[i] * (1.0 - sigmoid(qm[[i, i]]));
        // d/dx [log(1 − σ(x))] = −σ(x)
        s[[perm.apply(i), i]] += scale * (1.0 - y.values()[k + i]) * sigmoid(qm[[perm.apply(i), i]]);
    }
    s
}

/// The UCoDe contrastive loss over a community-wise modularity matrix.
pub fn ucode_loss(
    qm: &CommunityModularityMatrix,
    y: &TargetVector,
    perm: &Permutation,
) -> Result<f64> {
    let k = y.k();
    if qm.matrix().nrows() != k || qm.matrix().ncols() != k {
        return Err(Error::dim(
            "ucode_loss",
            format!("{k}x{k}"),
            format!("{}x{}", qm.matrix().nrows(), qm.matrix().ncols()),
        ));
    }
    if perm.len() != k {
        return Err(Error::dim("ucode_loss permutation", k, perm.len()));
    }
    Ok(loss_raw(qm.matrix(), y, perm))
}

/// Loss and gradient with respect to an arbitrary real membership matrix,
/// via the factored sparse form. `T = S + Sᵀ`; the gradient is
/// A·M·T − d·(Tu)ᵀ/(2|ℰ|) with u = Mᵀd.
pub(crate) fn loss_and_grad_matrix(
    adj: &crate::graph::SparseSymMatrix,
    degrees: &[f64],
    num_edges: usize,
    m: &Array2<f64>,
    y: &TargetVector,
    perm: &Permutation,
) -> (f64, Array2<f64>) {
    let qm = qm_raw(adj, degrees, num_edges, m);
    let loss = loss_raw(&qm, y, perm);
    let s = loss_grad_qm(&qm, y, perm);
    let t = &s + &s.t();
    let am = adj.mul_dense(m); // n×k, equals A·M by symmetry
    let mut grad = am.dot(&t);
    let d = Array1::from_vec(degrees.to_vec());
    let u = m.t().dot(&d);
    let tu = t.dot(&u);
    let scale = 1.0 / (2.0 * num_edges as f64);
    let (n, k) = (m.nrows(), m.ncols());
    for i in 0..n {
        for c in 0..k {
            grad[[i, c]] -= scale * degrees[i] * tu[c];
        }
    }
    (loss, grad)
}

/// Loss and gradient with respect to a raw (unbounded) model output
/// matrix, e.g. the GCN head before any clamping.
pub fn loss_and_grad_output(
    g: &AttributedGraph,
    output: &Array2<f64>,
    y: &TargetVector,
    perm: &Permutation,
) -> Result<(f64, Array2<f64>)> {
    if g.num_edges() == 0 {
        return Err(Error::ZeroEdgeGraph);
    }
    if output.nrows() != g.num_nodes() {
        return Err(Error::dim("loss_and_grad_output", g.num_nodes(), output.nrows()));
    }
    if output.ncols() != y.k() || perm.len() != y.k() {
        return Err(Error::dim("loss_and_grad_output", y.k(), output.ncols()));
    }
    let adj = g.adjacency();
    let degrees = g.degrees().as_f64();
    Ok(loss_and_grad_matrix(&adj, &degrees, g.num_edges(), output, y, perm))
}

/// Analytic ∂L/∂C through Q_M (and through `amplify` when configured).
pub fn ucode_loss_grad(
    g: &AttributedGraph,
    c: &CommunityAssignment,
    cfg: &LossConfig,
    perm: &Permutation,
) -> Result<Array2<f64>> {
    if g.num_edges() == 0 {
        return Err(Error::ZeroEdgeGraph);
    }
    if c.num_nodes() != g.num_nodes() {
        return Err(Error::dim("ucode_loss_grad", g.num_nodes(), c.num_nodes()));
    }
    let y = target_vector(c.num_communities(), cfg.delta)?;
    if perm.len() != c.num_communities() {
        return Err(Error::dim("ucode_loss_grad permutation", c.num_communities(), perm.len()));
    }
    let adj = g.adjacency();
    let degrees = g.degrees().as_f64();
    let m_edges = g.num_edges();
    if cfg.amplify {
        let amp = amplify_raw(c.matrix(), cfg.epsilon);
        let (_, grad_amp) = loss_and_grad_matrix(&adj, &degrees, m_edges, &amp, &y, perm);
        Ok(amplify_backward(c.matrix(), &grad_amp, cfg.epsilon))
    } else {
        let (_, grad) = loss_and_grad_matrix(&adj, &degrees, m_edges, c.matrix(), &y, perm);
        Ok(grad)
    }
}

/// Chain rule through `amplify_raw`: for row x with sum s and ratios
/// r_j = x_j/s, the output is m_j = ln(max(r_j, ε)), so
/// ∂m_j/∂x_l = (δ_jl − r_j)/(s·r_j) wherever the clamp is inactive.
pub(crate) fn amplify_backward(
    m: &Array2<f64>,
    grad_out: &Array2<f64>,
    epsilon: f64,
) -> Array2<f64> {
    let (n, k) = (m.nrows(), m.ncols());
    let mut grad = Array2::<f64>::zeros((n, k));
    for i in 0..n {
        let s: f64 = (0..k).map(|j| m[[i, j]]).sum();
        if s <= 0.0 {
            continue; // uniform fallback is constant in the inputs
        }
        // Σ_j g_j ∂m_j/∂x_l = (g_l/r_l − Σ_j g_j) / s   over unclamped j
        let mut g_sum = 0.0;
        for j in 0..k {
            let r = m[[i, j]] / s;
            if r > epsilon {
                g_sum += grad_out[[i, j]];
            }
        }
        for l in 0..k {
            let r_l = m[[i, l]] / s;
            let direct = if r_l > epsilon {
                grad_out[[i, l]] / r_l
            } else {
                0.0
            };
            grad[[i, l]] = (direct - g_sum) / s;
        }
    }
    grad
}

/// Convenience: the loss value for an assignment under a config.
pub fn ucode_loss_for_assignment(
    g: &AttributedGraph,
    c: &CommunityAssignment,
    cfg: &LossConfig,
    perm: &Permutation,
) -> Result<f64> {
    if g.num_edges() == 0 {
        return Err(Error::ZeroEdgeGraph);
    }
    let y = target_vector(c.num_communities(), cfg.delta)?;
    let adj = g.adjacency();
    let degrees = g.degrees().as_f64();
    let mat = if cfg.amplify {
        amplify_raw(c.matrix(), cfg.epsilon)
    } else {
        c.matrix().clone()
    };
    let qm = qm_raw(&adj, &degrees, g.num_edges(), &mat);
    Ok(loss_raw(&qm, &y, perm))
}
