//! Modularity matrix algebra in factored sparse form.
//!
//! The dense modularity matrix B = A − ddᵀ/(2|ℰ|) is never materialized;
//! everything is computed as CᵀAC − (Cᵀd)(dᵀC)/(2|ℰ|).

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, SparseSymMatrix};
use crate::metrics::Partition;
use ndarray::{Array1, Array2};

/// Soft community membership matrix, entries in [0, 1].
#[derive(Debug, Clone)]
pub struct CommunityAssignment {
    c: Array2<f64>,
}

impl CommunityAssignment {
    pub fn new(c: Array2<f64>) -> Result<Self> {
        if c.ncols() < 2 {
            return Err(Error::param("k", format!("need k >= 2 communities, got {}", c.ncols())));
        }
        if c.nrows() == 0 {
            return Err(Error::param("n", "assignment must cover at least one node"));
        }
        if let Some(bad) = c.iter().find(|v| !(0.0..=1.0).contains(*v) || !v.is_finite()) {
            return Err(Error::param(
                "C",
                format!("membership strengths must lie in [0, 1], found {bad}"),
            ));
        }
        Ok(CommunityAssignment { c })
    }

    /// Clamp an arbitrary real matrix into a valid assignment.
    pub fn from_clamped(raw: &Array2<f64>) -> Result<Self> {
        CommunityAssignment::new(raw.mapv(|v| v.clamp(0.0, 1.0)))
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.c
    }

    pub fn num_nodes(&self) -> usize {
        self.c.nrows()
    }

    pub fn num_communities(&self) -> usize {
        self.c.ncols()
    }
}

/// k×k community-wise modularity matrix Q_M = CᵀBC.
#[derive(Debug, Clone)]
pub struct CommunityModularityMatrix {
    q: Array2<f64>,
}

impl CommunityModularityMatrix {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.q
    }

    pub fn trace(&self) -> f64 {
        self.q.diag().sum()
    }
}

/// Q_M over an arbitrary real matrix, via the factored sparse form.
/// Cost O(|ℰ|·k + n·k²); the dense B is never formed.
pub(crate) fn qm_raw(
    adj: &SparseSymMatrix,
    degrees: &[f64],
    num_edges: usize,
    m: &Array2<f64>,
) -> Array2<f64> {
    let ac = adj.mul_dense(m); // n×k
    let mut q = m.t().dot(&ac); // k×k
    let d = Array1::from_vec(degrees.to_vec());
    let u = m.t().dot(&d); // k-vector Cᵀd
    let scale = 1.0 / (2.0 * num_edges as f64);
    let k = m.ncols();
    for a in 0..k {
        for b in 0..k {
            q[[a, b]] -= scale * u[a] * u[b];
        }
    }
    q
}

/// Community-wise modularity matrix Q_M = CᵀAC − (Cᵀd)(dᵀC)/(2|ℰ|).
pub fn community_modularity_matrix(
    g: &AttributedGraph,
    c: &CommunityAssignment,
) -> Result<CommunityModularityMatrix> {
    if g.num_edges() == 0 {
        return Err(Error::ZeroEdgeGraph);
    }
    if c.num_nodes() != g.num_nodes() {
        return Err(Error::dim("community_modularity_matrix", g.num_nodes(), c.num_nodes()));
    }
    let q = qm_raw(&g.adjacency(), &g.degrees().as_f64(), g.num_edges(), c.matrix());
    Ok(CommunityModularityMatrix { q })
}

/// Normalization convention for the scalar modularity score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModularityNorm {
    /// trace(Q_M)/(4|ℰ|)
    PaperQuarter,
    /// trace(Q_M)/(2|ℰ|), the Newman convention
    StandardHalf,
}

/// Scalar modularity of a soft assignment under the chosen normalization.
pub fn modularity_score(
    g: &AttributedGraph,
    c: &CommunityAssignment,
    norm: ModularityNorm,
) -> Result<f64> {
    let qm = community_modularity_matrix(g, c)?;
    let m = g.num_edges() as f64;
    Ok(match norm {
        ModularityNorm::PaperQuarter => qm.trace() / (4.0 * m),
        ModularityNorm::StandardHalf => qm.trace() / (2.0 * m),
    })
}

/// Per-community conductance values and their unweighted mean.
#[derive(Debug, Clone)]
pub struct ConductanceReport {
    /// (community id, φ) for every non-empty community.
    pub per_community: Vec<(usize, f64)>,
    pub mean: f64,
}

/// Conductance φ(S) = cut(S) / (2·internal(S) + cut(S)) for each non-empty
/// community of a hard partition; communities with zero volume score 0.
pub fn conductance(g: &AttributedGraph, p: &Partition) -> Result<ConductanceReport> {
    if p.labels().len() != g.num_nodes() {
        return Err(Error::dim("conductance", g.num_nodes(), p.labels().len()));
    }
    let k = p.num_communities();
    let mut internal = vec![0usize; k];
    let mut cut = vec![0usize; k];
    let mut size = vec![0usize; k];
    for &l in p.labels() {
        size[l] += 1;
    }
    for &(u, v) in g.edges() {
        let (lu, lv) = (p.labels()[u], p.labels()[v]);
        if lu == lv {
            internal[lu] += 1;
        } else {
            cut[lu] += 1;
            cut[lv] += 1;
        }
    }
    let mut per_community = Vec::new();
    for s in 0..k {
        if size[s] == 0 {
            continue;
        }
        let vol = 2 * internal[s] + cut[s];
        let phi = if vol == 0 { 0.0 } else { cut[s] as f64 / vol as f64 };
        per_community.push((s, phi));
    }
    let mean = if per_community.is_empty() {
        0.0
    } else {
        per_community.iter().map(|&(_, v)| v).sum::<f64>() / per_community.len() as f64
    };
    Ok(ConductanceReport { per_community, mean })
}
