//! Immutable attributed-graph representation with degree and
//! normalized-adjacency derivations.

use crate::error::{Error, Result};
use crate::metrics::{Cover, Partition};
use ndarray::Array2;

/// Ground-truth community structure attached to a graph.
#[derive(Debug, Clone)]
pub enum GroundTruth {
    Partition(Partition),
    Cover(Cover),
}

/// Undirected graph with per-node feature vectors and optional ground truth.
///
/// Edges are stored as unordered pairs `(u, v)` with `u < v`, no self-loops
/// and no duplicates. Immutable after construction.
#[derive(Debug, Clone)]
pub struct AttributedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    features: Array2<f64>,
    ground_truth: Option<GroundTruth>,
}

/// Per-node degree counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVector(pub Vec<usize>);

impl DegreeVector {
    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&d| d as f64).collect()
    }
}

impl AttributedGraph {
    /// Build and validate a graph. Edge endpoint order and duplicates in the
    /// reversed direction are normalized away; exact duplicates are an error.
    pub fn new(
        n: usize,
        edges: Vec<(usize, usize)>,
        features: Array2<f64>,
        ground_truth: Option<GroundTruth>,
    ) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (idx, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {idx} = ({u}, {v}) has an endpoint out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("edge {idx} is a self-loop on node {u}")));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let g = AttributedGraph {
            n,
            edges: normalized,
            features,
            ground_truth,
        };
        g.validate()?;
        Ok(g)
    }

    /// Check all structural invariants, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        for (idx, &(u, v)) in self.edges.iter().enumerate() {
            if u >= self.n || v >= self.n {
                return Err(Error::InvalidGraph(format!(
                    "edge {idx} = ({u}, {v}) has an endpoint out of range for n = {}",
                    self.n
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("edge {idx} is a self-loop on node {u}")));
            }
        }
        if self.features.nrows() != self.n {
            return Err(Error::InvalidGraph(format!(
                "feature matrix has {} rows but the graph has {} nodes",
                self.features.nrows(),
                self.n
            )));
        }
        if self.features.ncols() == 0 {
            return Err(Error::InvalidGraph("feature dimension must be at least 1".into()));
        }
        match &self.ground_truth {
            Some(GroundTruth::Partition(p)) if p.labels().len() != self.n => {
                return Err(Error::InvalidGraph(format!(
                    "ground-truth partition covers {} nodes, graph has {}",
                    p.labels().len(),
                    self.n
                )));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn ground_truth(&self) -> Option<&GroundTruth> {
        self.ground_truth.as_ref()
    }

    /// Degree of each node: the number of stored edges incident to it.
    pub fn degrees(&self) -> DegreeVector {
        let mut d = vec![0usize; self.n];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        DegreeVector(d)
    }

    /// Binary adjacency matrix as sparse symmetric storage.
    pub fn adjacency(&self) -> SparseSymMatrix {
        let mut triplets = Vec::with_capacity(2 * self.edges.len());
        for &(u, v) in &self.edges {
            triplets.push((u, v, 1.0));
            triplets.push((v, u, 1.0));
        }
        SparseSymMatrix::from_triplets(self.n, triplets)
    }

    /// Normalized adjacency with self-loops: D̃^{-1/2} (A + I) D̃^{-1/2}
    /// where D̃ is the degree matrix of A + I (so D̃_ii = d_i + 1).
    pub fn normalized_adjacency(&self) -> SparseSymMatrix {
        let d = self.degrees();
        let inv_sqrt: Vec<f64> = d.0.iter().map(|&di| 1.0 / ((di as f64 + 1.0).sqrt())).collect();
        let mut triplets = Vec::with_capacity(2 * self.edges.len() + self.n);
        for i in 0..self.n {
            triplets.push((i, i, inv_sqrt[i] * inv_sqrt[i]));
        }
        for &(u, v) in &self.edges {
            let w = inv_sqrt[u] * inv_sqrt[v];
            triplets.push((u, v, w));
            triplets.push((v, u, w));
        }
        SparseSymMatrix::from_triplets(self.n, triplets)
    }
}

/// Structurally symmetric sparse matrix in CSR layout.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Build from (row, col, value) triplets. Duplicate positions are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < n && c < n);
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for (r, c, v) in merged {
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSymMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(pos) => self.values[lo + pos],
            Err(_) => 0.0,
        }
    }

    /// Iterate nonzeros as (row, col, value).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (i, self.col_idx[p], self.values[p]))
        })
    }

    /// Sparse-dense product `self * x`.
    pub fn mul_dense(&self, x: &Array2<f64>) -> Array2<f64> {
        assert_eq!(self.n, x.nrows(), "sparse-dense shape mismatch");
        let k = x.ncols();
        let mut out = Array2::<f64>::zeros((self.n, k));
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[p];
                let v = self.values[p];
                for c in 0..k {
                    out[[i, c]] += v * x[[j, c]];
                }
            }
        }
        out
    }

    /// Sparse-vector product `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.n, v.len());
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[i] += self.values[p] * v[self.col_idx[p]];
            }
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.iter().all(|(i, j, v)| (self.get(j, i) - v).abs() <= tol)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::<f64>::zeros((self.n, self.n));
        for (i, j, v) in self.iter() {
            out[[i, j]] = v;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::bowtie;
    use ndarray::Array2;

    fn features(n: usize) -> Array2<f64> {
        Array2::eye(n)
    }

    #[test]
    fn bowtie_degrees() {
        let g = bowtie();
        assert_eq!(g.degrees().0, vec![2, 2, 4, 2, 2]);
    }

    #[test]
    fn triangle_degrees_regular() {
        let g = AttributedGraph::new(3, vec![(0, 1), (0, 2), (1, 2)], features(3), None).unwrap();
        assert_eq!(g.degrees().0, vec![2, 2, 2]);
    }

    #[test]
    fn isolated_node_zero_degree() {
        let g = AttributedGraph::new(3, vec![(0, 1)], features(3), None).unwrap();
        assert_eq!(g.degrees().0, vec![1, 1, 0]);
    }

    #[test]
    fn degree_sum_is_twice_edges() {
        let g = bowtie();
        let sum: usize = g.degrees().0.iter().sum();
        assert_eq!(sum, 2 * g.num_edges());
    }

    #[test]
    fn adjacency_single_edge() {
        let g = AttributedGraph::new(2, vec![(0, 1)], features(2), None).unwrap();
        let a = g.adjacency();
        assert_eq!(a.get(0, 1), 1.0);
        assert_eq!(a.get(1, 0), 1.0);
        assert_eq!(a.get(0, 0), 0.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn adjacency_bowtie_nnz() {
        let g = bowtie();
        assert_eq!(g.adjacency().nnz(), 2 * g.num_edges());
    }

    #[test]
    fn adjacency_empty_edge_set() {
        let g = AttributedGraph::new(3, vec![], features(3), None).unwrap();
        assert_eq!(g.adjacency().nnz(), 0);
    }

    #[test]
    fn normalized_adjacency_single_edge() {
        let g = AttributedGraph::new(2, vec![(0, 1)], features(2), None).unwrap();
        let a = g.normalized_adjacency();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.get(i, j) - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn normalized_adjacency_isolated_node() {
        let g = AttributedGraph::new(1, vec![], Array2::ones((1, 1)), None).unwrap();
        let a = g.normalized_adjacency();
        assert!((a.get(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalized_adjacency_bowtie_center() {
        let g = bowtie();
        let a = g.normalized_adjacency();
        // node v3 has degree 4, so D̃_33 = 5 and the diagonal entry is 1/5
        assert!((a.get(2, 2) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn normalized_adjacency_symmetric_with_unit_eigenvector() {
        let g = bowtie();
        let a = g.normalized_adjacency();
        assert!(a.is_symmetric(1e-12));
        // D̃^{1/2}·1 is an eigenvector with eigenvalue 1
        let v: Vec<f64> = g.degrees().0.iter().map(|&d| (d as f64 + 1.0).sqrt()).collect();
        let av = a.mul_vec(&v);
        let residual: f64 = av.iter().zip(&v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(residual < 1e-10, "residual {residual}");
    }

    #[test]
    fn validate_rejects_out_of_range() {
        let err = AttributedGraph::new(5, vec![(0, 7)], features(5), None).unwrap_err();
        assert!(err.to_string().contains("out of range"));
    }

    #[test]
    fn validate_rejects_self_loop() {
        let err = AttributedGraph::new(3, vec![(1, 1)], features(3), None).unwrap_err();
        assert!(err.to_string().contains("self-loop"));
    }

    #[test]
    fn validate_rejects_duplicate_edge() {
        let err = AttributedGraph::new(3, vec![(0, 1), (1, 0)], features(3), None).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn validate_rejects_feature_row_mismatch() {
        let err =
            AttributedGraph::new(5, vec![(0, 1)], Array2::ones((4, 3)), None).unwrap_err();
        assert!(err.to_string().contains("feature"));
    }

    #[test]
    fn bowtie_with_features_ok() {
        let g = AttributedGraph::new(
            5,
            vec![(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)],
            Array2::ones((5, 3)),
            None,
        )
        .unwrap();
        assert!(g.validate().is_ok());
    }
}
