//! Hard/overlapping assignment extraction and ground-truth comparison
//! metrics: NMI, overlapping NMI, pairwise F1, best-match recall.

use crate::error::{Error, Result};
use crate::modularity::CommunityAssignment;
use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Hard community labels: exactly one community id in [0, k) per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::param("labels", format!("label {bad} out of range for k = {k}")));
        }
        Ok(Partition { labels, k })
    }

    /// Infer k as max label + 1.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        Partition { labels, k }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_communities(&self) -> usize {
        self.k
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }
}

/// Overlapping community structure: k node sets with every node in at
/// least one set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    sets: Vec<BTreeSet<usize>>,
    n: usize,
}

impl Cover {
    pub fn new(sets: Vec<BTreeSet<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for s in &sets {
            for &v in s {
                if v >= n {
                    return Err(Error::param("cover", format!("node {v} out of range for n = {n}")));
                }
                seen[v] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::param("cover", format!("node {missing} belongs to no community")));
        }
        Ok(Cover { sets, n })
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn from_partition(p: &Partition) -> Self {
        let mut sets = vec![BTreeSet::new(); p.num_communities()];
        for (i, &l) in p.labels().iter().enumerate() {
            sets[l].insert(i);
        }
        sets.retain(|s| !s.is_empty());
        Cover { sets, n: p.num_nodes() }
    }
}

/// argmax per row, ties broken toward the lowest column index.
pub fn hard_assign(c: &CommunityAssignment) -> Partition {
    let m = c.matrix();
    let labels = m
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0usize;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect();
    Partition {
        labels,
        k: c.num_communities(),
    }
}

/// Overlap threshold p₁ = (1/nk)·Σ_ij exp(c_ij).
pub fn threshold_p1(c: &CommunityAssignment) -> f64 {
    let m = c.matrix();
    m.iter().map(|&v| v.exp()).sum::<f64>() / (m.len() as f64)
}

/// Node i joins community j iff exp(c_ij) ≥ p; nodes qualifying nowhere
/// fall back to their argmax community so every node stays covered.
pub fn overlap_assign(c: &CommunityAssignment, p: f64) -> Cover {
    let m = c.matrix();
    let (n, k) = (m.nrows(), m.ncols());
    let mut sets = vec![BTreeSet::new(); k];
    let fallback = hard_assign(c);
    for i in 0..n {
        let mut covered = false;
        for j in 0..k {
            if m[[i, j]].exp() >= p {
                sets[j].insert(i);
                covered = true;
            }
        }
        if !covered {
            sets[fallback.labels()[i]].insert(i);
        }
    }
    sets.retain(|s| !s.is_empty());
    Cover { sets, n }
}

/// Lloyd's algorithm with k-means++ seeding on row vectors.
/// Empty clusters are reseeded from the point farthest from its centroid.
pub fn kmeans_assign(h: &Array2<f64>, k: usize, seed: u64) -> Result<Partition> {
    let n = h.nrows();
    if n < k {
        return Err(Error::param("k", format!("k = {k} exceeds the number of points {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = h.ncols();

    let dist2 = |a: usize, c: &[f64]| -> f64 {
        (0..dim).map(|j| (h[[a, j]] - c[j]) * (h[[a, j]] - c[j])).sum()
    };

    // k-means++ initialization
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.gen_range(0..n);
    centroids.push(h.row(first).to_vec());
    while centroids.len() < k {
        let d2: Vec<f64> = (0..n)
            .map(|i| {
                centroids
                    .iter()
                    .map(|c| dist2(i, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.push(h.row(next).to_vec());
    }

    let mut labels = vec![0usize; n];
    for _iter in 0..300 {
        for (i, label) in labels.iter_mut().enumerate() {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, cent) in centroids.iter().enumerate() {
                let d = dist2(i, cent);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            *label = best;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for j in 0..dim {
                sums[l][j] += h[[i, j]];
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                // reseed from the point farthest from its own centroid
                let far = (0..n)
                    .max_by(|&a, &b| {
                        dist2(a, &centroids[labels[a]])
                            .partial_cmp(&dist2(b, &centroids[labels[b]]))
                            .unwrap()
                    })
                    .unwrap();
                centroids[c] = h.row(far).to_vec();
                shift = f64::INFINITY;
                continue;
            }
            let mut s = 0.0;
            for j in 0..dim {
                let new = sums[c][j] / counts[c] as f64;
                s += (new - centroids[c][j]) * (new - centroids[c][j]);
                centroids[c][j] = new;
            }
            shift = shift.max(s.sqrt());
        }
        if shift < 1e-8 {
            break;
        }
    }
    Ok(Partition { labels, k })
}

fn entropy_from_counts(counts: &[usize], n: usize) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

/// NMI between two hard partitions: I(a;b)/sqrt(H(a)·H(b)), natural logs.
pub fn nmi(a: &Partition, b: &Partition) -> Result<f64> {
    if a.num_nodes() != b.num_nodes() {
        return Err(Error::dim("nmi", a.num_nodes(), b.num_nodes()));
    }
    let n = a.num_nodes();
    let (ka, kb) = (a.k, b.k);
    let mut joint = vec![vec![0usize; kb]; ka];
    let mut ca = vec![0usize; ka];
    let mut cb = vec![0usize; kb];
    for i in 0..n {
        joint[a.labels[i]][b.labels[i]] += 1;
        ca[a.labels[i]] += 1;
        cb[b.labels[i]] += 1;
    }
    let ha = entropy_from_counts(&ca, n);
    let hb = entropy_from_counts(&cb, n);
    if ha < 1e-12 && hb < 1e-12 {
        // both are single effective clusters, hence identical structure
        return Ok(1.0);
    }
    if ha < 1e-12 || hb < 1e-12 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let nxy = joint[x][y];
            if nxy == 0 {
                continue;
            }
            let pxy = nxy as f64 / n as f64;
            mi += pxy * (pxy * n as f64 * n as f64 / (ca[x] as f64 * cb[y] as f64)).ln();
        }
    }
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

fn h_term(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.ln()
    }
}

fn binary_entropy(p: f64) -> f64 {
    h_term(p) + h_term(1.0 - p)
}

/// H(X_k | Y_l) with the McDaid admissibility constraint; falls back to
/// H(X_k) when the constraint h(a)+h(d) >= h(b)+h(c) is violated.
fn conditional_set_entropy(xk: &BTreeSet<usize>, yl: &BTreeSet<usize>, n: usize) -> f64 {
    let inter = xk.intersection(yl).count() as f64;
    let nx = xk.len() as f64;
    let ny = yl.len() as f64;
    let nf = n as f64;
    let a = inter / nf; // in both
    let b = (nx - inter) / nf; // X only
    let c = (ny - inter) / nf; // Y only
    let d = (nf - nx - ny + inter) / nf; // neither
    if h_term(a) + h_term(d) >= h_term(b) + h_term(c) {
        // H(X,Y) - H(Y)
        h_term(a) + h_term(b) + h_term(c) + h_term(d) - binary_entropy(ny / nf)
    } else {
        binary_entropy(nx / nf)
    }
}

fn cover_conditional_entropy(x: &Cover, y: &Cover) -> f64 {
    x.sets
        .iter()
        .map(|xk| {
            y.sets
                .iter()
                .map(|yl| conditional_set_entropy(xk, yl, x.n))
                .fold(binary_entropy(xk.len() as f64 / x.n as f64), f64::min)
        })
        .sum()
}

fn cover_entropy(x: &Cover) -> f64 {
    x.sets
        .iter()
        .map(|s| binary_entropy(s.len() as f64 / x.n as f64))
        .sum()
}

/// Overlapping NMI between covers (McDaid et al. max-normalized variant).
pub fn onmi(a: &Cover, b: &Cover) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::dim("onmi", a.n, b.n));
    }
    if a.sets.is_empty() || b.sets.is_empty() {
        return Err(Error::param("cover", "cannot compare an empty cover"));
    }
    let ha = cover_entropy(a);
    let hb = cover_entropy(b);
    if ha < 1e-12 && hb < 1e-12 {
        return Ok(1.0);
    }
    let h_a_given_b = cover_conditional_entropy(a, b);
    let h_b_given_a = cover_conditional_entropy(b, a);
    let mi = 0.5 * ((ha - h_a_given_b) + (hb - h_b_given_a));
    Ok((mi / ha.max(hb)).clamp(0.0, 1.0))
}

/// Pairwise F1 over all node pairs; positives are pairs co-assigned in the
/// ground truth `truth`. F1 is 0 by convention when there are no true positives.
pub fn pairwise_f1(truth: &Partition, pred: &Partition) -> Result<f64> {
    if truth.num_nodes() != pred.num_nodes() {
        return Err(Error::dim("pairwise_f1", truth.num_nodes(), pred.num_nodes()));
    }
    let n = truth.num_nodes();
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for i in 0..n {
        for j in (i + 1)..n {
            let same_t = truth.labels[i] == truth.labels[j];
            let same_p = pred.labels[i] == pred.labels[j];
            match (same_t, same_p) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Average, over ground-truth communities, of the best recall achieved by
/// any predicted community.
pub fn recall_best_match(truth: &Cover, pred: &Cover) -> Result<f64> {
    if truth.sets.is_empty() || pred.sets.is_empty() {
        return Err(Error::param("cover", "cannot compare an empty cover"));
    }
    let total: f64 = truth
        .sets
        .iter()
        .map(|t| {
            pred.sets
                .iter()
                .map(|p| t.intersection(p).count() as f64 / t.len() as f64)
                .fold(0.0, f64::max)
        })
        .sum();
    Ok(total / truth.sets.len() as f64)
}
