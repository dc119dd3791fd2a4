//! Dataset loading/saving in plain text formats, the builtin bowtie graph,
//! and a seeded synthetic overlapping-SBM generator.
//!
//! Formats: edges.tsv ("u<TAB>v", '#' comments), features.csv (one row per
//! node), labels.txt (one integer per line), cover.tsv ("community<TAB>node").

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, GroundTruth};
use crate::metrics::{Cover, Partition};
use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// File references making up one dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetBundle {
    pub edges: PathBuf,
    pub features: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub cover: Option<PathBuf>,
}

/// A loaded graph plus the original-label-to-index mapping.
#[derive(Debug, Clone)]
pub struct LoadedBundle {
    pub graph: AttributedGraph,
    /// Original node label for each dense index.
    pub node_ids: Vec<String>,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r').trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Load and validate a dataset bundle. Reversed and duplicate edge lines are
/// deduplicated; arbitrary node labels are remapped to dense indices
/// (numeric labels sort numerically, so integer files keep their order).
pub fn load_bundle(b: &DatasetBundle) -> Result<LoadedBundle> {
    let edge_text = fs::read_to_string(&b.edges)?;
    let mut raw_edges: Vec<(String, String)> = Vec::new();
    for (line_no, line) in data_lines(&edge_text) {
        let mut parts = line.split(['\t', ' ']).filter(|p| !p.is_empty());
        let (u, v) = match (parts.next(), parts.next()) {
            (Some(u), Some(v)) => (u.to_string(), v.to_string()),
            _ => return Err(parse_err(&b.edges, line_no, "expected two node labels")),
        };
        raw_edges.push((u, v));
    }

    // collect labels; numeric labels sort by value, otherwise lexicographic
    let mut labels: BTreeSet<&str> = BTreeSet::new();
    for (u, v) in &raw_edges {
        labels.insert(u);
        labels.insert(v);
    }
    let mut node_ids: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    if node_ids.iter().all(|s| s.parse::<u64>().is_ok()) {
        node_ids.sort_by_key(|s| s.parse::<u64>().unwrap());
    }
    let index: BTreeMap<&str, usize> = node_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let n = node_ids.len();

    let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (u, v) in &raw_edges {
        let (ui, vi) = (index[u.as_str()], index[v.as_str()]);
        if ui == vi {
            return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
        }
        edge_set.insert((ui.min(vi), ui.max(vi)));
    }
    let edges: Vec<(usize, usize)> = edge_set.into_iter().collect();

    let features = match &b.features {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let mut rows: Vec<Vec<f64>> = Vec::new();
            for (line_no, line) in data_lines(&text) {
                let row: std::result::Result<Vec<f64>, _> =
                    line.split(',').map(|t| t.trim().parse::<f64>()).collect();
                rows.push(row.map_err(|e| parse_err(path, line_no, e.to_string()))?);
            }
            if rows.len() != n {
                return Err(Error::InvalidGraph(format!(
                    "feature file has {} rows but the edge list references {} nodes",
                    rows.len(),
                    n
                )));
            }
            let l = rows.first().map_or(0, Vec::len);
            if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != l) {
                return Err(parse_err(path, i + 1, format!("expected {l} columns")));
            }
            Array2::from_shape_vec((n, l), rows.into_iter().flatten().collect())
                .expect("row-major feature layout")
        }
        // identity features when no attribute file is supplied
        None => Array2::eye(n),
    };

    let ground_truth = if let Some(path) = &b.labels {
        Some(GroundTruth::Partition(read_partition(path)?))
    } else if let Some(path) = &b.cover {
        Some(GroundTruth::Cover(read_cover(path, n)?))
    } else {
        None
    };

    let graph = AttributedGraph::new(n, edges, features, ground_truth)?;
    Ok(LoadedBundle { graph, node_ids })
}

/// Write a graph out as edges.tsv / features.csv (+ labels.txt or cover.tsv).
pub fn save_bundle(dir: &Path, g: &AttributedGraph) -> Result<DatasetBundle> {
    fs::create_dir_all(dir)?;
    let edges_path = dir.join("edges.tsv");
    let mut f = fs::File::create(&edges_path)?;
    for &(u, v) in g.edges() {
        writeln!(f, "{u}\t{v}")?;
    }
    let features_path = dir.join("features.csv");
    let mut f = fs::File::create(&features_path)?;
    for row in g.features().rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(f, "{}", line.join(","))?;
    }
    let mut bundle = DatasetBundle {
        edges: edges_path,
        features: Some(features_path),
        labels: None,
        cover: None,
    };
    match g.ground_truth() {
        Some(GroundTruth::Partition(p)) => {
            let path = dir.join("labels.txt");
            write_partition(&path, p)?;
            bundle.labels = Some(path);
        }
        Some(GroundTruth::Cover(c)) => {
            let path = dir.join("cover.tsv");
            write_cover(&path, c)?;
            bundle.cover = Some(path);
        }
        None => {}
    }
    Ok(bundle)
}

pub fn read_partition(path: &Path) -> Result<Partition> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (line_no, line) in data_lines(&text) {
        labels.push(
            line.parse::<usize>()
                .map_err(|e| parse_err(path, line_no, e.to_string()))?,
        );
    }
    Ok(Partition::from_labels(labels))
}

pub fn write_partition(path: &Path, p: &Partition) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for &l in p.labels() {
        writeln!(f, "{l}")?;
    }
    Ok(())
}

pub fn read_cover(path: &Path, n: usize) -> Result<Cover> {
    let text = fs::read_to_string(path)?;
    let mut sets: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (line_no, line) in data_lines(&text) {
        let mut parts = line.split(['\t', ' ']).filter(|p| !p.is_empty());
        let (c, v) = match (parts.next(), parts.next()) {
            (Some(c), Some(v)) => (c, v),
            _ => return Err(parse_err(path, line_no, "expected community<TAB>node")),
        };
        let c: usize = c.parse().map_err(|e: std::num::ParseIntError| {
            parse_err(path, line_no, e.to_string())
        })?;
        let v: usize = v.parse().map_err(|e: std::num::ParseIntError| {
            parse_err(path, line_no, e.to_string())
        })?;
        sets.entry(c).or_default().insert(v);
    }
    Cover::new(sets.into_values().collect(), n)
}

pub fn write_cover(path: &Path, c: &Cover) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for (id, set) in c.sets().iter().enumerate() {
        for &v in set {
            writeln!(f, "{id}\t{v}")?;
        }
    }
    Ok(())
}

/// The 5-node, 6-edge bowtie with one-hot identity features and the
/// ground-truth cover {{v1,v2,v3},{v3,v4,v5}} (0-based: {0,1,2} and {2,3,4}).
pub fn bowtie() -> AttributedGraph {
    let edges = vec![(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)];
    let cover = Cover::new(
        vec![
            [0usize, 1, 2].into_iter().collect(),
            [2usize, 3, 4].into_iter().collect(),
        ],
        5,
    )
    .expect("bowtie cover is valid");
    AttributedGraph::new(5, edges, Array2::eye(5), Some(GroundTruth::Cover(cover)))
        .expect("bowtie graph is valid")
}

/// Planted stochastic block model with optional overlap and Gaussian
/// community features.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SbmConfig {
    pub n: usize,
    pub k_planted: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub overlap_fraction: f64,
    pub feature_dim: usize,
    pub feature_separation: f64,
    pub seed: u64,
}

impl SbmConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(name, format!("probability out of range: {p}")));
            }
        }
        if !(0.0..1.0).contains(&self.overlap_fraction) {
            return Err(Error::param("overlap_fraction", "must lie in [0, 1)"));
        }
        if self.k_planted < 2 || self.n < self.k_planted {
            return Err(Error::param("k_planted", "need 2 <= k <= n"));
        }
        if self.feature_dim == 0 {
            return Err(Error::param("feature_dim", "must be at least 1"));
        }
        Ok(())
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Generate a planted-partition graph. Nodes sharing any community are
/// edged with probability p_in, others with p_out; an `overlap_fraction`
/// of nodes joins a second community, recorded in the ground-truth cover.
pub fn sbm_generate(cfg: &SbmConfig) -> Result<AttributedGraph> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n;
    let k = cfg.k_planted;

    // near-equal block sizes by round-robin
    let primary: Vec<usize> = (0..n).map(|i| i % k).collect();
    let mut memberships: Vec<BTreeSet<usize>> = primary.iter().map(|&c| BTreeSet::from([c])).collect();
    let overlap_count = (cfg.overlap_fraction * n as f64).floor() as usize;
    for i in 0..overlap_count {
        let second = (primary[i] + 1 + rng.gen_range(0..k - 1)) % k;
        memberships[i].insert(second);
    }

    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let shared = !memberships[u].is_disjoint(&memberships[v]);
            let p = if shared { cfg.p_in } else { cfg.p_out };
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    // community means on axis-aligned directions, scaled by the separation
    let mut features = Array2::zeros((n, cfg.feature_dim));
    for i in 0..n {
        let mut mean = vec![0.0; cfg.feature_dim];
        for &c in &memberships[i] {
            mean[c % cfg.feature_dim] += cfg.feature_separation;
        }
        let scale = 1.0 / memberships[i].len() as f64;
        for j in 0..cfg.feature_dim {
            features[[i, j]] = mean[j] * scale + standard_normal(&mut rng);
        }
    }

    let mut sets = vec![BTreeSet::new(); k];
    for (i, ms) in memberships.iter().enumerate() {
        for &c in ms {
            sets[c].insert(i);
        }
    }
    let cover = Cover::new(sets, n)?;
    AttributedGraph::new(n, edges, features, Some(GroundTruth::Cover(cover)))
}
