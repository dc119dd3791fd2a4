//! Exhaustive minimization of the contrastive loss over discretized
//! assignments on tiny graphs — the ground truth the trained model and the
//! loss implementation are checked against.

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::loss::{loss_raw, target_vector, LossConfig, Permutation};
use crate::modularity::qm_raw;
use ndarray::Array2;
use std::io::Write;

/// Discretization grid for the exhaustive search.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub levels: Vec<f64>,
    pub k: usize,
    pub max_nodes: usize,
    pub budget: u128,
}

impl GridSpec {
    pub fn new(levels: Vec<f64>, k: usize) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::param("levels", "need at least 2 membership levels"));
        }
        if !levels.iter().any(|&v| v == 0.0) || !levels.iter().any(|&v| v == 1.0) {
            return Err(Error::param("levels", "levels must contain 0 and 1"));
        }
        if levels.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::param("levels", "levels must lie in [0, 1]"));
        }
        Ok(GridSpec {
            levels,
            k,
            max_nodes: 8,
            budget: 100_000_000,
        })
    }

    /// The default {0, 0.5, 1} grid.
    pub fn default_grid(k: usize) -> Self {
        GridSpec::new(vec![0.0, 0.5, 1.0], k).expect("default grid is valid")
    }
}

/// One entry of the ranked listing, canonicalized over column permutations.
#[derive(Debug, Clone)]
pub struct RankedEntry {
    pub assignment: Array2<f64>,
    pub loss: f64,
}

/// Result of an exhaustive search.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub best: Array2<f64>,
    pub best_loss: f64,
    /// All distinct assignments (up to column order), best first.
    pub ranked: Vec<RankedEntry>,
    pub evaluations: u128,
}

fn canonical_key(c: &Array2<f64>) -> Vec<u64> {
    let (n, k) = (c.nrows(), c.ncols());
    let mut cols: Vec<Vec<u64>> = (0..k)
        .map(|j| (0..n).map(|i| c[[i, j]].to_bits()).collect())
        .collect();
    cols.sort();
    cols.into_iter().flatten().collect()
}

/// Enumerate every levels^(n·k) assignment (excluding those with an
/// all-zero column), evaluate the loss on each, and return the global
/// argmin plus a ranked, column-permutation-deduplicated listing.
pub fn exhaustive_min(
    g: &AttributedGraph,
    grid: &GridSpec,
    cfg: &LossConfig,
    perm: &Permutation,
) -> Result<OracleResult> {
    if g.num_edges() == 0 {
        return Err(Error::ZeroEdgeGraph);
    }
    let n = g.num_nodes();
    let k = grid.k;
    if n > grid.max_nodes {
        return Err(Error::param(
            "graph",
            format!("exhaustive search is capped at {} nodes, got {n}", grid.max_nodes),
        ));
    }
    let cells = n * k;
    let space = (grid.levels.len() as u128)
        .checked_pow(cells as u32)
        .unwrap_or(u128::MAX);
    if space > grid.budget {
        return Err(Error::BudgetExceeded {
            evaluations: space,
            budget: grid.budget,
        });
    }

    let y = target_vector(k, cfg.delta)?;
    let adj = g.adjacency();
    let degrees = g.degrees().as_f64();
    let m_edges = g.num_edges();

    let mut best: Option<(f64, Array2<f64>)> = None;
    let mut seen: std::collections::HashMap<Vec<u64>, f64> = std::collections::HashMap::new();
    let mut ranked: Vec<RankedEntry> = Vec::new();
    let mut digits = vec![0usize; cells];
    let mut evaluations: u128 = 0;

    loop {
        let c = Array2::from_shape_fn((n, k), |(i, j)| grid.levels[digits[i * k + j]]);
        let has_zero_column = (0..k).any(|j| (0..n).all(|i| c[[i, j]] == 0.0));
        if !has_zero_column {
            evaluations += 1;
            let mat = if cfg.amplify {
                crate::loss::amplify_raw(&c, cfg.epsilon)
            } else {
                c.clone()
            };
            let qm = qm_raw(&adj, &degrees, m_edges, &mat);
            let loss = loss_raw(&qm, &y, perm);
            let key = canonical_key(&c);
            if !seen.contains_key(&key) {
                seen.insert(key, loss);
                ranked.push(RankedEntry {
                    assignment: c.clone(),
                    loss,
                });
            }
            match &best {
                Some((bl, _)) if *bl <= loss => {}
                _ => best = Some((loss, c)),
            }
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == cells {
                let (best_loss, best) = best.ok_or_else(|| {
                    Error::param("grid", "search space contains no valid assignment")
                })?;
                ranked.sort_by(|a, b| a.loss.partial_cmp(&b.loss).unwrap());
                return Ok(OracleResult {
                    best,
                    best_loss,
                    ranked,
                    evaluations,
                });
            }
            digits[pos] += 1;
            if digits[pos] < grid.levels.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// One row of the configuration sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub delta: f64,
    pub amplify: bool,
    /// Loss values of the named reference assignments, in input order.
    pub reference_losses: Vec<f64>,
    pub min_loss: f64,
    pub argmin: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub reference_names: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = vec!["delta".to_string(), "amplify".to_string()];
        for name in &self.reference_names {
            header.push(format!("loss_{name}"));
        }
        header.push("min_loss".into());
        header.push("argmin".into());
        header.push("matches_reported_constants".into());
        writeln!(w, "{}", header.join(","))?;
        for row in &self.rows {
            let mut fields = vec![format!("{}", row.delta), format!("{}", row.amplify)];
            for l in &row.reference_losses {
                fields.push(format!("{l:.6}"));
            }
            fields.push(format!("{:.6}", row.min_loss));
            let enc: Vec<String> = row.argmin.iter().map(|v| format!("{v}")).collect();
            fields.push(enc.join(";"));
            // whether any reference pair reproduces the 0.124 / 0.094 pair
            let matches = row.reference_losses.len() >= 2
                && (row.reference_losses[0] - 0.124).abs() < 0.005
                && (row.reference_losses[1] - 0.094).abs() < 0.005;
            fields.push(format!("{matches}"));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Evaluate the loss of each named reference assignment and the global
/// argmin under every configuration in {δ ∈ {0, 0.85}} × {amplify off/on}.
pub fn config_sweep(
    g: &AttributedGraph,
    grid: &GridSpec,
    perm: &Permutation,
    references: &[(String, Array2<f64>)],
) -> Result<SweepTable> {
    let adj = g.adjacency();
    let degrees = g.degrees().as_f64();
    let m_edges = g.num_edges();
    let mut rows = Vec::new();
    for &delta in &[0.0, 0.85] {
        for &amplify in &[false, true] {
            let cfg = LossConfig {
                delta,
                amplify,
                ..LossConfig::default()
            };
            let y = target_vector(grid.k, delta)?;
            let reference_losses = references
                .iter()
                .map(|(_, c)| {
                    let mat = if amplify {
                        crate::loss::amplify_raw(c, cfg.epsilon)
                    } else {
                        c.clone()
                    };
                    loss_raw(&qm_raw(&adj, &degrees, m_edges, &mat), &y, perm)
                })
                .collect();
            let result = exhaustive_min(g, grid, &cfg, perm)?;
            rows.push(SweepRow {
                delta,
                amplify,
                reference_losses,
                min_loss: result.best_loss,
                argmin: result.best,
            });
        }
    }
    Ok(SweepTable {
        reference_names: references.iter().map(|(n, _)| n.clone()).collect(),
        rows,
    })
}

/// The bowtie's non-overlapping and optimal overlapping assignments.
pub fn bowtie_references() -> Vec<(String, Array2<f64>)> {
    vec![
        (
            "cn".to_string(),
            ndarray::array![
                [1.0, 0.0],
                [1.0, 0.0],
                [0.0, 1.0],
                [0.0, 1.0],
                [0.0, 1.0]
            ],
        ),
        (
            "co".to_string(),
            ndarray::array![
                [1.0, 0.0],
                [1.0, 0.0],
                [0.5, 0.5],
                [0.0, 1.0],
                [0.0, 1.0]
            ],
        ),
    ]
}
