//! End-to-end training loop and the evaluation battery.

use crate::error::{Error, Result};
use crate::gcn::{adam_step, backward, forward, AdamState, ForwardMode, ModelParams};
use crate::graph::{AttributedGraph, GroundTruth};
use crate::loss::{
    amplify_backward, amplify_raw, loss_and_grad_matrix, sample_permutation, target_vector,
    LossConfig, PermPolicy,
};
use crate::metrics::{
    hard_assign, nmi, onmi, overlap_assign, pairwise_f1, recall_best_match, threshold_p1, Cover,
    Partition,
};
use crate::modularity::{conductance, modularity_score, CommunityAssignment, ModularityNorm};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

/// All knobs of a training run. Defaults follow the non-overlapping setup:
/// 1000 epochs, lr 1e-3, hidden 256, k = 16, weight decay 1e-1. The
/// overlapping setup uses hidden 128, weight decay 1e-2 and δ = 0.85.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub hidden: usize,
    pub k: usize,
    pub delta: f64,
    pub weight_decay: f64,
    pub seed: u64,
    pub amplify: bool,
    pub perm_policy: PermPolicy,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            lr: 1e-3,
            hidden: 256,
            k: 16,
            delta: 0.0,
            weight_decay: 1e-1,
            seed: 0,
            amplify: false,
            perm_policy: PermPolicy::ResampleEachEpoch,
        }
    }
}

impl TrainConfig {
    /// Defaults for the overlapping setup.
    pub fn overlapping() -> Self {
        TrainConfig {
            hidden: 128,
            weight_decay: 1e-2,
            delta: 0.85,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::param("epochs", "must be at least 1"));
        }
        if self.lr <= 0.0 {
            return Err(Error::param("lr", "must be positive"));
        }
        if self.k < 2 {
            return Err(Error::param("k", "need at least 2 communities"));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::param("delta", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// One record per completed epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub trace_qm: f64,
    /// standard_half modularity of the clamped assignment
    pub modularity: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainHistory {
    /// CSV export. Wall time is deliberately left out so re-runs with the
    /// same seed produce byte-identical files; timing lives in the manifest.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epoch,loss,trace_qm,modularity")?;
        for r in &self.records {
            writeln!(w, "{},{:?},{:?},{:?}", r.epoch, r.loss, r.trace_qm, r.modularity)?;
        }
        Ok(())
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.loss)
    }

    /// Mean loss over the first and last `fraction` of the epochs.
    pub fn head_tail_means(&self, fraction: f64) -> (f64, f64) {
        let n = self.records.len();
        let span = ((n as f64 * fraction).ceil() as usize).max(1);
        let head: f64 = self.records[..span].iter().map(|r| r.loss).sum::<f64>() / span as f64;
        let tail: f64 = self.records[n - span..].iter().map(|r| r.loss).sum::<f64>() / span as f64;
        (head, tail)
    }
}

/// Result of a full training run.
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: TrainHistory,
    /// Raw (unclamped) final output of an eval-mode forward pass.
    pub raw_output: ndarray::Array2<f64>,
    /// The [0,1]-clamped assignment consumed by metrics.
    pub assignment: CommunityAssignment,
}

/// Full-batch training: each epoch runs forward (train mode), the
/// contrastive loss with a sampled derangement, backward, and one Adam
/// step. Deterministic given the seed.
pub fn train(g: &AttributedGraph, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if g.num_edges() == 0 {
        return Err(Error::ZeroEdgeGraph);
    }
    let n = g.num_nodes();
    if n < 2 {
        return Err(Error::param("graph", "training needs at least 2 nodes"));
    }

    let ahat = g.normalized_adjacency();
    let adj = g.adjacency();
    let degrees = g.degrees().as_f64();
    let m_edges = g.num_edges();
    let x = g.features();
    let y = target_vector(cfg.k, cfg.delta)?;
    let loss_cfg = LossConfig {
        delta: cfg.delta,
        amplify: cfg.amplify,
        perm_policy: cfg.perm_policy,
        ..LossConfig::default()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = ModelParams::init(g.feature_dim(), cfg.hidden, cfg.k, &mut rng);
    let mut state = AdamState::new(&params);
    let fixed_perm = sample_permutation(cfg.k, &mut rng);

    let mut history = TrainHistory::default();
    let start = Instant::now();
    for epoch in 0..cfg.epochs {
        let perm = match loss_cfg.perm_policy {
            PermPolicy::FixedDerangement => fixed_perm.clone(),
            PermPolicy::ResampleEachEpoch => sample_permutation(cfg.k, &mut rng),
        };
        let cache = forward(&ahat, x, &mut params, ForwardMode::Train(&mut rng))?;
        let raw = &cache.output;

        let (loss, grad_raw) = if cfg.amplify {
            let clamped = raw.mapv(|v| v.clamp(0.0, 1.0));
            let amp = amplify_raw(&clamped, loss_cfg.epsilon);
            let (loss, grad_amp) = loss_and_grad_matrix(&adj, &degrees, m_edges, &amp, &y, &perm);
            let mut grad = amplify_backward(&clamped, &grad_amp, loss_cfg.epsilon);
            // clamp passes gradient only inside (0, 1)
            ndarray::Zip::from(&mut grad).and(raw).for_each(|g, &r| {
                if !(0.0..=1.0).contains(&r) {
                    *g = 0.0;
                }
            });
            (loss, grad)
        } else {
            loss_and_grad_matrix(&adj, &degrees, m_edges, raw, &y, &perm)
        };
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, value: loss });
        }

        let grads = backward(&ahat, &cache, &params, &grad_raw)?;
        adam_step(&mut params, &grads, &mut state, cfg.lr, cfg.weight_decay);

        // reporting: trace Q_M and standard modularity of the clamped output
        let clamped = raw.mapv(|v| v.clamp(0.0, 1.0));
        let qm = crate::modularity::qm_raw(&adj, &degrees, m_edges, &clamped);
        let trace_qm: f64 = qm.diag().sum();
        history.records.push(EpochRecord {
            epoch,
            loss,
            trace_qm,
            modularity: trace_qm / (2.0 * m_edges as f64),
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    params.assert_finite()?;
    let eval_cache = forward(&ahat, x, &mut params, ForwardMode::Eval)?;
    let raw_output = eval_cache.output;
    let assignment = CommunityAssignment::from_clamped(&raw_output)?;
    Ok(TrainOutcome {
        params,
        history,
        raw_output,
        assignment,
    })
}

/// Which assignment semantics an evaluation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    Hard,
    Overlap,
}

/// Metric name → value. Values are on the raw [0, 1] scale; use
/// [`MetricsReport::scaled`] for the ×100 reporting convention.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub nmi: Option<f64>,
    pub onmi: Option<f64>,
    pub f1: Option<f64>,
    pub recall: Option<f64>,
    pub conductance: Option<f64>,
    pub modularity_standard: Option<f64>,
    pub modularity_paper: Option<f64>,
}

impl MetricsReport {
    pub fn scaled(&self) -> MetricsReport {
        let s = |v: Option<f64>| v.map(|x| x * 100.0);
        MetricsReport {
            nmi: s(self.nmi),
            onmi: s(self.onmi),
            f1: s(self.f1),
            recall: s(self.recall),
            conductance: s(self.conductance),
            modularity_standard: s(self.modularity_standard),
            modularity_paper: s(self.modularity_paper),
        }
    }

    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        [
            ("nmi", self.nmi),
            ("onmi", self.onmi),
            ("f1", self.f1),
            ("recall", self.recall),
            ("conductance", self.conductance),
            ("modularity_standard", self.modularity_standard),
            ("modularity_paper", self.modularity_paper),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

/// Score an assignment against ground truth. Hard mode compares argmax
/// labels; overlap mode thresholds at p₁ and compares covers.
pub fn evaluate(
    g: &AttributedGraph,
    c: &CommunityAssignment,
    truth: &GroundTruth,
    mode: EvalMode,
) -> Result<MetricsReport> {
    let mut report = MetricsReport::default();
    let hard = hard_assign(c);
    match (mode, truth) {
        (EvalMode::Hard, GroundTruth::Partition(t)) => {
            report.nmi = Some(nmi(t, &hard)?);
            report.f1 = Some(pairwise_f1(t, &hard)?);
        }
        (EvalMode::Hard, GroundTruth::Cover(_)) => {
            return Err(Error::param("mode", "hard evaluation needs a partition ground truth"));
        }
        (EvalMode::Overlap, GroundTruth::Cover(t)) => {
            let cover = overlap_assign(c, threshold_p1(c));
            report.onmi = Some(onmi(t, &cover)?);
            report.recall = Some(recall_best_match(t, &cover)?);
        }
        (EvalMode::Overlap, GroundTruth::Partition(t)) => {
            let cover = overlap_assign(c, threshold_p1(c));
            let truth_cover = Cover::from_partition(t);
            report.onmi = Some(onmi(&truth_cover, &cover)?);
            report.recall = Some(recall_best_match(&truth_cover, &cover)?);
        }
    }
    report.conductance = Some(conductance(g, &hard)?.mean);
    report.modularity_standard = Some(modularity_score(g, c, ModularityNorm::StandardHalf)?);
    report.modularity_paper = Some(modularity_score(g, c, ModularityNorm::PaperQuarter)?);
    Ok(report)
}

/// Compare two covers or partitions loaded from files (CLI eval path).
pub fn evaluate_predictions(
    pred: &GroundTruth,
    truth: &GroundTruth,
    g: Option<&AttributedGraph>,
) -> Result<MetricsReport> {
    let mut report = MetricsReport::default();
    match (truth, pred) {
        (GroundTruth::Partition(t), GroundTruth::Partition(p)) => {
            report.nmi = Some(nmi(t, p)?);
            report.f1 = Some(pairwise_f1(t, p)?);
            if let Some(g) = g {
                report.conductance = Some(conductance(g, p)?.mean);
                let c = partition_to_assignment(p)?;
                report.modularity_standard =
                    Some(modularity_score(g, &c, ModularityNorm::StandardHalf)?);
                report.modularity_paper =
                    Some(modularity_score(g, &c, ModularityNorm::PaperQuarter)?);
            }
        }
        (GroundTruth::Cover(t), GroundTruth::Cover(p)) => {
            report.onmi = Some(onmi(t, p)?);
            report.recall = Some(recall_best_match(t, p)?);
        }
        _ => {
            return Err(Error::param("mode", "prediction and truth kinds must match"));
        }
    }
    Ok(report)
}

fn partition_to_assignment(p: &Partition) -> Result<CommunityAssignment> {
    let k = p.num_communities().max(2);
    let mut c = ndarray::Array2::zeros((p.num_nodes(), k));
    for (i, &l) in p.labels().iter().enumerate() {
        c[[i, l]] = 1.0;
    }
    CommunityAssignment::new(c)
}
