//! Unified overlapping and non-overlapping community detection on
//! attributed graphs: a two-layer graph convolutional encoder trained with
//! a contrastive community-modularity loss, plus the exhaustive oracle,
//! synthetic benchmark generation, and evaluation metrics around it.

pub mod data;
pub mod error;
pub mod gcn;
pub mod graph;
pub mod loss;
pub mod metrics;
pub mod modularity;
pub mod oracle;
pub mod trainer;

pub use error::{Error, Result};
pub use graph::{AttributedGraph, DegreeVector, GroundTruth, SparseSymMatrix};
pub use loss::{LossConfig, PermPolicy, Permutation};
pub use metrics::{Cover, Partition};
pub use modularity::{CommunityAssignment, CommunityModularityMatrix, ModularityNorm};
pub use trainer::{EvalMode, MetricsReport, TrainConfig, TrainOutcome};
