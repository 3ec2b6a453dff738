//! Temporal egonet subgraph-transition embeddings.
//!
//! A node's behaviour between two consecutive graph snapshots is summarized
//! by counting how the induced subgraphs on small node subsets of its
//! (padded) egonet change. Averaged over time, the counts form an embedding
//! that density-based clustering can split into normal and anomalous nodes.
//!
//! Modules, bottom-up:
//!
//! - [`graph`]: snapshots, temporal graphs, egonets and padded egonet pairs
//! - [`catalog`]: canonical enumeration of transition classes
//! - [`embed`]: per-step counting and aggregation
//! - [`synth`]: synthetic graphs with planted anomalies
//! - [`ingest`]: timestamped edge streams and discretization
//! - [`cluster`]: DBSCAN and cluster-to-anomaly rules
//! - [`metrics`]: precision / recall / F1 reports
//! - [`baselines`]: spectral embedding and PCA projection
//! - [`pipeline`]: everything wired together
//!
//! The `parallel` feature (on by default) spreads per-node work over a rayon
//! pool; see [`par::Execution`].

pub mod baselines;
pub mod catalog;
pub mod cluster;
pub mod embed;
mod error;
pub mod formats;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod synth;

pub use catalog::{canonical_code, ExclusionMode, LabeledTransition, TransitionCatalog};
pub use embed::{aggregate, count_step_vector, embed_all, Aggregation, NodeEmbedding, TransitionCountVector};
pub use error::{Error, Result};
pub use graph::{egonet, induced_edges, padded_pair, NodeId, NodeTable, Snapshot, TemporalGraph};
pub use par::Execution;
pub use synth::{NodeLabel, SynthConfig};
