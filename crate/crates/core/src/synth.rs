//! Synthetic temporal graph with planted anomalous nodes.
//!
//! Authentic nodes connect by independent Erdős–Rényi draws in every
//! snapshot. The anomalous nodes (the last `floor(a * n)` indices) form an
//! empty subgraph at even snapshot indices and a clique at odd ones.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeTable, Snapshot, TemporalGraph};

/// Name of the generator recorded in manifests.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.3, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeLabel {
    Normal,
    Anomaly,
}

impl NodeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::Anomaly => "anomaly",
        }
    }
}

impl std::str::FromStr for NodeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "normal" => Ok(Self::Normal),
            "anomaly" => Ok(Self::Anomaly),
            other => Err(Error::Format(format!("unknown label `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n: usize,
    /// Authentic connection probability.
    pub p: f64,
    /// Anomalous fraction of `n`.
    pub a: f64,
    pub snapshots: usize,
    pub seed: u64,
    /// Also draw anomalous-authentic edges with probability `p`.
    #[serde(default)]
    pub cross_edges: bool,
    /// Permute external names so index order reveals nothing.
    #[serde(default)]
    pub shuffle_names: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 500,
            p: 0.0025,
            a: 0.05,
            snapshots: 5,
            seed: 0,
            cross_edges: false,
            shuffle_names: false,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::param("p", format!("must lie in [0, 1], got {}", self.p)));
        }
        if !(0.0..=1.0).contains(&self.a) {
            return Err(Error::param("a", format!("must lie in [0, 1], got {}", self.a)));
        }
        if self.snapshots < 2 {
            return Err(Error::TooFewSnapshots(self.snapshots));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::param("n", "too many nodes"));
        }
        Ok(())
    }

    pub fn anomaly_count(&self) -> usize {
        (self.a * self.n as f64).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGraph {
    pub graph: TemporalGraph,
    /// Indexed by internal node id.
    pub labels: Vec<NodeLabel>,
}

pub fn generate(cfg: &SynthConfig) -> Result<SyntheticGraph> {
    cfg.validate()?;
    let n = cfg.n;
    let first_anomaly = n - cfg.anomaly_count();
    let is_anomaly = |i: usize| i >= first_anomaly;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut snapshots = Vec::with_capacity(cfg.snapshots);
    for t in 0..cfg.snapshots {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let draw = match (is_anomaly(u), is_anomaly(v)) {
                    (false, false) => true,
                    (true, true) => {
                        if t % 2 == 1 {
                            edges.push((NodeId(u as u32), NodeId(v as u32)));
                        }
                        false
                    }
                    _ => cfg.cross_edges,
                };
                if draw && rng.gen_bool(cfg.p) {
                    edges.push((NodeId(u as u32), NodeId(v as u32)));
                }
            }
        }
        snapshots.push(Snapshot::from_edges(n, edges)?);
    }

    let mut names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    if cfg.shuffle_names {
        names.shuffle(&mut rng);
    }
    let labels = (0..n)
        .map(|i| if is_anomaly(i) { NodeLabel::Anomaly } else { NodeLabel::Normal })
        .collect();
    Ok(SyntheticGraph {
        graph: TemporalGraph::new(NodeTable::from_names(names)?, snapshots)?,
        labels,
    })
}
