//! End-to-end run: graph -> embeddings -> DBSCAN -> anomaly labels -> report.
//!
//! Every tunable lives in [`PipelineConfig`]; the effective values (with the
//! automatically chosen `eps` filled in) are echoed into the report.

use serde::{Deserialize, Serialize};

use crate::baselines::{pca_project, spectral_embed, union_graph, SpectralParams};
use crate::catalog::{ExclusionMode, TransitionCatalog};
use crate::cluster::{dbscan, distinct_points, k_distances, knee, standardize, to_anomaly_labels, AnomalyRule, ClusterAssignment, DbscanParams};
use crate::embed::{embed_all, Aggregation, NodeEmbedding};
use crate::error::{Error, Result};
use crate::graph::TemporalGraph;
use crate::ingest::DiscretizationSpec;
use crate::metrics::{evaluate, EvalReport};
use crate::par::Execution;
use crate::synth::{generate, NodeLabel, SynthConfig, RNG_ALGORITHM};

/// Used when every k-distance is zero, i.e. all points sit on top of
/// `min_pts` or more duplicates.
pub const FALLBACK_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DbscanConfig {
    /// Fixed radius; chosen from the k-distance knee when absent.
    pub eps: Option<f64>,
    pub min_pts: usize,
    pub standardize: bool,
}

impl Default for DbscanConfig {
    fn default() -> Self {
        Self {
            eps: None,
            min_pts: 4,
            standardize: false,
        }
    }
}

/// Edge-list input replacing the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub edges: String,
    #[serde(default)]
    pub labels: Option<String>,
    pub discretization: DiscretizationSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub max_subgraph_nodes: usize,
    pub exclusion_mode: ExclusionMode,
    pub aggregation: Aggregation,
    pub synth: SynthConfig,
    pub input: Option<InputConfig>,
    pub dbscan: DbscanConfig,
    pub rule: AnomalyRule,
    pub spectral_baseline: bool,
    pub spectral: SpectralParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            max_subgraph_nodes: 3,
            exclusion_mode: ExclusionMode::RootedAware,
            aggregation: Aggregation::Mean,
            synth: SynthConfig::default(),
            input: None,
            dbscan: DbscanConfig::default(),
            rule: AnomalyRule::default(),
            spectral_baseline: true,
            spectral: SpectralParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub params: DbscanParams,
    pub eps_from_knee: bool,
    pub assignment: ClusterAssignment,
    pub predicted: Vec<NodeLabel>,
}

/// DBSCAN plus the anomaly rule, choosing `eps` from the knee of the
/// `min_pts`-nearest-neighbor distance curve of the distinct points when
/// none is configured.
pub fn cluster_points(points: &[Vec<f64>], cfg: &DbscanConfig, rule: AnomalyRule, exec: Execution) -> Result<Clustering> {
    if points.is_empty() {
        return Err(Error::Empty("points"));
    }
    let (eps, eps_from_knee) = match cfg.eps {
        Some(eps) => (eps, false),
        None => {
            let scaled;
            let pts = if cfg.standardize {
                scaled = standardize(points);
                &scaled
            } else {
                points
            };
            // Exact duplicates would flatten the curve to zero and hide the
            // gaps between groups, so the curve is taken over distinct points.
            let pts = distinct_points(pts);
            let k = cfg.min_pts.clamp(1, pts.len().saturating_sub(1).max(1));
            let eps = if pts.len() < 2 {
                FALLBACK_EPS
            } else {
                knee(&k_distances(&pts, k, exec)?).unwrap_or(FALLBACK_EPS)
            };
            (eps, true)
        }
    };
    let params = DbscanParams {
        eps,
        min_pts: cfg.min_pts,
        standardize: cfg.standardize,
    };
    let assignment = dbscan(points, &params, exec)?;
    let predicted = to_anomaly_labels(&assignment, rule)?;
    Ok(Clustering {
        params,
        eps_from_knee,
        assignment,
        predicted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringSummary {
    pub eps: f64,
    pub eps_selection: String,
    pub min_pts: usize,
    pub standardize: bool,
    pub clusters: usize,
    pub cluster_sizes: Vec<usize>,
    pub noise: usize,
}

impl From<&Clustering> for ClusteringSummary {
    fn from(c: &Clustering) -> Self {
        Self {
            eps: c.params.eps,
            eps_selection: if c.eps_from_knee { "knee" } else { "fixed" }.to_owned(),
            min_pts: c.params.min_pts,
            standardize: c.params.standardize,
            clusters: c.assignment.cluster_count(),
            cluster_sizes: c.assignment.cluster_sizes(),
            noise: c.assignment.noise_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub method: String,
    pub clustering: ClusteringSummary,
    pub metrics: Option<EvalReport>,
}

/// Baselines whose published scores this tool makes no attempt to match.
pub const UNREPRODUCED_BASELINES: &str = "DeepWalk and Node2Vec are not implemented; feed their embedding CSVs \
to the cluster/eval commands. The spectral baseline runs on the time-aggregated union graph with the settings \
above; its scores are not comparable to externally reported spectral-clustering numbers.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub config: PipelineConfig,
    pub rng: Option<String>,
    pub nodes: usize,
    pub snapshots: usize,
    pub embedding_dim: usize,
    pub clustering: ClusteringSummary,
    pub metrics: Option<EvalReport>,
    pub spectral_baseline: Option<BaselineReport>,
    pub baseline_note: String,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub graph: TemporalGraph,
    pub truth: Option<Vec<NodeLabel>>,
    pub catalog: TransitionCatalog,
    pub embeddings: Vec<NodeEmbedding>,
    pub clustering: Clustering,
    pub projection: Vec<Vec<f64>>,
    pub report: PipelineReport,
}

/// Runs every stage on an already loaded graph. `truth`, when given, is
/// indexed by internal node id.
pub fn run(cfg: &PipelineConfig, graph: TemporalGraph, truth: Option<Vec<NodeLabel>>, exec: Execution) -> Result<PipelineOutput> {
    if let Some(t) = &truth {
        if t.len() != graph.node_count() {
            return Err(Error::DimensionMismatch {
                expected: graph.node_count(),
                got: t.len(),
            });
        }
    }
    let catalog = TransitionCatalog::build(cfg.max_subgraph_nodes, cfg.exclusion_mode)?;
    let embeddings = embed_all(&graph, &catalog, cfg.aggregation, None, exec)?;
    let points: Vec<Vec<f64>> = embeddings.iter().map(|e| e.values.clone()).collect();
    let clustering = cluster_points(&points, &cfg.dbscan, cfg.rule, exec)?;
    let metrics = truth
        .as_deref()
        .map(|t| evaluate(&clustering.predicted, t))
        .transpose()?;
    let projection = if points.len() >= 2 {
        pca_project(&points, 2)?
    } else {
        vec![vec![0.0, 0.0]; points.len()]
    };

    let spectral_baseline = if cfg.spectral_baseline && graph.node_count() > cfg.spectral.dim {
        let spec = spectral_embed(&union_graph(&graph), &cfg.spectral)?;
        let c = cluster_points(&spec.coords, &cfg.dbscan, cfg.rule, exec)?;
        Some(BaselineReport {
            method: format!(
                "spectral ({:?} Laplacian of the union graph, {} dims)",
                cfg.spectral.laplacian, cfg.spectral.dim
            ),
            clustering: ClusteringSummary::from(&c),
            metrics: truth
                .as_deref()
                .map(|t| evaluate(&c.predicted, t))
                .transpose()?,
        })
    } else {
        None
    };

    let mut effective = cfg.clone();
    effective.dbscan.eps = Some(clustering.params.eps);
    let report = PipelineReport {
        rng: effective.input.is_none().then(|| RNG_ALGORITHM.to_owned()),
        config: effective,
        nodes: graph.node_count(),
        snapshots: graph.len(),
        embedding_dim: catalog.len(),
        clustering: ClusteringSummary::from(&clustering),
        metrics,
        spectral_baseline,
        baseline_note: UNREPRODUCED_BASELINES.to_owned(),
    };
    Ok(PipelineOutput {
        graph,
        truth,
        catalog,
        embeddings,
        clustering,
        projection,
        report,
    })
}

/// Generates the synthetic graph from `cfg.synth` and runs the pipeline on it.
pub fn run_synthetic(cfg: &PipelineConfig, exec: Execution) -> Result<PipelineOutput> {
    let synth = generate(&cfg.synth)?;
    run(cfg, synth.graph, Some(synth.labels), exec)
}
