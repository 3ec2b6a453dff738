//! DBSCAN over embeddings and the mapping from clusters to anomaly labels.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::synth::NodeLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbscanParams {
    /// Inclusive Euclidean radius.
    pub eps: f64,
    /// Neighborhood size (counting the point itself) that makes a core point.
    pub min_pts: usize,
    /// Z-score every dimension first; zero-variance dimensions pass through.
    #[serde(default)]
    pub standardize: bool,
}

impl DbscanParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::param("eps", format!("must be positive, got {}", self.eps)));
        }
        if self.min_pts == 0 {
            return Err(Error::param("min-pts", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cluster {
    Noise,
    Id(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<Cluster>,
    pub core: Vec<bool>,
}

impl ClusterAssignment {
    pub fn cluster_count(&self) -> usize {
        self.labels
            .iter()
            .filter_map(|c| match c {
                Cluster::Id(i) => Some(i + 1),
                Cluster::Noise => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cluster_count()];
        for c in &self.labels {
            if let Cluster::Id(i) = c {
                sizes[*i] += 1;
            }
        }
        sizes
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|c| **c == Cluster::Noise).count()
    }
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let dim = points.first().ok_or(Error::Empty("points"))?.len();
    for p in points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
    }
    Ok(dim)
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Per-dimension z-scores (population standard deviation).
pub fn standardize(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(dim) = points.first().map(Vec::len) else {
        return Vec::new();
    };
    let n = points.len() as f64;
    let mut out = points.to_vec();
    for d in 0..dim {
        let mean = points.iter().map(|p| p[d]).sum::<f64>() / n;
        let var = points.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / n;
        if var > 0.0 {
            let sd = var.sqrt();
            for p in &mut out {
                p[d] = (p[d] - mean) / sd;
            }
        }
    }
    out
}

fn neighborhoods(points: &[Vec<f64>], eps: f64, exec: Execution) -> Vec<Vec<usize>> {
    par::map_range(points.len(), exec, |i| {
        (0..points.len())
            .filter(|&j| euclidean(&points[i], &points[j]) <= eps)
            .collect()
    })
}

/// DBSCAN with a deterministic ascending-index scan; a border point joins the
/// first cluster that reaches it.
pub fn dbscan(points: &[Vec<f64>], params: &DbscanParams, exec: Execution) -> Result<ClusterAssignment> {
    params.validate()?;
    check_points(points)?;
    let scaled;
    let points = if params.standardize {
        scaled = standardize(points);
        &scaled
    } else {
        points
    };
    let neigh = neighborhoods(points, params.eps, exec);
    let core: Vec<bool> = neigh.iter().map(|n| n.len() >= params.min_pts).collect();

    let mut labels = vec![None; points.len()];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..points.len() {
        if labels[start].is_some() || !core[start] {
            continue;
        }
        let id = next;
        next += 1;
        labels[start] = Some(id);
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for &q in &neigh[p] {
                if labels[q].is_none() {
                    labels[q] = Some(id);
                    if core[q] {
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    Ok(ClusterAssignment {
        labels: labels
            .into_iter()
            .map(|l| l.map_or(Cluster::Noise, Cluster::Id))
            .collect(),
        core,
    })
}

/// Sorted distances from every point to its `k`-th nearest other point.
pub fn k_distances(points: &[Vec<f64>], k: usize, exec: Execution) -> Result<Vec<f64>> {
    check_points(points)?;
    if k == 0 || k >= points.len() {
        return Err(Error::param(
            "k",
            format!("need 1 <= k < {} points, got {k}", points.len()),
        ));
    }
    let mut out = par::map_range(points.len(), exec, |i| {
        let mut d: Vec<f64> = (0..points.len())
            .filter(|&j| j != i)
            .map(|j| euclidean(&points[i], &points[j]))
            .collect();
        d.sort_by(f64::total_cmp);
        d[k - 1]
    });
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// First occurrence of every distinct point, compared bitwise.
pub fn distinct_points(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut seen = std::collections::HashSet::new();
    points
        .iter()
        .filter(|p| seen.insert(p.iter().map(|v| v.to_bits()).collect::<Vec<u64>>()))
        .cloned()
        .collect()
}

/// Knee of a sorted k-distance curve: the value at the largest second
/// difference. Returns `None` when every candidate is zero.
pub fn knee(sorted: &[f64]) -> Option<f64> {
    if sorted.len() < 3 {
        return sorted.last().copied().filter(|&d| d > 0.0);
    }
    let mut best: Option<(f64, usize)> = None;
    for i in 1..sorted.len() - 1 {
        let second = sorted[i + 1] - 2.0 * sorted[i] + sorted[i - 1];
        if sorted[i] > 0.0 && best.map_or(true, |(b, _)| second > b) {
            best = Some((second, i));
        }
    }
    best.map(|(_, i)| sorted[i])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum AnomalyRule {
    NoiseOnly,
    /// Noise, or a cluster holding fewer than `theta * n` points.
    SmallClusters { theta: f64 },
}

impl Default for AnomalyRule {
    fn default() -> Self {
        Self::SmallClusters { theta: 0.5 }
    }
}

impl std::str::FromStr for AnomalyRule {
    type Err = Error;

    /// `noise-only` or `small-clusters:<theta>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "noise-only" {
            return Ok(Self::NoiseOnly);
        }
        if let Some(theta) = s.strip_prefix("small-clusters") {
            let theta = match theta.strip_prefix(':') {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::param("rule", format!("bad threshold `{v}`")))?,
                None if theta.is_empty() => 0.5,
                None => return Err(Error::param("rule", format!("unknown rule `{s}`"))),
            };
            let rule = Self::SmallClusters { theta };
            rule.validate()?;
            return Ok(rule);
        }
        Err(Error::param(
            "rule",
            format!("expected noise-only or small-clusters[:theta], got `{s}`"),
        ))
    }
}

impl std::fmt::Display for AnomalyRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::NoiseOnly => write!(f, "noise-only"),
            Self::SmallClusters { theta } => write!(f, "small-clusters:{theta}"),
        }
    }
}

impl AnomalyRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::SmallClusters { theta } if !(*theta > 0.0 && *theta < 1.0) => Err(Error::param(
                "theta",
                format!("must lie strictly between 0 and 1, got {theta}"),
            )),
            _ => Ok(()),
        }
    }
}

pub fn to_anomaly_labels(assign: &ClusterAssignment, rule: AnomalyRule) -> Result<Vec<NodeLabel>> {
    rule.validate()?;
    let sizes = assign.cluster_sizes();
    let n = assign.labels.len() as f64;
    Ok(assign
        .labels
        .iter()
        .map(|c| {
            let anomalous = match (c, rule) {
                (Cluster::Noise, _) => true,
                (Cluster::Id(_), AnomalyRule::NoiseOnly) => false,
                (Cluster::Id(i), AnomalyRule::SmallClusters { theta }) => (sizes[*i] as f64) < theta * n,
            };
            if anomalous {
                NodeLabel::Anomaly
            } else {
                NodeLabel::Normal
            }
        })
        .collect())
}
