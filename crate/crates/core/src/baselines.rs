//! Spectral embedding of the time-aggregated graph and 2-D PCA projection.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, TemporalGraph};

/// Undirected graph with positive integer edge weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    pub node_count: usize,
    /// Sorted by endpoints, `a < b`.
    pub edges: Vec<(NodeId, NodeId, u32)>,
}

impl WeightedGraph {
    pub fn weight(&self, a: NodeId, b: NodeId) -> u32 {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by_key(&key, |&(x, y, _)| (x, y))
            .map_or(0, |i| self.edges[i].2)
    }
}

/// Every edge seen in any snapshot, weighted by the number of snapshots containing it.
pub fn union_graph(g: &TemporalGraph) -> WeightedGraph {
    let mut all: Vec<_> = g.snapshots().iter().flat_map(|s| s.edges()).collect();
    all.sort_unstable();
    let mut edges: Vec<(NodeId, NodeId, u32)> = Vec::new();
    for (a, b) in all {
        match edges.last_mut() {
            Some(last) if (last.0, last.1) == (a, b) => last.2 += 1,
            _ => edges.push((a, b, 1)),
        }
    }
    WeightedGraph {
        node_count: g.node_count(),
        edges,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplacianKind {
    /// `I - D^-1/2 W D^-1/2`, with zero rows for isolated nodes.
    #[default]
    SymmetricNormalized,
    /// `D - W`.
    Unnormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub dim: usize,
    pub tol: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub laplacian: LaplacianKind,
}

impl Default for SpectralParams {
    fn default() -> Self {
        Self {
            dim: 2,
            tol: 1e-8,
            max_iter: 10_000,
            laplacian: LaplacianKind::SymmetricNormalized,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors, one per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Row `i` holds node `i`'s coordinates.
    pub coords: Vec<Vec<f64>>,
}

pub fn laplacian(graph: &WeightedGraph, kind: LaplacianKind) -> DMatrix<f64> {
    let n = graph.node_count;
    let mut w = DMatrix::<f64>::zeros(n, n);
    for &(a, b, weight) in &graph.edges {
        w[(a.index(), b.index())] = f64::from(weight);
        w[(b.index(), a.index())] = f64::from(weight);
    }
    let degree: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
    match kind {
        LaplacianKind::Unnormalized => DMatrix::from_diagonal(&DVector::from_vec(degree)) - w,
        LaplacianKind::SymmetricNormalized => {
            let inv_sqrt: Vec<f64> = degree
                .iter()
                .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
                .collect();
            DMatrix::from_fn(n, n, |i, j| {
                let off = -w[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
                if i == j && degree[i] > 0.0 {
                    1.0 + off
                } else {
                    off
                }
            })
        }
    }
}

/// Flips `v` so its first clearly nonzero entry is positive.
fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-9 * scale) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Symmetric eigendecomposition sorted by ascending eigenvalue.
fn sorted_eigen(m: DMatrix<f64>, max_iter: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, max_iter).ok_or(Error::NotConverged {
        residual: f64::INFINITY,
    })?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    Ok((values, vectors))
}

/// Coordinates in the `dim` eigenvectors with smallest eigenvalues, the
/// trivial one included. Every pair satisfies `|Lx - lx| <= tol * |x|`.
pub fn spectral_embed(graph: &WeightedGraph, params: &SpectralParams) -> Result<SpectralEmbedding> {
    let n = graph.node_count;
    if params.dim == 0 || params.dim >= n {
        return Err(Error::param(
            "dim",
            format!("need 1 <= dim < {n} nodes, got {}", params.dim),
        ));
    }
    if !(params.tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let lap = laplacian(graph, params.laplacian);
    let (values, vectors) = sorted_eigen(lap.clone(), params.max_iter)?;
    let mut eigenvalues = Vec::with_capacity(params.dim);
    let mut eigenvectors = Vec::with_capacity(params.dim);
    for (lambda, mut x) in values.into_iter().zip(vectors).take(params.dim) {
        fix_sign(&mut x);
        let residual = eigen_residual(&lap, lambda, &x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if residual > params.tol * norm {
            return Err(Error::NotConverged { residual });
        }
        eigenvalues.push(lambda);
        eigenvectors.push(x);
    }
    let coords = (0..n)
        .map(|i| eigenvectors.iter().map(|v| v[i]).collect())
        .collect();
    Ok(SpectralEmbedding {
        eigenvalues,
        eigenvectors,
        coords,
    })
}

/// `|M x - lambda x|_2`.
pub fn eigen_residual(m: &DMatrix<f64>, lambda: f64, x: &[f64]) -> f64 {
    let xv = DVector::from_column_slice(x);
    (m * &xv - xv * lambda).norm()
}

/// Centers `points` and projects them on their top `out_dim` principal
/// directions, in descending variance order. Missing directions (fewer input
/// dimensions than `out_dim`) and identical inputs give zero coordinates.
pub fn pca_project(points: &[Vec<f64>], out_dim: usize) -> Result<Vec<Vec<f64>>> {
    if points.len() < 2 {
        return Err(Error::param("points", "need at least 2 points"));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    let n = points.len();
    let mean: Vec<f64> = (0..dim)
        .map(|d| points.iter().map(|p| p[d]).sum::<f64>() / n as f64)
        .collect();
    let x = DMatrix::from_fn(n, dim, |i, d| points[i][d] - mean[d]);
    let cov = x.transpose() * &x / (n as f64 - 1.0);
    let (values, mut vectors) = sorted_eigen(cov, 0)?;
    let top: Vec<usize> = (0..dim).rev().take(out_dim).collect();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dirs: Vec<Option<Vec<f64>>> = top
        .iter()
        .map(|&i| {
            // directions carrying no variance project to exactly zero
            (values[i] > 1e-12 * scale && scale > 0.0).then(|| {
                let mut v = std::mem::take(&mut vectors[i]);
                fix_sign(&mut v);
                v
            })
        })
        .collect();
    Ok((0..n)
        .map(|i| {
            (0..out_dim)
                .map(|c| match dirs.get(c) {
                    Some(Some(v)) => x.row(i).iter().zip(v).map(|(a, b)| a * b).sum(),
                    _ => 0.0,
                })
                .collect()
        })
        .collect())
}
