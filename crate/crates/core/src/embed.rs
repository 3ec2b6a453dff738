//! Per-node transition counting and aggregation into embeddings.
//!
//! Every node subset `S` of a padded egonet pair with `2 <= |S| <= n_max` is
//! classified once: the induced edges on both sides form a labeled
//! transition (ego pinned to local index 0 when `S` contains it), which the
//! catalog maps to a class id. Subsets with no edge on either side are
//! `empty -> empty` and always excluded, so enumeration is driven by the
//! union edge set: each subset is visited from its lexicographically
//! smallest union edge.

use serde::{Deserialize, Serialize};

use crate::catalog::{edge_bit, TransitionCatalog};
use crate::error::{Error, Result};
use crate::graph::{padded_pair, NodeId, PaddedEgonetPair, TemporalGraph};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    #[default]
    Mean,
    Sum,
    Min,
    Max,
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Self::Mean),
            "sum" => Ok(Self::Sum),
            "min" => Ok(Self::Min),
            "max" => Ok(Self::Max),
            _ => Err(Error::param(
                "aggregation",
                format!("expected mean, sum, min or max, got `{s}`"),
            )),
        }
    }
}

/// Sparse transition counts of one node over one time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionCountVector {
    pub node: NodeId,
    /// 0-based index of the earlier snapshot.
    pub step: usize,
    dim: usize,
    /// `(class id, count)` sorted by id, counts nonzero.
    entries: Vec<(usize, u64)>,
}

impl TransitionCountVector {
    pub fn from_dense(node: NodeId, step: usize, counts: &[u64]) -> Self {
        Self {
            node,
            step,
            dim: counts.len(),
            entries: counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (i, c))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, id: usize) -> u64 {
        self.entries
            .binary_search_by_key(&id, |e| e.0)
            .map_or(0, |i| self.entries[i].1)
    }

    pub fn nonzero(&self) -> &[(usize, u64)] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn to_dense(&self) -> Vec<u64> {
        let mut out = vec![0; self.dim];
        for &(i, c) in &self.entries {
            out[i] = c;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeEmbedding {
    pub node: NodeId,
    pub aggregation: Aggregation,
    pub values: Vec<f64>,
}

/// Local view of a padded pair: per-node sorted `(neighbor, side bits)` with
/// bit 0 = present before, bit 1 = present after.
struct LocalPair {
    root: usize,
    adj: Vec<Vec<(u32, u8)>>,
}

impl LocalPair {
    fn new(pair: &PaddedEgonetPair) -> Self {
        let pos = |v: NodeId| {
            pair.union_members
                .binary_search(&v)
                .expect("egonet edges lie inside the union")
        };
        let mut adj = vec![Vec::new(); pair.union_members.len()];
        for (edges, bit) in [(&pair.edges_before, 1u8), (&pair.edges_after, 2u8)] {
            for &(a, b) in edges {
                let (a, b) = (pos(a), pos(b));
                adj[a].push((b as u32, bit));
                adj[b].push((a as u32, bit));
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup_by(|next, prev| {
                if next.0 == prev.0 {
                    prev.1 |= next.1;
                    true
                } else {
                    false
                }
            });
        }
        Self {
            root: pos(pair.root),
            adj,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    fn status(&self, a: usize, b: usize) -> u8 {
        let list = &self.adj[a];
        list.binary_search_by_key(&(b as u32), |e| e.0)
            .map_or(0, |i| list[i].1)
    }
}

/// Calls `f` with every `r`-combination of `pool`, in lexicographic order.
fn for_each_combination(pool: &[usize], r: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if r == 0 {
        f(buf);
        return;
    }
    for i in 0..pool.len() {
        if pool.len() - i < r {
            break;
        }
        buf.push(pool[i]);
        for_each_combination(&pool[i + 1..], r - 1, buf, f);
        buf.pop();
    }
}

/// Classifies every node subset of `pair` and counts transition classes.
pub fn count_step_vector(pair: &PaddedEgonetPair, catalog: &TransitionCatalog) -> TransitionCountVector {
    let local = LocalPair::new(pair);
    let mut counts = vec![0u64; catalog.len()];
    let m = local.len();
    let mut pool = Vec::with_capacity(m);
    let mut subset = Vec::with_capacity(catalog.n_max());
    let mut buf = Vec::with_capacity(catalog.n_max());

    for a in 0..m {
        for &(b, _) in local.adj[a].iter().filter(|e| e.0 as usize > a) {
            let b = b as usize;
            for k in 2..=catalog.n_max().min(m) {
                pool.clear();
                pool.extend((0..m).filter(|&x| x != a && x != b));
                for_each_combination(&pool, k - 2, &mut buf, &mut |extra| {
                    subset.clear();
                    subset.push(a);
                    subset.push(b);
                    subset.extend_from_slice(extra);
                    if !smallest_union_edge_is(&local, &subset, (a, b)) {
                        return;
                    }
                    if let Some(pos) = subset.iter().position(|&x| x == local.root) {
                        subset.swap(0, pos);
                    }
                    let rooted = subset[0] == local.root;
                    let (mut left, mut right) = (0u16, 0u16);
                    for i in 0..k {
                        for j in i + 1..k {
                            let s = local.status(subset[i], subset[j]);
                            let bit = 1 << edge_bit(k, i, j);
                            if s & 1 != 0 {
                                left |= bit;
                            }
                            if s & 2 != 0 {
                                right |= bit;
                            }
                        }
                    }
                    if let Some(id) = catalog.lookup_code(k, rooted, left, right) {
                        counts[id] += 1;
                    }
                });
            }
        }
    }
    TransitionCountVector::from_dense(pair.root, 0, &counts)
}

/// True when no union edge inside `subset` sorts before `first`.
fn smallest_union_edge_is(local: &LocalPair, subset: &[usize], first: (usize, usize)) -> bool {
    for i in 0..subset.len() {
        for j in i + 1..subset.len() {
            let (x, y) = (subset[i].min(subset[j]), subset[i].max(subset[j]));
            if (x, y) < first && local.status(x, y) != 0 {
                return false;
            }
        }
    }
    true
}

/// Element-wise reduction of one node's step vectors.
pub fn aggregate(steps: &[TransitionCountVector], kind: Aggregation) -> Result<NodeEmbedding> {
    let first = steps.first().ok_or(Error::Empty("step vectors"))?;
    let dim = first.dim();
    for s in steps {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        if s.node != first.node {
            return Err(Error::param("steps", "step vectors belong to different nodes"));
        }
    }
    let mut values: Vec<f64> = first.to_dense().into_iter().map(|c| c as f64).collect();
    for s in &steps[1..] {
        for (acc, c) in values.iter_mut().zip(s.to_dense()) {
            let c = c as f64;
            *acc = match kind {
                Aggregation::Mean | Aggregation::Sum => *acc + c,
                Aggregation::Min => acc.min(c),
                Aggregation::Max => acc.max(c),
            };
        }
    }
    if kind == Aggregation::Mean {
        let n = steps.len() as f64;
        values.iter_mut().for_each(|v| *v /= n);
    }
    Ok(NodeEmbedding {
        node: first.node,
        aggregation: kind,
        values,
    })
}

/// Sorted, deduplicated, validated node selection (all nodes when `None`).
fn resolve_nodes(g: &TemporalGraph, nodes: Option<&[NodeId]>) -> Result<Vec<NodeId>> {
    match nodes {
        None => Ok((0..g.node_count() as u32).map(NodeId).collect()),
        Some(list) => {
            let mut out = list.to_vec();
            if let Some(bad) = out.iter().find(|v| v.index() >= g.node_count()) {
                return Err(Error::UnknownNode(bad.to_string()));
            }
            out.sort_unstable();
            out.dedup();
            Ok(out)
        }
    }
}

/// Step vectors of the selected nodes, `T - 1` per node, ordered by node index.
pub fn step_vectors(
    g: &TemporalGraph,
    catalog: &TransitionCatalog,
    nodes: Option<&[NodeId]>,
    exec: Execution,
) -> Result<Vec<Vec<TransitionCountVector>>> {
    let nodes = resolve_nodes(g, nodes)?;
    let snaps = g.snapshots();
    par::try_map_range(nodes.len(), exec, |i| {
        let v = nodes[i];
        snaps
            .windows(2)
            .enumerate()
            .map(|(step, w)| {
                let pair = padded_pair(&w[0], &w[1], v)?;
                Ok(TransitionCountVector {
                    step,
                    ..count_step_vector(&pair, catalog)
                })
            })
            .collect::<Result<Vec<_>>>()
    })
}

/// Embeddings of the selected nodes, ordered by node index.
pub fn embed_all(
    g: &TemporalGraph,
    catalog: &TransitionCatalog,
    kind: Aggregation,
    nodes: Option<&[NodeId]>,
    exec: Execution,
) -> Result<Vec<NodeEmbedding>> {
    step_vectors(g, catalog, nodes, exec)?
        .iter()
        .map(|steps| aggregate(steps, kind))
        .collect()
}
