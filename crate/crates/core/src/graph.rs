//! Snapshot and temporal-graph model, egonets and padded egonet pairs.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense internal node index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Undirected edge with `0 < 1` ordering of endpoints.
pub type Edge = (NodeId, NodeId);

pub fn edge(a: NodeId, b: NodeId) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn edge_key(a: u32, b: u32) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    (u64::from(lo) << 32) | u64::from(hi)
}

/// Bidirectional table between external node names and dense indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeTable {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl NodeTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from names in index order. Duplicate names are rejected.
    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = Self::new();
        for name in names {
            let name = name.into();
            if table.index.contains_key(&name) {
                return Err(Error::Format(format!("duplicate node name `{name}`")));
            }
            table.intern(&name);
        }
        Ok(table)
    }

    /// Numeric names `0..n`.
    pub fn numbered(n: usize) -> Self {
        Self::from_names((0..n).map(|i| i.to_string())).expect("distinct")
    }

    /// Returns the id of `name`, assigning the next index on first sight.
    pub fn intern(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = NodeId(self.names.len() as u32);
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn resolve(&self, name: &str) -> Result<NodeId> {
        self.get(name).ok_or_else(|| Error::UnknownNode(name.to_owned()))
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// One undirected simple graph over `0..node_count`.
#[derive(Clone)]
pub struct Snapshot {
    neighbors: Vec<Vec<NodeId>>,
    edge_set: HashSet<u64>,
    edge_count: usize,
}

impl fmt::Debug for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Snapshot")
            .field("node_count", &self.node_count())
            .field("edges", &self.edges())
            .finish()
    }
}

impl PartialEq for Snapshot {
    fn eq(&self, other: &Self) -> bool {
        self.neighbors == other.neighbors
    }
}

impl Eq for Snapshot {}

impl Snapshot {
    /// Builds a snapshot, dropping self-loops and collapsing parallel edges.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut neighbors = vec![Vec::new(); node_count];
        let mut edge_set = HashSet::new();
        for (a, b) in edges {
            for x in [a, b] {
                if x.index() >= node_count {
                    return Err(Error::UnknownNode(x.to_string()));
                }
            }
            if a == b || !edge_set.insert(edge_key(a.0, b.0)) {
                continue;
            }
            neighbors[a.index()].push(b);
            neighbors[b.index()].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let edge_count = edge_set.len();
        Ok(Self {
            neighbors,
            edge_set,
            edge_count,
        })
    }

    pub fn empty(node_count: usize) -> Self {
        Self::from_edges(node_count, []).expect("no edges")
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::UnknownNode(v.to_string()))
        }
    }

    /// Sorted neighbor list. Panics on an out-of-range id.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.neighbors[v.index()]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.neighbors[v.index()].len()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        a != b && self.edge_set.contains(&edge_key(a.0, b.0))
    }

    /// All edges, lexicographically sorted.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (i, list) in self.neighbors.iter().enumerate() {
            let a = NodeId(i as u32);
            out.extend(list.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    /// Edges with both endpoints in the sorted slice `members`.
    fn induced_on(&self, members: &[NodeId]) -> Vec<Edge> {
        let mut out = Vec::new();
        for &a in members {
            for &b in &self.neighbors[a.index()] {
                if b > a && members.binary_search(&b).is_ok() {
                    out.push((a, b));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Same graph with node `i` renamed to `perm[i]`.
    pub fn relabel(&self, perm: &[NodeId]) -> Result<Self> {
        if perm.len() != self.node_count() {
            return Err(Error::DimensionMismatch {
                expected: self.node_count(),
                got: perm.len(),
            });
        }
        Self::from_edges(
            self.node_count(),
            self.edges()
                .into_iter()
                .map(|(a, b)| (perm[a.index()], perm[b.index()])),
        )
    }
}

/// Ordered sequence of snapshots over one node universe, `T >= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalGraph {
    nodes: NodeTable,
    snapshots: Vec<Snapshot>,
}

impl TemporalGraph {
    pub fn new(nodes: NodeTable, snapshots: Vec<Snapshot>) -> Result<Self> {
        if snapshots.len() < 2 {
            return Err(Error::TooFewSnapshots(snapshots.len()));
        }
        for s in &snapshots {
            if s.node_count() != nodes.len() {
                return Err(Error::DimensionMismatch {
                    expected: nodes.len(),
                    got: s.node_count(),
                });
            }
        }
        Ok(Self { nodes, snapshots })
    }

    pub fn nodes(&self) -> &NodeTable {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Snapshots in reverse order.
    pub fn reversed(&self) -> Self {
        Self {
            nodes: self.nodes.clone(),
            snapshots: self.snapshots.iter().rev().cloned().collect(),
        }
    }

    /// Moves node `i` to index `perm[i]`, carrying its name along.
    pub fn relabel(&self, perm: &[NodeId]) -> Result<Self> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: perm.len(),
            });
        }
        let mut names = vec![String::new(); n];
        let mut seen = vec![false; n];
        for (i, p) in perm.iter().enumerate() {
            if p.index() >= n || std::mem::replace(&mut seen[p.index()], true) {
                return Err(Error::param("perm", "not a permutation"));
            }
            names[p.index()] = self.nodes.name(NodeId(i as u32)).to_owned();
        }
        let snapshots = self
            .snapshots
            .iter()
            .map(|s| s.relabel(perm))
            .collect::<Result<_>>()?;
        Self::new(NodeTable::from_names(names)?, snapshots)
    }
}

/// Induced subgraph on the closed neighborhood of `root`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Egonet {
    pub root: NodeId,
    /// Sorted, contains `root`.
    pub members: Vec<NodeId>,
    pub edges: Vec<Edge>,
}

pub fn egonet(snapshot: &Snapshot, v: NodeId) -> Result<Egonet> {
    snapshot.check(v)?;
    let mut members = snapshot.neighbors(v).to_vec();
    members.push(v);
    members.sort_unstable();
    let edges = snapshot.induced_on(&members);
    Ok(Egonet {
        root: v,
        members,
        edges,
    })
}

/// Which side of a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Before,
    After,
}

/// The egonets of one node at `t` and `t + 1`, both over the union of their
/// member sets. Nodes present on only one side are isolated on the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedEgonetPair {
    pub root: NodeId,
    pub union_members: Vec<NodeId>,
    pub edges_before: Vec<Edge>,
    pub edges_after: Vec<Edge>,
}

pub fn padded_pair(before: &Snapshot, after: &Snapshot, v: NodeId) -> Result<PaddedEgonetPair> {
    let e0 = egonet(before, v)?;
    let e1 = egonet(after, v)?;
    let mut union_members = e0.members;
    union_members.extend(e1.members);
    union_members.sort_unstable();
    union_members.dedup();
    Ok(PaddedEgonetPair {
        root: v,
        union_members,
        edges_before: e0.edges,
        edges_after: e1.edges,
    })
}

impl PaddedEgonetPair {
    pub fn edges(&self, side: Side) -> &[Edge] {
        match side {
            Side::Before => &self.edges_before,
            Side::After => &self.edges_after,
        }
    }

    /// Time-reversed pair.
    pub fn swapped(&self) -> Self {
        Self {
            root: self.root,
            union_members: self.union_members.clone(),
            edges_before: self.edges_after.clone(),
            edges_after: self.edges_before.clone(),
        }
    }
}

/// Edges of `side` with both endpoints in `subset`.
pub fn induced_edges(pair: &PaddedEgonetPair, subset: &[NodeId], side: Side) -> Result<Vec<Edge>> {
    if subset.is_empty() {
        return Err(Error::Empty("subset"));
    }
    if subset
        .iter()
        .any(|v| pair.union_members.binary_search(v).is_err())
    {
        return Err(Error::SubsetOutsidePair);
    }
    let members: HashSet<NodeId> = subset.iter().copied().collect();
    Ok(pair
        .edges(side)
        .iter()
        .filter(|(a, b)| members.contains(a) && members.contains(b))
        .copied()
        .collect())
}

/// Shared test fixture: the ego `v` before and after gaining `g` and a
/// handful of neighbor-neighbor edges.
pub mod fixtures {
    use super::*;

    pub const EXAMPLE_NODES: [&str; 7] = ["v", "b", "c", "d", "e", "f", "g"];

    pub const EXAMPLE_BEFORE: [(&str, &str); 6] = [
        ("v", "b"),
        ("v", "c"),
        ("v", "d"),
        ("v", "e"),
        ("v", "f"),
        ("e", "f"),
    ];

    pub const EXAMPLE_AFTER: [(&str, &str); 11] = [
        ("v", "b"),
        ("v", "c"),
        ("v", "d"),
        ("v", "e"),
        ("v", "f"),
        ("v", "g"),
        ("b", "c"),
        ("b", "d"),
        ("b", "g"),
        ("c", "d"),
        ("e", "g"),
    ];

    /// Two-snapshot temporal graph over `v, b, c, d, e, f, g`.
    pub fn ego_example() -> TemporalGraph {
        let nodes = NodeTable::from_names(EXAMPLE_NODES).expect("distinct");
        let snap = |edges: &[(&str, &str)]| {
            Snapshot::from_edges(
                nodes.len(),
                edges
                    .iter()
                    .map(|(a, b)| (nodes.get(a).unwrap(), nodes.get(b).unwrap())),
            )
            .unwrap()
        };
        let before = snap(&EXAMPLE_BEFORE);
        let after = snap(&EXAMPLE_AFTER);
        TemporalGraph::new(nodes, vec![before, after]).unwrap()
    }

    /// Padded pair of `v` in [`ego_example`].
    pub fn example_pair() -> PaddedEgonetPair {
        let g = ego_example();
        padded_pair(&g.snapshots()[0], &g.snapshots()[1], NodeId(0)).unwrap()
    }
}
