//! Independent reference implementations and shared generators.
//!
//! Nothing here reuses the library's bitmask tables, permutation tables,
//! subset enumeration or DBSCAN; each oracle is a direct, slow transcription
//! of the definition it checks.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

use egotrans::cluster::Cluster;
use egotrans::embed::step_vectors;
use egotrans::graph::PaddedEgonetPair;
use egotrans::{ExclusionMode, NodeId, NodeTable, Snapshot, TemporalGraph, TransitionCatalog};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn catalog3() -> &'static TransitionCatalog {
    static C: OnceLock<TransitionCatalog> = OnceLock::new();
    C.get_or_init(|| TransitionCatalog::build(3, ExclusionMode::RootedAware).unwrap())
}

// ---------------------------------------------------------------------------
// graphs

pub fn graph(n: usize, snaps: &[Vec<(u32, u32)>]) -> TemporalGraph {
    let snapshots = snaps
        .iter()
        .map(|edges| Snapshot::from_edges(n, edges.iter().map(|&(a, b)| (NodeId(a), NodeId(b)))).unwrap())
        .collect();
    TemporalGraph::new(NodeTable::numbered(n), snapshots).unwrap()
}

pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if rng.gen_bool(p) {
                out.push((a, b));
            }
        }
    }
    out
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, t: usize, p: f64) -> TemporalGraph {
    let snaps: Vec<_> = (0..t).map(|_| random_edges(rng, n, p)).collect();
    graph(n, &snaps)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph on `2..=max_n` nodes with `2..=max_t` snapshots.
pub fn arb_graph(max_n: usize, max_t: usize) -> impl Strategy<Value = TemporalGraph> {
    (2..=max_n, 2..=max_t, 0.05f64..0.6, any::<u64>())
        .prop_map(|(n, t, p, seed)| random_graph(&mut seeded(seed), n, t, p))
}

/// Random permutation of `0..n` as a relabeling vector.
pub fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> Vec<NodeId> {
    let mut p: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p.into_iter().map(NodeId).collect()
}

/// Padded pair of node 0 over two random snapshots on `n` nodes.
pub fn random_pair(rng: &mut ChaCha8Rng, n: usize, p: f64) -> PaddedEgonetPair {
    let g = graph(n, &[random_edges(rng, n, p), random_edges(rng, n, p)]);
    egotrans::padded_pair(&g.snapshots()[0], &g.snapshots()[1], NodeId(0)).unwrap()
}

// ---------------------------------------------------------------------------
// catalog oracle: adjacency matrices and explicit permutation lists

/// Local index pairs in lexicographic order; a pair's position is its bit.
pub fn pairs(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            out.push((i, j));
        }
    }
    out
}

fn to_matrix(k: usize, mask: u16) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; k]; k];
    for (bit, (i, j)) in pairs(k).into_iter().enumerate() {
        if mask >> bit & 1 == 1 {
            m[i][j] = true;
            m[j][i] = true;
        }
    }
    m
}

fn from_matrix(m: &[Vec<bool>]) -> u16 {
    pairs(m.len())
        .into_iter()
        .enumerate()
        .filter(|(_, (i, j))| m[*i][*j])
        .fold(0, |acc, (bit, _)| acc | 1 << bit)
}

/// All permutations of `0..k`, optionally only those fixing 0.
pub fn perms(k: usize, fix_root: bool) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for x in 0..k {
            if !prefix.contains(&x) {
                prefix.push(x);
                go(prefix, k, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), k, &mut out);
    if fix_root {
        out.retain(|p| p.first().map_or(true, |&x| x == 0));
    }
    out
}

/// Image of `mask` when local node `i` becomes `perm[i]`.
pub fn apply(k: usize, mask: u16, perm: &[usize]) -> u16 {
    let m = to_matrix(k, mask);
    let mut out = vec![vec![false; k]; k];
    for i in 0..k {
        for j in 0..k {
            out[perm[i]][perm[j]] = m[i][j];
        }
    }
    from_matrix(&out)
}

pub fn oracle_canonical(k: usize, rooted: bool, left: u16, right: u16) -> (u16, u16) {
    perms(k, rooted)
        .iter()
        .map(|p| (apply(k, left, p), apply(k, right, p)))
        .min()
        .unwrap()
}

pub fn oracle_excluded(k: usize, rooted: bool, left: u16, right: u16, mode: ExclusionMode) -> bool {
    let fix = rooted && mode == ExclusionMode::RootedAware;
    perms(k, fix).iter().any(|p| apply(k, left, p) == right)
}

/// `(k, rooted, left, right)` of every class, sorted.
pub fn oracle_catalog(n_max: usize, mode: ExclusionMode) -> Vec<(usize, bool, u16, u16)> {
    let mut set = BTreeSet::new();
    for k in 1..=n_max {
        let masks = 1u16 << pairs(k).len();
        for rooted in [false, true] {
            for left in 0..masks {
                for right in 0..masks {
                    if !oracle_excluded(k, rooted, left, right, mode) {
                        let (l, r) = oracle_canonical(k, rooted, left, right);
                        set.insert((k, rooted, l, r));
                    }
                }
            }
        }
    }
    set.into_iter().collect()
}

// ---------------------------------------------------------------------------
// literal nested-loop counting

/// For every catalog class `(L, R)` on `k` nodes, collects the node sets of
/// the pair onto which some injective map carries `L` exactly onto the
/// before-side induced edges and `R` onto the after-side ones, with the ego
/// as the image of local node 0 in rooted classes and absent otherwise.
pub fn nested_loop_counts(pair: &PaddedEgonetPair, catalog: &TransitionCatalog) -> Vec<u64> {
    let before: HashSet<(NodeId, NodeId)> = pair.edges_before.iter().copied().collect();
    let after: HashSet<(NodeId, NodeId)> = pair.edges_after.iter().copied().collect();
    let has = |set: &HashSet<(NodeId, NodeId)>, a: NodeId, b: NodeId| set.contains(&(a.min(b), a.max(b)));
    let members = &pair.union_members;

    catalog
        .entries()
        .iter()
        .map(|class| {
            let k = class.k;
            let lm = edge_set(&class.left);
            let rm = edge_set(&class.right);
            let mut found: HashSet<Vec<NodeId>> = HashSet::new();
            let mut image: Vec<NodeId> = Vec::with_capacity(k);
            injective_maps(members, k, &mut image, &mut |img| {
                let root_first = img[0] == pair.root;
                if class.rooted != root_first || (!class.rooted && img.contains(&pair.root)) {
                    return;
                }
                for i in 0..k {
                    for j in i + 1..k {
                        if has(&before, img[i], img[j]) != lm.contains(&(i, j))
                            || has(&after, img[i], img[j]) != rm.contains(&(i, j))
                        {
                            return;
                        }
                    }
                }
                let mut key = img.to_vec();
                key.sort_unstable();
                found.insert(key);
            });
            found.len() as u64
        })
        .collect()
}

fn edge_set(edges: &[[usize; 2]]) -> HashSet<(usize, usize)> {
    edges.iter().map(|&[a, b]| (a.min(b), a.max(b))).collect()
}

fn injective_maps(pool: &[NodeId], k: usize, img: &mut Vec<NodeId>, f: &mut impl FnMut(&[NodeId])) {
    if img.len() == k {
        f(img);
        return;
    }
    for &v in pool {
        if !img.contains(&v) {
            img.push(v);
            injective_maps(pool, k, img, f);
            img.pop();
        }
    }
}

// ---------------------------------------------------------------------------
// reference DBSCAN: core graph components, borders join the lowest id

pub fn naive_dbscan(points: &[Vec<f64>], eps: f64, min_pts: usize) -> Vec<Cluster> {
    let n = points.len();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let near: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| dist(&points[i], &points[j]) <= eps).collect())
        .collect();
    let core: Vec<bool> = near.iter().map(|nb| nb.len() >= min_pts).collect();

    // union-find over core points
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for i in 0..n {
        if core[i] {
            for &j in &near[i] {
                if core[j] {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    // components numbered by their smallest core index
    let mut id_of_root = std::collections::HashMap::new();
    let mut core_cluster = vec![None; n];
    for i in 0..n {
        if core[i] {
            let r = find(&mut parent, i);
            let next = id_of_root.len();
            core_cluster[i] = Some(*id_of_root.entry(r).or_insert(next));
        }
    }
    (0..n)
        .map(|i| {
            if let Some(c) = core_cluster[i] {
                return Cluster::Id(c);
            }
            near[i]
                .iter()
                .filter_map(|&j| core_cluster[j])
                .min()
                .map_or(Cluster::Noise, Cluster::Id)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// shared checks (used by both the property suites and the acceptance run)

pub type Check = Result<(), String>;

pub fn check_permutation_equivariance(g: &TemporalGraph, perm: &[NodeId]) -> Check {
    let cat = catalog3();
    let exec = egotrans::Execution::Sequential;
    let a = egotrans::embed_all(g, cat, egotrans::Aggregation::Mean, None, exec).map_err(|e| e.to_string())?;
    let h = g.relabel(perm).map_err(|e| e.to_string())?;
    let b = egotrans::embed_all(&h, cat, egotrans::Aggregation::Mean, None, exec).map_err(|e| e.to_string())?;
    for (v, e) in a.iter().enumerate() {
        if b[perm[v].index()].values != e.values {
            return Err(format!("node {v} moved to {} changed its embedding", perm[v]));
        }
    }
    Ok(())
}

pub fn check_time_reversal(g: &TemporalGraph) -> Check {
    let cat = catalog3();
    let exec = egotrans::Execution::Sequential;
    let fwd = step_vectors(g, cat, None, exec).map_err(|e| e.to_string())?;
    let rev = step_vectors(&g.reversed(), cat, None, exec).map_err(|e| e.to_string())?;
    let steps = g.len() - 1;
    for (v, (f, r)) in fwd.iter().zip(&rev).enumerate() {
        for s in 0..steps {
            let (a, b) = (f[s].to_dense(), r[steps - 1 - s].to_dense());
            for c in 0..cat.len() {
                if a[c] != b[cat.reversed_id(c)] {
                    return Err(format!("node {v} step {s} class {c}: {} vs {}", a[c], b[cat.reversed_id(c)]));
                }
            }
        }
    }
    Ok(())
}

pub fn check_nested_loops(pair: &PaddedEgonetPair) -> Check {
    let cat = catalog3();
    let fast = egotrans::count_step_vector(pair, cat).to_dense();
    let slow = nested_loop_counts(pair, cat);
    if fast != slow {
        return Err(format!(
            "{} union nodes: subset counts {fast:?} vs nested loops {slow:?}",
            pair.union_members.len()
        ));
    }
    Ok(())
}

pub fn check_dbscan(points: &[Vec<f64>], eps: f64, min_pts: usize) -> Check {
    let want = naive_dbscan(points, eps, min_pts);
    let params = egotrans::cluster::DbscanParams {
        eps,
        min_pts,
        standardize: false,
    };
    for exec in [egotrans::Execution::Sequential, egotrans::Execution::Parallel] {
        let got = egotrans::cluster::dbscan(points, &params, exec).map_err(|e| e.to_string())?;
        if got.labels != want {
            return Err(format!("eps {eps} min_pts {min_pts}: {:?} vs {want:?}", got.labels));
        }
    }
    Ok(())
}

pub fn check_spectral_residual(g: &TemporalGraph, dim: usize) -> Check {
    use egotrans::baselines::{eigen_residual, laplacian, spectral_embed, union_graph, SpectralParams};
    let params = SpectralParams {
        dim,
        ..SpectralParams::default()
    };
    let wg = union_graph(g);
    let emb = spectral_embed(&wg, &params).map_err(|e| e.to_string())?;
    let lap = laplacian(&wg, params.laplacian);
    for (lambda, x) in emb.eigenvalues.iter().zip(&emb.eigenvectors) {
        let r = eigen_residual(&lap, *lambda, x);
        if !(r <= 1e-8) {
            return Err(format!("eigenvalue {lambda}: residual {r:e}"));
        }
    }
    Ok(())
}

pub fn check_ingest_round_trip(g: &TemporalGraph) -> Check {
    use egotrans::ingest::{discretize_with_nodes, parse_records, write_edge_list, DiscretizationSpec};
    let mut buf = Vec::new();
    write_edge_list(g, &mut buf).map_err(|e| e.to_string())?;
    let parsed = parse_records(buf.as_slice()).map_err(|e| e.to_string())?;
    if parsed.records.is_empty() {
        return Ok(());
    }
    let spec = DiscretizationSpec::equal_width(g.len()).with_range(0.0, g.len() as f64);
    let nodes = NodeTable::from_names(g.nodes().names().to_vec()).map_err(|e| e.to_string())?;
    let back = discretize_with_nodes(&parsed.records, &spec, nodes).map_err(|e| e.to_string())?;
    if &back.graph != g {
        return Err("re-ingested graph differs".into());
    }
    Ok(())
}

/// Anomalous-anomalous edge counts must alternate 0, C(m,2), 0, ...
pub fn check_synth_parity(cfg: &egotrans::SynthConfig) -> Check {
    let s = egotrans::synth::generate(cfg).map_err(|e| e.to_string())?;
    let m = cfg.anomaly_count();
    let first = cfg.n - m;
    for (t, snap) in s.graph.snapshots().iter().enumerate() {
        let inside = snap
            .edges()
            .iter()
            .filter(|(a, b)| a.index() >= first && b.index() >= first)
            .count();
        let want = if t % 2 == 1 { m * m.saturating_sub(1) / 2 } else { 0 };
        if inside != want {
            return Err(format!("snapshot {t}: {inside} anomalous edges, want {want}"));
        }
        if !cfg.cross_edges {
            let cross = snap
                .edges()
                .iter()
                .filter(|(a, b)| (a.index() >= first) != (b.index() >= first))
                .count();
            if cross != 0 {
                return Err(format!("snapshot {t}: {cross} cross edges"));
            }
        }
    }
    Ok(())
}
