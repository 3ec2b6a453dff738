//! Canonical enumeration of subgraph-transition classes.
//!
//! A transition on `k` nodes is a pair of edge bitmasks over the `C(k, 2)`
//! local node pairs, taken in lexicographic order `(0,1), (0,2), .., (1,2), ..`.
//! When the transition is rooted, local index 0 is the ego and only
//! permutations fixing it are admissible. The canonical form of a transition
//! is the admissible image minimizing `(left, right)` lexicographically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on transition size. The catalog has ~2^20 labeled pairs per
/// rootedness at this size already.
pub const MAX_SUBGRAPH_NODES: usize = 5;

/// When a pair's two sides count as "the same graph" and is dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionMode {
    /// Rooted pairs compare under root-preserving isomorphism.
    #[default]
    RootedAware,
    /// Every pair compares as abstract graphs, ignoring the root.
    LiteralUnrooted,
}

impl std::str::FromStr for ExclusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rooted-aware" => Ok(Self::RootedAware),
            "literal-unrooted" => Ok(Self::LiteralUnrooted),
            _ => Err(Error::param(
                "exclusion-mode",
                format!("expected rooted-aware or literal-unrooted, got `{s}`"),
            )),
        }
    }
}

impl ExclusionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::RootedAware => "rooted-aware",
            Self::LiteralUnrooted => "literal-unrooted",
        }
    }
}

/// Number of possible edges on `k` nodes.
pub const fn pair_count(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Bit position of local edge `(i, j)`, `i < j < k`.
pub fn edge_bit(k: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < k);
    // pairs (a, _) for a < i, then offset within row i
    i * (2 * k - i - 1) / 2 + (j - i - 1)
}

/// Local edge pairs in bit order.
pub fn edge_pairs(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(pair_count(k));
    for i in 0..k {
        for j in i + 1..k {
            out.push((i, j));
        }
    }
    out
}

/// Permutations of `0..k`; with `rooted`, only those fixing 0.
fn permutations(k: usize, rooted: bool) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; k];
    let mut prefix = Vec::with_capacity(k);
    if rooted && k > 0 {
        used[0] = true;
        prefix.push(0);
    }
    rec(&mut prefix, &mut used, &mut out);
    out
}

/// Per-permutation lookup table mapping each mask to its image.
struct PermTables {
    tables: Vec<Vec<u16>>,
}

impl PermTables {
    fn new(k: usize, rooted: bool) -> Self {
        let pairs = edge_pairs(k);
        let tables = permutations(k, rooted)
            .into_iter()
            .map(|perm| {
                let images: Vec<usize> = pairs
                    .iter()
                    .map(|&(i, j)| {
                        let (a, b) = (perm[i], perm[j]);
                        edge_bit(k, a.min(b), a.max(b))
                    })
                    .collect();
                (0..1u32 << pairs.len())
                    .map(|mask| {
                        images
                            .iter()
                            .enumerate()
                            .filter(|(bit, _)| mask >> bit & 1 == 1)
                            .fold(0u16, |acc, (_, &img)| acc | 1 << img)
                    })
                    .collect()
            })
            .collect();
        Self { tables }
    }

    fn images(&self, mask: u16) -> impl Iterator<Item = u16> + '_ {
        self.tables.iter().map(move |t| t[mask as usize])
    }

    fn isomorphic(&self, a: u16, b: u16) -> bool {
        self.images(a).any(|img| img == b)
    }

    fn canonical_pair(&self, left: u16, right: u16) -> (u16, u16) {
        self.tables
            .iter()
            .map(|t| (t[left as usize], t[right as usize]))
            .min()
            .expect("identity permutation always present")
    }
}

/// A transition on `k` labeled local nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabeledTransition {
    pub k: u8,
    pub rooted: bool,
    pub left: u16,
    pub right: u16,
}

impl LabeledTransition {
    pub fn new(k: usize, rooted: bool, left: u16, right: u16) -> Result<Self> {
        let t = Self {
            k: k as u8,
            rooted,
            left,
            right,
        };
        t.validate()?;
        Ok(t)
    }

    /// Builds masks from local edge lists.
    pub fn from_edges(
        k: usize,
        rooted: bool,
        left: &[(usize, usize)],
        right: &[(usize, usize)],
    ) -> Result<Self> {
        let mask = |edges: &[(usize, usize)]| -> Result<u16> {
            edges.iter().try_fold(0u16, |acc, &(a, b)| {
                let (i, j) = (a.min(b), a.max(b));
                if i == j || j >= k {
                    return Err(Error::MalformedTransition(format!(
                        "edge ({a},{b}) invalid on {k} nodes"
                    )));
                }
                Ok(acc | 1 << edge_bit(k, i, j))
            })
        };
        if k == 0 || k > MAX_SUBGRAPH_NODES {
            return Err(Error::MalformedTransition(format!("k = {k} out of range")));
        }
        Self::new(k, rooted, mask(left)?, mask(right)?)
    }

    fn validate(&self) -> Result<()> {
        let k = self.k as usize;
        if k == 0 || k > MAX_SUBGRAPH_NODES {
            return Err(Error::MalformedTransition(format!("k = {k} out of range")));
        }
        let limit = 1u32 << pair_count(k);
        if u32::from(self.left) >= limit || u32::from(self.right) >= limit {
            return Err(Error::MalformedTransition(format!(
                "mask bits beyond the {} edges of a {k}-node graph",
                pair_count(k)
            )));
        }
        Ok(())
    }

    pub fn left_edges(&self) -> Vec<(usize, usize)> {
        mask_edges(self.k as usize, self.left)
    }

    pub fn right_edges(&self) -> Vec<(usize, usize)> {
        mask_edges(self.k as usize, self.right)
    }

    /// Same node set with the two sides swapped.
    pub fn reversed(&self) -> Self {
        Self {
            left: self.right,
            right: self.left,
            ..*self
        }
    }
}

fn mask_edges(k: usize, mask: u16) -> Vec<(usize, usize)> {
    edge_pairs(k)
        .into_iter()
        .enumerate()
        .filter(|(bit, _)| mask >> bit & 1 == 1)
        .map(|(_, e)| e)
        .collect()
}

/// Minimal admissible image of `t`.
pub fn canonical_code(t: &LabeledTransition) -> Result<LabeledTransition> {
    t.validate()?;
    let k = t.k as usize;
    let (left, right) = PermTables::new(k, t.rooted).canonical_pair(t.left, t.right);
    Ok(LabeledTransition { left, right, ..*t })
}

/// Whether `t` is dropped as an identity transition under `mode`.
pub fn is_excluded(t: &LabeledTransition, mode: ExclusionMode) -> Result<bool> {
    t.validate()?;
    let respect_root = t.rooted && mode == ExclusionMode::RootedAware;
    Ok(PermTables::new(t.k as usize, respect_root).isomorphic(t.left, t.right))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionClass {
    pub id: usize,
    pub canonical: LabeledTransition,
}

/// One catalog entry in its serialized form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: usize,
    pub k: usize,
    pub rooted: bool,
    pub left: Vec<[usize; 2]>,
    pub right: Vec<[usize; 2]>,
}

const ABSENT: u32 = u32::MAX;
const UNSEEN: u32 = u32::MAX - 1;

/// Indexed, canonically ordered list of transition classes on at most
/// `n_max` nodes. Its length is the embedding dimension.
#[derive(Clone)]
pub struct TransitionCatalog {
    n_max: usize,
    mode: ExclusionMode,
    classes: Vec<TransitionClass>,
    /// `lookup[2 * k + rooted][code]` for every labeled pair.
    lookup: Vec<Vec<u32>>,
}

impl std::fmt::Debug for TransitionCatalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransitionCatalog")
            .field("n_max", &self.n_max)
            .field("mode", &self.mode)
            .field("len", &self.classes.len())
            .finish()
    }
}

impl TransitionCatalog {
    pub fn build(n_max: usize, mode: ExclusionMode) -> Result<Self> {
        if !(1..=MAX_SUBGRAPH_NODES).contains(&n_max) {
            return Err(Error::param(
                "max-subgraph-nodes",
                format!("must be in 1..={MAX_SUBGRAPH_NODES}, got {n_max}"),
            ));
        }
        let mut classes = Vec::new();
        let mut lookup = vec![Vec::new(); 2 * (n_max + 1)];
        for k in 1..=n_max {
            for rooted in [false, true] {
                let perms = PermTables::new(k, rooted);
                let abstract_perms;
                let exclusion = if rooted && mode == ExclusionMode::LiteralUnrooted {
                    abstract_perms = PermTables::new(k, false);
                    &abstract_perms
                } else {
                    &perms
                };
                let bits = pair_count(k);
                let mut table = vec![UNSEEN; 1 << (2 * bits)];
                for code in 0..table.len() {
                    if table[code] != UNSEEN {
                        continue;
                    }
                    // ascending scan: the first unseen member of an orbit is its minimum
                    let left = (code >> bits) as u16;
                    let right = (code & ((1 << bits) - 1)) as u16;
                    let tag = if exclusion.isomorphic(left, right) {
                        ABSENT
                    } else {
                        let id = classes.len();
                        classes.push(TransitionClass {
                            id,
                            canonical: LabeledTransition {
                                k: k as u8,
                                rooted,
                                left,
                                right,
                            },
                        });
                        id as u32
                    };
                    for t in &perms.tables {
                        let img = (t[left as usize] as usize) << bits | t[right as usize] as usize;
                        table[img] = tag;
                    }
                }
                lookup[2 * k + rooted as usize] = table;
            }
        }
        Ok(Self {
            n_max,
            mode,
            classes,
            lookup,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn mode(&self) -> ExclusionMode {
        self.mode
    }

    pub fn classes(&self) -> &[TransitionClass] {
        &self.classes
    }

    /// Embedding dimension.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Class id of `t`, or `None` when `t` is an excluded identity transition.
    pub fn lookup(&self, t: &LabeledTransition) -> Result<Option<usize>> {
        t.validate()?;
        if t.k as usize > self.n_max {
            return Err(Error::TransitionTooLarge {
                k: t.k as usize,
                n_max: self.n_max,
            });
        }
        Ok(self.lookup_code(t.k as usize, t.rooted, t.left, t.right))
    }

    /// Unchecked lookup for the counting hot path; masks must be well-formed.
    #[inline]
    pub(crate) fn lookup_code(&self, k: usize, rooted: bool, left: u16, right: u16) -> Option<usize> {
        let code = (left as usize) << pair_count(k) | right as usize;
        match self.lookup[2 * k + rooted as usize][code] {
            ABSENT => None,
            id => Some(id as usize),
        }
    }

    /// Id of the class with left and right swapped.
    pub fn reversed_id(&self, id: usize) -> usize {
        let c = self.classes[id].canonical.reversed();
        self.lookup_code(c.k as usize, c.rooted, c.left, c.right)
            .expect("exclusion is symmetric")
    }

    pub fn entries(&self) -> Vec<CatalogEntry> {
        self.classes
            .iter()
            .map(|c| {
                let pairs = |v: Vec<(usize, usize)>| v.into_iter().map(|(a, b)| [a, b]).collect();
                CatalogEntry {
                    id: c.id,
                    k: c.canonical.k as usize,
                    rooted: c.canonical.rooted,
                    left: pairs(c.canonical.left_edges()),
                    right: pairs(c.canonical.right_edges()),
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries()).expect("plain data")
    }
}
