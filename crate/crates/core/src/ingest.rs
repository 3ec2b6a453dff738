//! Timestamped edge streams and their discretization into snapshots.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge, NodeId, NodeTable, Snapshot, TemporalGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalEdgeRecord {
    pub u: String,
    pub v: String,
    pub t: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedRecords {
    pub records: Vec<TemporalEdgeRecord>,
    pub self_loops_dropped: usize,
}

/// Parses `u v t` lines separated by whitespace and/or commas. Blank lines
/// and `#` comments are skipped; columns after the third are ignored.
pub fn parse_records<R: BufRead>(reader: R) -> Result<ParsedRecords> {
    let mut out = ParsedRecords::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: lineno,
                reason: format!("expected `u v t`, found {} field(s)", fields.len()),
            });
        }
        let t: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno,
            reason: format!("timestamp `{}` is not numeric", fields[2]),
        })?;
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Parse {
                line: lineno,
                reason: format!("timestamp {t} must be finite and non-negative"),
            });
        }
        if fields[0] == fields[1] {
            out.self_loops_dropped += 1;
            continue;
        }
        out.records.push(TemporalEdgeRecord {
            u: fields[0].to_owned(),
            v: fields[1].to_owned(),
            t,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Binning {
    EqualWidth { bins: usize },
    FixedWidth { width: f64 },
    /// Strictly increasing; bin `i` is `[b[i], b[i + 1])`, the last bin closed.
    Boundaries { edges: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSpec {
    pub binning: Binning,
    /// `[lo, hi]`; observed min/max when absent. Ignored for explicit boundaries.
    #[serde(default)]
    pub range: Option<(f64, f64)>,
    /// Keep an edge in a bin only if it occurs at least this often there.
    #[serde(default = "one")]
    pub min_multiplicity: usize,
}

fn one() -> usize {
    1
}

impl DiscretizationSpec {
    pub fn equal_width(bins: usize) -> Self {
        Self {
            binning: Binning::EqualWidth { bins },
            range: None,
            min_multiplicity: 1,
        }
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }
}

/// Resolved bin layout.
enum Bins {
    Uniform { lo: f64, hi: f64, count: usize },
    Explicit(Vec<f64>),
}

impl Bins {
    fn count(&self) -> usize {
        match self {
            Bins::Uniform { count, .. } => *count,
            Bins::Explicit(b) => b.len() - 1,
        }
    }

    fn assign(&self, t: f64) -> Option<usize> {
        match self {
            Bins::Uniform { lo, hi, count } => {
                if t < *lo || t > *hi {
                    return None;
                }
                let b = ((t - lo) * *count as f64 / (hi - lo)).floor() as usize;
                Some(b.min(count - 1))
            }
            Bins::Explicit(b) => {
                let last = *b.last().unwrap();
                if t < b[0] || t > last {
                    return None;
                }
                if t == last {
                    return Some(b.len() - 2);
                }
                // number of boundaries <= t, minus one
                Some(b.partition_point(|&x| x <= t) - 1)
            }
        }
    }
}

fn resolve_bins(spec: &DiscretizationSpec, records: &[TemporalEdgeRecord]) -> Result<Bins> {
    let observed = || {
        records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.t), hi.max(r.t))
        })
    };
    let (lo, hi) = spec.range.unwrap_or_else(observed);
    match &spec.binning {
        Binning::EqualWidth { bins } => {
            if *bins < 2 {
                return Err(Error::param("bins", format!("need at least 2 bins, got {bins}")));
            }
            if !(hi > lo) {
                return Err(Error::param(
                    "range",
                    "time range is empty (all timestamps equal?); pass explicit boundaries",
                ));
            }
            Ok(Bins::Uniform { lo, hi, count: *bins })
        }
        Binning::FixedWidth { width } => {
            if !(*width > 0.0) || !width.is_finite() {
                return Err(Error::param("width", format!("must be positive, got {width}")));
            }
            let count = ((hi - lo) / width).ceil().max(1.0) as usize;
            if count < 2 {
                return Err(Error::param(
                    "width",
                    format!("width {width} leaves fewer than 2 bins over [{lo}, {hi}]"),
                ));
            }
            Ok(Bins::Explicit(
                (0..=count).map(|i| lo + width * i as f64).collect(),
            ))
        }
        Binning::Boundaries { edges } => {
            if edges.len() < 3 {
                return Err(Error::param("boundaries", "need at least 3 boundaries (2 bins)"));
            }
            if edges.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::param("boundaries", "must be strictly increasing"));
            }
            Ok(Bins::Explicit(edges.clone()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretized {
    pub graph: TemporalGraph,
    pub dropped_out_of_range: usize,
    pub dropped_below_multiplicity: usize,
}

/// Bins records into snapshots; node ids follow first appearance.
pub fn discretize(records: &[TemporalEdgeRecord], spec: &DiscretizationSpec) -> Result<Discretized> {
    discretize_with_nodes(records, spec, NodeTable::new())
}

/// As [`discretize`], starting from a pre-populated node table so nodes
/// without edges and a fixed index order survive the round trip.
pub fn discretize_with_nodes(
    records: &[TemporalEdgeRecord],
    spec: &DiscretizationSpec,
    mut nodes: NodeTable,
) -> Result<Discretized> {
    if records.is_empty() {
        return Err(Error::Empty("edge records"));
    }
    let bins = resolve_bins(spec, records)?;
    let mut multiplicity: Vec<HashMap<(NodeId, NodeId), usize>> = vec![HashMap::new(); bins.count()];
    let mut dropped_out_of_range = 0;
    for r in records {
        let u = nodes.intern(&r.u);
        let v = nodes.intern(&r.v);
        match bins.assign(r.t) {
            Some(b) => *multiplicity[b].entry(edge(u, v)).or_default() += 1,
            None => dropped_out_of_range += 1,
        }
    }
    let mut dropped_below_multiplicity = 0;
    let snapshots = multiplicity
        .into_iter()
        .map(|bin| {
            let mut kept: Vec<_> = bin
                .into_iter()
                .filter(|&(_, m)| {
                    let keep = m >= spec.min_multiplicity;
                    dropped_below_multiplicity += usize::from(!keep);
                    keep
                })
                .map(|(e, _)| e)
                .collect();
            kept.sort_unstable();
            Snapshot::from_edges(nodes.len(), kept)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Discretized {
        graph: TemporalGraph::new(nodes, snapshots)?,
        dropped_out_of_range,
        dropped_below_multiplicity,
    })
}

/// Writes `u v t` lines with `t` = snapshot index.
pub fn write_edge_list<W: Write>(g: &TemporalGraph, mut w: W) -> Result<()> {
    writeln!(w, "# u v snapshot")?;
    for (t, s) in g.snapshots().iter().enumerate() {
        for (a, b) in s.edges() {
            writeln!(w, "{} {} {}", g.nodes().name(a), g.nodes().name(b), t)?;
        }
    }
    Ok(())
}
