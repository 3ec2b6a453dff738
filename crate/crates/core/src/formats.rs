//! On-disk formats: snapshot bundles, label/embedding/assignment CSVs.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use crate::cluster::{Cluster, ClusterAssignment};
use crate::embed::{NodeEmbedding, TransitionCountVector};
use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeTable, Snapshot, TemporalGraph};
use crate::synth::NodeLabel;

/// Opens `path` for buffered reading, decompressing when it ends in `.gz`.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    let gz = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gz"));
    Ok(if gz {
        Box::new(BufReader::new(MultiGzDecoder::new(file)))
    } else {
        Box::new(BufReader::new(file))
    })
}

/// Node table plus per-snapshot edge arrays of node indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotBundle {
    pub nodes: Vec<String>,
    pub snapshots: Vec<Vec<[u32; 2]>>,
}

impl SnapshotBundle {
    pub fn from_graph(g: &TemporalGraph) -> Self {
        Self {
            nodes: g.nodes().names().to_vec(),
            snapshots: g
                .snapshots()
                .iter()
                .map(|s| s.edges().into_iter().map(|(a, b)| [a.0, b.0]).collect())
                .collect(),
        }
    }

    pub fn into_graph(self) -> Result<TemporalGraph> {
        let nodes = NodeTable::from_names(self.nodes)?;
        let snapshots = self
            .snapshots
            .into_iter()
            .map(|edges| {
                Snapshot::from_edges(
                    nodes.len(),
                    edges.into_iter().map(|[a, b]| (NodeId(a), NodeId(b))),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        TemporalGraph::new(nodes, snapshots)
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r)
}

pub fn write_labels<W: Write>(nodes: &NodeTable, labels: &[NodeLabel], w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["node", "label"])?;
    for (i, l) in labels.iter().enumerate() {
        out.write_record([nodes.name(NodeId(i as u32)), l.as_str()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_labels<R: Read>(r: R) -> Result<Vec<(String, NodeLabel)>> {
    let mut rd = reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Format("labels CSV needs `node,label` columns".into()));
        }
        out.push((rec[0].to_owned(), rec[1].parse()?));
    }
    Ok(out)
}

/// Node names and real-valued feature rows read from any `node,...` CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub columns: Vec<String>,
    pub nodes: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn write_embeddings<W: Write>(nodes: &NodeTable, emb: &[NodeEmbedding], w: W) -> Result<()> {
    let dim = emb.first().map_or(0, |e| e.values.len());
    let mut out = writer(w);
    let mut header = vec!["node".to_owned()];
    header.extend((0..dim).map(|i| format!("c{i}")));
    out.write_record(&header)?;
    for e in emb {
        let mut row = vec![nodes.name(e.node).to_owned()];
        row.extend(e.values.iter().map(|v| v.to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Step-level dump: `node,step,c0..`; `steps[i]` holds one node's vectors.
pub fn write_step_vectors<W: Write>(nodes: &NodeTable, steps: &[Vec<TransitionCountVector>], w: W) -> Result<()> {
    let dim = steps.iter().flatten().next().map_or(0, |s| s.dim());
    let mut out = writer(w);
    let mut header = vec!["node".to_owned(), "step".to_owned()];
    header.extend((0..dim).map(|i| format!("c{i}")));
    out.write_record(&header)?;
    for s in steps.iter().flatten() {
        let mut row = vec![nodes.name(s.node).to_owned(), s.step.to_string()];
        row.extend(s.to_dense().iter().map(|v| v.to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_embeddings<R: Read>(r: R) -> Result<EmbeddingTable> {
    let mut rd = reader(r);
    let header = rd.headers()?.clone();
    if header.is_empty() {
        return Err(Error::Format("embedding CSV has no header".into()));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut nodes = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        nodes.push(rec[0].to_owned());
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 2,
                    reason: format!("`{v}` is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(EmbeddingTable { columns, nodes, rows })
}

fn cluster_str(c: Cluster) -> String {
    match c {
        Cluster::Noise => "noise".to_owned(),
        Cluster::Id(i) => i.to_string(),
    }
}

fn parse_cluster(s: &str) -> Result<Cluster> {
    if s == "noise" {
        return Ok(Cluster::Noise);
    }
    s.parse()
        .map(Cluster::Id)
        .map_err(|_| Error::Format(format!("bad cluster `{s}`")))
}

pub fn write_assignment<W: Write, S: AsRef<str>>(
    nodes: &[S],
    assign: &ClusterAssignment,
    predicted: &[NodeLabel],
    w: W,
) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["node", "cluster", "predicted"])?;
    for ((n, c), p) in nodes.iter().zip(&assign.labels).zip(predicted) {
        out.write_record([n.as_ref(), &cluster_str(*c), p.as_str()])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentRow {
    pub node: String,
    pub cluster: Cluster,
    pub predicted: NodeLabel,
}

pub fn read_assignment<R: Read>(r: R) -> Result<Vec<AssignmentRow>> {
    let mut rd = reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() < 3 {
            return Err(Error::Format("assignment CSV needs `node,cluster,predicted`".into()));
        }
        out.push(AssignmentRow {
            node: rec[0].to_owned(),
            cluster: parse_cluster(&rec[1])?,
            predicted: rec[2].parse()?,
        });
    }
    Ok(out)
}

/// One row of plot-ready projection output.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRow {
    pub node: String,
    pub x: f64,
    pub y: f64,
    pub cluster: Option<Cluster>,
    pub predicted: Option<NodeLabel>,
    pub truth: Option<NodeLabel>,
}

pub fn write_projection<W: Write>(rows: &[ProjectionRow], w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["node", "x", "y", "cluster", "predicted", "truth"])?;
    for r in rows {
        out.write_record([
            r.node.clone(),
            r.x.to_string(),
            r.y.to_string(),
            r.cluster.map(cluster_str).unwrap_or_default(),
            r.predicted.map(|l| l.as_str().to_owned()).unwrap_or_default(),
            r.truth.map(|l| l.as_str().to_owned()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
