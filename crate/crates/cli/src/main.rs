//! `egotrans` command-line interface.

mod output;

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use egotrans::baselines::pca_project;
use egotrans::cluster::{AnomalyRule, Cluster};
use egotrans::embed::step_vectors;
use egotrans::formats::{
    open_input, read_assignment, read_embeddings, read_labels, write_assignment, write_embeddings, write_labels,
    write_projection, write_step_vectors, ProjectionRow, SnapshotBundle,
};
use egotrans::ingest::{discretize_with_nodes, parse_records, write_edge_list, Binning, DiscretizationSpec};
use egotrans::metrics::evaluate;
use egotrans::pipeline::{self, cluster_points, DbscanConfig, InputConfig, PipelineConfig, PipelineOutput};
use egotrans::synth::{generate, RNG_ALGORITHM};
use egotrans::{
    embed_all, Aggregation, Execution, ExclusionMode, NodeId, NodeLabel, NodeTable, SynthConfig, TemporalGraph,
    TransitionCatalog,
};
use output::{render_error, write_atomic, write_json, write_text};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "egotrans", version, about = "Temporal egonet transition embeddings and anomaly detection")]
struct Cli {
    /// Worker threads for the parallel stages; 1 runs everything sequentially.
    #[arg(long, global = true, env = "EGOTRANS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the transition catalog as JSON.
    Catalog(CatalogArgs),
    /// Generate a synthetic temporal graph with ground-truth labels.
    Synth(SynthArgs),
    /// Bin a timestamped edge list into a snapshot bundle.
    Ingest(IngestArgs),
    /// Compute node embeddings from a snapshot bundle.
    Embed(EmbedArgs),
    /// Run DBSCAN on an embedding CSV and label anomalies.
    Cluster(ClusterArgs),
    /// Score an assignment against ground-truth labels.
    Eval(EvalArgs),
    /// Project embeddings to 2-D for plotting.
    Project(ProjectArgs),
    /// Synthesize or ingest, then embed, cluster, evaluate and project.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct CatalogFlags {
    #[arg(long, default_value_t = 3)]
    max_subgraph_nodes: usize,
    #[arg(long, default_value = "rooted-aware")]
    exclusion_mode: ExclusionMode,
}

#[derive(Args)]
struct CatalogArgs {
    #[command(flatten)]
    catalog: CatalogFlags,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct SynthFlags {
    /// Total node count.
    #[arg(long)]
    n: Option<usize>,
    /// Authentic connection probability.
    #[arg(long)]
    p: Option<f64>,
    /// Anomalous fraction of nodes.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    snapshots: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Draw anomalous-authentic edges too.
    #[arg(long)]
    cross_edges: bool,
    /// Permute node names.
    #[arg(long)]
    shuffle_names: bool,
}

impl SynthFlags {
    fn apply(&self, cfg: &mut SynthConfig) {
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.p {
            cfg.p = v;
        }
        if let Some(v) = self.a {
            cfg.a = v;
        }
        if let Some(v) = self.snapshots {
            cfg.snapshots = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        cfg.cross_edges |= self.cross_edges;
        cfg.shuffle_names |= self.shuffle_names;
    }
}

#[derive(Args)]
struct SynthArgs {
    /// TOML file with `n`, `p`, `a`, `snapshots`, `seed`, ...; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: SynthFlags,
    /// Receives edges.txt, labels.csv and manifest.json.
    #[arg(short, long)]
    out_dir: PathBuf,
}

#[derive(Args, Default)]
struct BinFlags {
    /// Number of equal-width bins.
    #[arg(long, conflicts_with_all = ["width", "boundaries"])]
    bins: Option<usize>,
    /// Fixed bin width.
    #[arg(long, conflicts_with = "boundaries")]
    width: Option<f64>,
    /// Explicit, strictly increasing bin edges: `b0,b1,...`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    boundaries: Option<Vec<f64>>,
    /// Time range `lo,hi`; the observed range by default.
    #[arg(long, value_parser = parse_range)]
    range: Option<(f64, f64)>,
    /// Keep an edge in a bin only if seen at least this often there.
    #[arg(long)]
    min_multiplicity: Option<usize>,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
    Ok((num(lo)?, num(hi)?))
}

impl BinFlags {
    fn binning(&self) -> Option<Binning> {
        if let Some(bins) = self.bins {
            Some(Binning::EqualWidth { bins })
        } else if let Some(width) = self.width {
            Some(Binning::FixedWidth { width })
        } else {
            self.boundaries.clone().map(|edges| Binning::Boundaries { edges })
        }
    }

    fn apply(&self, spec: &mut DiscretizationSpec) {
        if let Some(b) = self.binning() {
            spec.binning = b;
        }
        if self.range.is_some() {
            spec.range = self.range;
        }
        if let Some(m) = self.min_multiplicity {
            spec.min_multiplicity = m;
        }
    }

    fn spec(&self) -> Result<DiscretizationSpec> {
        let Some(binning) = self.binning() else {
            bail!("one of --bins, --width or --boundaries is required");
        };
        let mut spec = DiscretizationSpec {
            binning,
            range: None,
            min_multiplicity: 1,
        };
        self.apply(&mut spec);
        Ok(spec)
    }
}

#[derive(Args)]
struct IngestArgs {
    /// Edge list `u v t` (whitespace or commas, `#` comments, .gz accepted).
    input: PathBuf,
    #[command(flatten)]
    bins: BinFlags,
    /// `node,label` CSV whose nodes are placed first, in file order.
    #[arg(long)]
    nodes: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    /// Snapshot bundle JSON.
    bundle: PathBuf,
    #[command(flatten)]
    catalog: CatalogFlags,
    #[arg(long, default_value = "mean")]
    aggregation: Aggregation,
    /// Only these nodes: `a,b,c`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    nodes: Option<Vec<String>>,
    /// Also write per-step count vectors here.
    #[arg(long)]
    steps: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
    /// Catalog sidecar; `<out>.catalog.json` by default.
    #[arg(long)]
    catalog_out: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    /// `node,c0,c1,...` CSV.
    embeddings: PathBuf,
    /// DBSCAN radius; the k-distance knee when omitted.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 4)]
    min_pts: usize,
    #[arg(long)]
    standardize: bool,
    /// `noise-only` or `small-clusters[:theta]`.
    #[arg(long, default_value = "small-clusters:0.5")]
    rule: AnomalyRule,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    assignment: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Report JSON; the table always goes to standard output.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    embeddings: PathBuf,
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    /// TOML pipeline config; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    synth: SynthFlags,
    /// Ingest this edge list instead of generating a synthetic graph.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Ground-truth labels for an ingested graph.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[command(flatten)]
    bins: BinFlags,
    #[arg(long)]
    max_subgraph_nodes: Option<usize>,
    #[arg(long)]
    exclusion_mode: Option<ExclusionMode>,
    #[arg(long)]
    aggregation: Option<Aggregation>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    min_pts: Option<usize>,
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    rule: Option<AnomalyRule>,
    /// Skip the spectral baseline.
    #[arg(long)]
    no_spectral: bool,
    #[arg(short, long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", render_error(&e));
            ExitCode::FAILURE
        }
    }
}

fn execution(threads: Option<usize>) -> Result<Execution> {
    match threads {
        Some(0) => bail!("--threads must be at least 1"),
        Some(1) => Ok(Execution::Sequential),
        Some(t) => {
            egotrans::par::set_thread_count(t);
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

fn run(cli: Cli) -> Result<()> {
    let exec = execution(cli.threads)?;
    match cli.command {
        Command::Catalog(a) => catalog(a),
        Command::Synth(a) => synth(a),
        Command::Ingest(a) => ingest(a),
        Command::Embed(a) => embed(a, exec),
        Command::Cluster(a) => cluster(a, exec),
        Command::Eval(a) => eval(a),
        Command::Project(a) => project(a),
        Command::Pipeline(a) => run_pipeline(a, exec),
    }
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn open(path: &Path) -> Result<Box<dyn std::io::BufRead>> {
    open_input(path).with_context(|| format!("opening {}", path.display()))
}

fn catalog(a: CatalogArgs) -> Result<()> {
    let cat = TransitionCatalog::build(a.catalog.max_subgraph_nodes, a.catalog.exclusion_mode)?;
    let json = cat.to_json() + "\n";
    match a.out {
        Some(path) => write_text(&path, &json),
        None => Ok(std::io::stdout().write_all(json.as_bytes())?),
    }
}

#[derive(Serialize)]
struct SynthManifest<'a> {
    config: &'a SynthConfig,
    rng: &'static str,
    nodes: usize,
    anomalies: usize,
    edges_per_snapshot: Vec<usize>,
}

fn write_synthetic(dir: &Path, cfg: &SynthConfig, graph: &TemporalGraph, labels: &[NodeLabel]) -> Result<()> {
    write_atomic(&dir.join("edges.txt"), |w| Ok(write_edge_list(graph, w)?))?;
    write_atomic(&dir.join("labels.csv"), |w| Ok(write_labels(graph.nodes(), labels, w)?))?;
    write_json(
        &dir.join("manifest.json"),
        &SynthManifest {
            config: cfg,
            rng: RNG_ALGORITHM,
            nodes: graph.node_count(),
            anomalies: cfg.anomaly_count(),
            edges_per_snapshot: graph.snapshots().iter().map(|s| s.edge_count()).collect(),
        },
    )
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => read_toml(path)?,
        None => SynthConfig::default(),
    };
    a.flags.apply(&mut cfg);
    let s = generate(&cfg)?;
    write_synthetic(&a.out_dir, &cfg, &s.graph, &s.labels)?;
    eprintln!(
        "{} nodes ({} anomalous), {} snapshots -> {}",
        s.graph.node_count(),
        cfg.anomaly_count(),
        s.graph.len(),
        a.out_dir.display()
    );
    Ok(())
}

/// Parses and bins `edges`, seeding the node table from `labels` when given.
fn load_edges(
    edges: &Path,
    labels: Option<&Path>,
    spec: &DiscretizationSpec,
) -> Result<(TemporalGraph, Option<Vec<NodeLabel>>)> {
    let parsed = parse_records(open(edges)?).with_context(|| format!("reading {}", edges.display()))?;
    let labels = labels
        .map(|p| read_labels(open(p)?).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    let table = match &labels {
        Some(l) => NodeTable::from_names(l.iter().map(|(n, _)| n.clone()))?,
        None => NodeTable::new(),
    };
    let d = discretize_with_nodes(&parsed.records, spec, table)?;
    if parsed.self_loops_dropped + d.dropped_out_of_range + d.dropped_below_multiplicity > 0 {
        eprintln!(
            "dropped {} self loop(s), {} out-of-range record(s), {} edge(s) below multiplicity",
            parsed.self_loops_dropped, d.dropped_out_of_range, d.dropped_below_multiplicity
        );
    }
    let truth = labels
        .map(|l| {
            let by_name: HashMap<String, NodeLabel> = l.into_iter().collect();
            d.graph
                .nodes()
                .names()
                .iter()
                .map(|n| {
                    by_name
                        .get(n)
                        .copied()
                        .ok_or_else(|| egotrans::Error::UnknownNode(format!("{n} (no label)")))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    Ok((d.graph, truth))
}

fn ingest(a: IngestArgs) -> Result<()> {
    let spec = a.bins.spec()?;
    let (graph, _) = load_edges(&a.input, a.nodes.as_deref(), &spec)?;
    write_json(&a.out, &SnapshotBundle::from_graph(&graph))?;
    eprintln!("{} nodes, {} snapshots -> {}", graph.node_count(), graph.len(), a.out.display());
    Ok(())
}

fn load_bundle(path: &Path) -> Result<TemporalGraph> {
    let bundle = SnapshotBundle::read(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    Ok(bundle.into_graph()?)
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".catalog.json");
    PathBuf::from(s)
}

fn embed(a: EmbedArgs, exec: Execution) -> Result<()> {
    let graph = load_bundle(&a.bundle)?;
    let cat = TransitionCatalog::build(a.catalog.max_subgraph_nodes, a.catalog.exclusion_mode)?;
    let ids: Option<Vec<NodeId>> = a
        .nodes
        .as_ref()
        .map(|names| names.iter().map(|n| graph.nodes().resolve(n)).collect())
        .transpose()?;
    let emb = embed_all(&graph, &cat, a.aggregation, ids.as_deref(), exec)?;
    write_atomic(&a.out, |w| Ok(write_embeddings(graph.nodes(), &emb, w)?))?;
    write_text(&a.catalog_out.unwrap_or_else(|| sidecar(&a.out)), &(cat.to_json() + "\n"))?;
    if let Some(path) = &a.steps {
        let steps = step_vectors(&graph, &cat, ids.as_deref(), exec)?;
        write_atomic(path, |w| Ok(write_step_vectors(graph.nodes(), &steps, w)?))?;
    }
    Ok(())
}

fn cluster(a: ClusterArgs, exec: Execution) -> Result<()> {
    let table = read_embeddings(open(&a.embeddings)?).with_context(|| format!("reading {}", a.embeddings.display()))?;
    let cfg = DbscanConfig {
        eps: a.eps,
        min_pts: a.min_pts,
        standardize: a.standardize,
    };
    let c = cluster_points(&table.rows, &cfg, a.rule, exec)?;
    write_atomic(&a.out, |w| Ok(write_assignment(&table.nodes, &c.assignment, &c.predicted, w)?))?;
    eprintln!(
        "eps {} ({}), {} cluster(s) {:?}, {} noise",
        c.params.eps,
        if c.eps_from_knee { "knee" } else { "fixed" },
        c.assignment.cluster_count(),
        c.assignment.cluster_sizes(),
        c.assignment.noise_count()
    );
    Ok(())
}

fn label_map(path: &Path) -> Result<HashMap<String, NodeLabel>> {
    Ok(read_labels(open(path)?)
        .with_context(|| format!("reading {}", path.display()))?
        .into_iter()
        .collect())
}

fn eval(a: EvalArgs) -> Result<()> {
    let rows = read_assignment(open(&a.assignment)?).with_context(|| format!("reading {}", a.assignment.display()))?;
    let labels = label_map(&a.labels)?;
    let truth = rows
        .iter()
        .map(|r| {
            labels
                .get(&r.node)
                .copied()
                .ok_or_else(|| egotrans::Error::UnknownNode(format!("{} (no label)", r.node)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let predicted: Vec<NodeLabel> = rows.iter().map(|r| r.predicted).collect();
    let report = evaluate(&predicted, &truth)?;
    if let Some(path) = &a.out {
        write_json(path, &report)?;
    }
    print!("{}", report.render_table());
    Ok(())
}

fn project(a: ProjectArgs) -> Result<()> {
    let table = read_embeddings(open(&a.embeddings)?).with_context(|| format!("reading {}", a.embeddings.display()))?;
    let coords = if table.rows.len() >= 2 {
        pca_project(&table.rows, 2)?
    } else {
        vec![vec![0.0, 0.0]; table.rows.len()]
    };
    let assignment: HashMap<String, (Cluster, NodeLabel)> = match &a.assignment {
        Some(p) => read_assignment(open(p)?)?
            .into_iter()
            .map(|r| (r.node, (r.cluster, r.predicted)))
            .collect(),
        None => HashMap::new(),
    };
    let labels = match &a.labels {
        Some(p) => label_map(p)?,
        None => HashMap::new(),
    };
    let rows: Vec<ProjectionRow> = table
        .nodes
        .iter()
        .zip(&coords)
        .map(|(node, xy)| ProjectionRow {
            node: node.clone(),
            x: xy[0],
            y: xy[1],
            cluster: assignment.get(node).map(|a| a.0),
            predicted: assignment.get(node).map(|a| a.1),
            truth: labels.get(node).copied(),
        })
        .collect();
    write_atomic(&a.out, |w| Ok(write_projection(&rows, w)?))
}

fn pipeline_config(a: &PipelineArgs) -> Result<PipelineConfig> {
    let mut cfg: PipelineConfig = match &a.config {
        Some(path) => read_toml(path)?,
        None => PipelineConfig::default(),
    };
    a.synth.apply(&mut cfg.synth);
    if let Some(edges) = &a.edges {
        let discretization = match cfg.input.take() {
            Some(prev) => prev.discretization,
            None => a.bins.spec()?,
        };
        cfg.input = Some(InputConfig {
            edges: edges.to_string_lossy().into_owned(),
            labels: None,
            discretization,
        });
    }
    if let Some(input) = &mut cfg.input {
        a.bins.apply(&mut input.discretization);
        if let Some(labels) = &a.labels {
            input.labels = Some(labels.to_string_lossy().into_owned());
        }
    } else if a.labels.is_some() {
        bail!("--labels needs an ingested graph (--edges or [input] in the config)");
    }
    if let Some(v) = a.max_subgraph_nodes {
        cfg.max_subgraph_nodes = v;
    }
    if let Some(v) = a.exclusion_mode {
        cfg.exclusion_mode = v;
    }
    if let Some(v) = a.aggregation {
        cfg.aggregation = v;
    }
    if a.eps.is_some() {
        cfg.dbscan.eps = a.eps;
    }
    if let Some(v) = a.min_pts {
        cfg.dbscan.min_pts = v;
    }
    cfg.dbscan.standardize |= a.standardize;
    if let Some(v) = a.rule {
        cfg.rule = v;
    }
    if a.no_spectral {
        cfg.spectral_baseline = false;
    }
    Ok(cfg)
}

fn run_pipeline(a: PipelineArgs, exec: Execution) -> Result<()> {
    let cfg = pipeline_config(&a)?;
    let dir = &a.out_dir;
    let out = match &cfg.input {
        Some(input) => {
            let (graph, truth) = load_edges(
                Path::new(&input.edges),
                input.labels.as_deref().map(Path::new),
                &input.discretization,
            )?;
            pipeline::run(&cfg, graph, truth, exec)?
        }
        None => {
            let s = generate(&cfg.synth)?;
            write_synthetic(dir, &cfg.synth, &s.graph, &s.labels)?;
            pipeline::run(&cfg, s.graph, Some(s.labels), exec)?
        }
    };
    write_pipeline_outputs(dir, &out)?;

    let r = &out.report;
    println!(
        "{} nodes, {} snapshots, d = {}; eps {} ({}), clusters {:?}, noise {}",
        r.nodes,
        r.snapshots,
        r.embedding_dim,
        r.clustering.eps,
        r.clustering.eps_selection,
        r.clustering.cluster_sizes,
        r.clustering.noise
    );
    if let Some(m) = &r.metrics {
        print!("{}", m.render_table());
    }
    if let Some(b) = &r.spectral_baseline {
        if let Some(m) = &b.metrics {
            println!(
                "baseline {}: anomaly P {:.2} R {:.2} F1 {:.2}",
                b.method, m.anomaly.precision, m.anomaly.recall, m.anomaly.f1
            );
        }
    }
    Ok(())
}

fn write_pipeline_outputs(dir: &Path, out: &PipelineOutput) -> Result<()> {
    let nodes = out.graph.nodes();
    write_text(&dir.join("config.toml"), &toml::to_string(&out.report.config)?)?;
    write_json(&dir.join("report.json"), &out.report)?;
    write_text(&dir.join("catalog.json"), &(out.catalog.to_json() + "\n"))?;
    write_atomic(&dir.join("embeddings.csv"), |w| Ok(write_embeddings(nodes, &out.embeddings, w)?))?;
    let names = nodes.names();
    let c = &out.clustering;
    write_atomic(&dir.join("assignment.csv"), |w| {
        Ok(write_assignment(names, &c.assignment, &c.predicted, w)?)
    })?;
    let rows: Vec<ProjectionRow> = (0..names.len())
        .map(|i| ProjectionRow {
            node: names[i].clone(),
            x: out.projection[i][0],
            y: out.projection[i][1],
            cluster: Some(c.assignment.labels[i]),
            predicted: Some(c.predicted[i]),
            truth: out.truth.as_ref().map(|t| t[i]),
        })
        .collect();
    write_atomic(&dir.join("projection.csv"), |w| Ok(write_projection(&rows, w)?))
}
