use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use geohclust::graph::{build_distance_graph_with, GraphOptions};
use geohclust::io::{load_points, parse_distance_km, write_labels, write_points, InputFormat};
use geohclust::pipeline::verify_exactness;
use geohclust::synth::{
    generate_constant_k, generate_gaussian_mixture, run_scaling_experiment, ExperimentSpec, Scenario,
    ScenarioSpec, Workload, BENCH_DENSE_LIMIT,
};
use geohclust::{sparse_geo_hclust, ClusterConfig, ComponentOrder, Error, Method, PointSet};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_DENSE_GUARD: u8 = 4;

/// Exact hierarchical clustering of spatial points over a sparse distance-band graph.
///
/// All distances are kilometres; append `m` for metres (e.g. `500m`).
#[derive(Parser)]
#[command(name = "geohclust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a point file and write one label column per cut height.
    Cluster(ClusterArgs),
    /// Compare sparse and dense clustering on a point file or a generated scenario.
    Verify(VerifyArgs),
    /// Write the distance-band graph as an edge list.
    Graph(GraphArgs),
    /// Run the scaling benchmark and write its report.
    Bench(BenchArgs),
    /// Write a synthetic point set.
    Gen(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Csv,
    Geojson,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Auto => InputFormat::Auto,
            FormatArg::Csv => InputFormat::Csv,
            FormatArg::Geojson => InputFormat::GeoJson,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Points as CSV with an `lat,lon` or `x,y` header, or a GeoJSON FeatureCollection.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatArg,
    /// Sphere radius for lat/lon input.
    #[arg(long, value_parser = distance)]
    earth_radius: Option<f64>,
}

impl InputArgs {
    fn load(&self) -> geohclust::Result<PointSet> {
        let points = load_points(&self.input, self.format.into())?;
        match self.earth_radius {
            Some(r) => points.with_earth_radius(r),
            None => Ok(points),
        }
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Graph radius.
    #[arg(long, value_parser = distance)]
    h_max: f64,
    #[arg(long, default_value = "single", value_parser = method)]
    linkage: Method,
    /// Comma-separated cut heights, each at most h_max.
    #[arg(long, value_delimiter = ',', value_parser = distance, required = true)]
    cuts: Vec<f64>,
    /// Label file; the summary alone is printed when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Cluster components on a worker pool. Output is unchanged.
    #[arg(long)]
    parallel: bool,
    /// Component processing order: ascending, descending or shuffle:<seed>.
    #[arg(long, default_value = "ascending", value_parser = order)]
    order: ComponentOrder,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "scenario"]))]
struct VerifyArgs {
    #[arg(short, long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatArg,
    #[arg(long, value_parser = scenario)]
    scenario: Option<Scenario>,
    #[arg(long, requires = "scenario", default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = distance)]
    h_max: f64,
    /// Methods to check; all four by default.
    #[arg(long, value_delimiter = ',', value_parser = method)]
    linkage: Vec<Method>,
    /// Cut heights; 0.2, 0.5 and 1.0 times h_max by default.
    #[arg(long, value_delimiter = ',', value_parser = distance)]
    cuts: Vec<f64>,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_parser = distance)]
    h_max: f64,
    /// Edge list file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("workload").required(true).args(["scenario", "constant_k"]))]
struct BenchArgs {
    #[arg(long, value_parser = scenario)]
    scenario: Option<Scenario>,
    /// Uniform points with this expected mean degree.
    #[arg(long)]
    constant_k: Option<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, value_parser = distance)]
    h_max: f64,
    #[arg(long, default_value = "single", value_parser = method)]
    linkage: Method,
    /// Cut heights as fractions of h_max.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.5,1.0")]
    cut_fractions: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest n for the dense baseline.
    #[arg(long, default_value_t = BENCH_DENSE_LIMIT, conflicts_with = "no_dense")]
    dense_limit: usize,
    #[arg(long)]
    no_dense: bool,
    #[arg(long)]
    parallel: bool,
    /// Table file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("workload").required(true).args(["scenario", "constant_k"]))]
struct GenArgs {
    #[arg(long, value_parser = scenario)]
    scenario: Option<Scenario>,
    #[arg(long)]
    constant_k: Option<f64>,
    #[arg(long)]
    n: usize,
    /// Radius the noise scale or domain is derived from.
    #[arg(long, value_parser = distance)]
    h_max: f64,
    /// Domain side for mixtures.
    #[arg(long, value_parser = distance, conflicts_with = "constant_k")]
    domain: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Point file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn distance(s: &str) -> Result<f64, String> {
    parse_distance_km(s).map_err(|e| e.to_string())
}

fn method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn order(s: &str) -> Result<ComponentOrder, String> {
    match s {
        "ascending" => Ok(ComponentOrder::Ascending),
        "descending" => Ok(ComponentOrder::Descending),
        _ => s
            .strip_prefix("shuffle:")
            .and_then(|seed| seed.parse().ok())
            .map(ComponentOrder::Shuffled)
            .ok_or_else(|| format!("'{s}' is not ascending, descending or shuffle:<seed>")),
    }
}

fn create(path: &Path) -> geohclust::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
}

fn sink(path: Option<&Path>) -> geohclust::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_context(path: Option<&Path>) -> String {
    match path {
        Some(p) => format!("writing {}", p.display()),
        None => "writing to stdout".into(),
    }
}

fn cluster(args: ClusterArgs) -> anyhow::Result<u8> {
    let points = args.input.load()?;
    let mut cfg = ClusterConfig::new(args.h_max, args.linkage, args.cuts);
    cfg.parallel = args.parallel;
    cfg.order = args.order;
    let r = sparse_geo_hclust(&points, &cfg)?;
    if let Some(path) = &args.output {
        write_labels(path, &r.cuts)?;
    }
    let mut out = io::stdout().lock();
    writeln!(out, "points             {}", r.n_points)?;
    writeln!(out, "linkage            {}", args.linkage)?;
    writeln!(out, "h_max_km           {}", r.h_max)?;
    writeln!(out, "edges              {}", r.n_edges)?;
    writeln!(out, "mean_degree        {:.3}", r.mean_degree())?;
    writeln!(out, "components         {}", r.n_components())?;
    writeln!(out, "largest_component  {}", r.max_component_size())?;
    writeln!(out, "graph_s            {:.6}", r.timings.graph_secs)?;
    writeln!(out, "hac_s              {:.6}", r.timings.hac_secs)?;
    writeln!(out, "total_s            {:.6}", r.timings.total_secs())?;
    writeln!(out, "graph_mib          {:.3}", r.memory.graph_mib())?;
    writeln!(out, "hac_peak_mib       {:.3}", r.memory.hac_peak_mib())?;
    for c in &r.cuts {
        writeln!(out, "clusters h={:<10} {}", c.height, c.n_clusters())?;
    }
    Ok(0)
}

fn verify(args: VerifyArgs) -> anyhow::Result<u8> {
    let points = match (&args.input, args.scenario) {
        (Some(path), _) => load_points(path, args.format.into())?,
        (None, Some(s)) => generate_gaussian_mixture(&ScenarioSpec::new(s, args.n, args.h_max, args.seed))?,
        (None, None) => bail!("either --input or --scenario is required"),
    };
    let methods = if args.linkage.is_empty() { Method::ALL.to_vec() } else { args.linkage };
    let heights = if args.cuts.is_empty() {
        vec![0.2 * args.h_max, 0.5 * args.h_max, args.h_max]
    } else {
        args.cuts
    };
    let report = verify_exactness(&points, args.h_max, &methods, &heights)?;
    let mut out = io::stdout().lock();
    writeln!(out, "method,height_km,ari,sparse_clusters,dense_clusters,labels_identical,status")?;
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.method,
            row.height,
            row.ari,
            row.sparse_clusters,
            row.dense_clusters,
            row.labels_identical,
            if row.passed { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(if report.passed() { 0 } else { EXIT_VERIFY_FAILED })
}

fn graph(args: GraphArgs) -> anyhow::Result<u8> {
    let points = args.input.load()?;
    let opts = GraphOptions {
        parallel: args.parallel,
        ..GraphOptions::default()
    };
    let g = build_distance_graph_with(&points, args.h_max, opts)?;
    let out = args.output.as_deref();
    let mut w = sink(out)?;
    g.write_edge_list(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::Io {
            path: out.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
            source: e,
        })?;
    if out.is_some() {
        println!("nodes {} edges {}", g.node_count(), g.edge_count());
    }
    Ok(0)
}

fn bench(args: BenchArgs) -> anyhow::Result<u8> {
    let workload = match (args.scenario, args.constant_k) {
        (Some(s), _) => Workload::Scenario(s),
        (None, Some(k_target)) => Workload::ConstantK { k_target },
        (None, None) => bail!("either --scenario or --constant-k is required"),
    };
    let mut spec = ExperimentSpec::new(args.sizes, workload, args.h_max);
    spec.method = args.linkage;
    spec.cut_fractions = args.cut_fractions;
    spec.reps = args.reps;
    spec.seed = args.seed;
    spec.dense_limit = (!args.no_dense).then_some(args.dense_limit);
    spec.parallel = args.parallel;
    let report = run_scaling_experiment(&spec)?;
    let out = args.output.as_deref();
    report
        .write_table(sink(out)?)
        .with_context(|| io_context(out))?;
    if let Some(path) = &args.json {
        let mut w = create(path)?;
        w.write_all(report.to_json().as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
    }
    Ok(0)
}

fn gen(args: GenArgs) -> anyhow::Result<u8> {
    let points = match (args.scenario, args.constant_k) {
        (Some(s), _) => {
            let mut spec = ScenarioSpec::new(s, args.n, args.h_max, args.seed);
            if let Some(d) = args.domain {
                spec = spec.with_domain(d);
            }
            generate_gaussian_mixture(&spec)?
        }
        (None, Some(k)) => generate_constant_k(args.n, k, args.h_max, args.seed)?,
        (None, None) => bail!("either --scenario or --constant-k is required"),
    };
    let out = args.output.as_deref();
    write_points(sink(out)?, &points).map_err(|e| match out {
        Some(p) => anyhow::Error::from(Error::Io {
            path: p.to_path_buf(),
            source: io::Error::other(e.to_string()),
        }),
        None => e.into(),
    })?;
    Ok(0)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Error>() {
        return match e {
            Error::DenseInfeasible { .. } => EXIT_DENSE_GUARD,
            Error::Io { .. } | Error::Parse { .. } | Error::Format { .. } => EXIT_IO,
            Error::InvalidPoint { .. } | Error::EmptyPointSet => EXIT_IO,
            Error::InvalidArgument(_) | Error::CutAboveRadius { .. } => EXIT_USAGE,
            Error::Disconnected { .. } => EXIT_VERIFY_FAILED,
        };
    }
    if err.downcast_ref::<io::Error>().is_some() || err.chain().any(|c| c.is::<io::Error>()) {
        return EXIT_IO;
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Cluster(a) => cluster(a),
        Command::Verify(a) => verify(a),
        Command::Graph(a) => graph(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
