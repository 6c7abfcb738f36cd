//! Synthetic workloads and the scaling benchmark harness.
//!
//! All generators draw from `ChaCha8Rng::seed_from_u64(seed)`, which produces
//! the same stream on every platform. Gaussian mixtures draw the `C` centres
//! first (x then y for each), then for every point its centre index followed
//! by the x and y offsets.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{PlanarPoint, PointSet};
use crate::linkage::{nn_chain_linkage, nn_chain_scratch_bytes, Method};
use crate::pipeline::{dense_condensed, dense_required_bytes, sparse_geo_hclust, ClusterConfig, MIB};

pub const DEFAULT_DOMAIN_KM: f64 = 500.0;
/// Largest size the benchmark runs the dense baseline for.
pub const BENCH_DENSE_LIMIT: usize = 25_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Tight,
    Moderate,
    Loose,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Tight, Scenario::Moderate, Scenario::Loose];

    pub fn centers(self) -> usize {
        match self {
            Scenario::Tight => 100,
            Scenario::Moderate => 50,
            Scenario::Loose => 20,
        }
    }

    /// Noise standard deviation as a fraction of `h_max`.
    pub fn sigma_fraction(self) -> f64 {
        match self {
            Scenario::Tight => 0.03,
            Scenario::Moderate => 0.10,
            Scenario::Loose => 0.30,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Tight => "tight",
            Scenario::Moderate => "moderate",
            Scenario::Loose => "loose",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tight" => Ok(Scenario::Tight),
            "moderate" => Ok(Scenario::Moderate),
            "loose" => Ok(Scenario::Loose),
            _ => Err(Error::invalid(format!(
                "unknown scenario '{s}' (expected tight, moderate or loose)"
            ))),
        }
    }
}

/// Parameters of a Gaussian-mixture point cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub centers: usize,
    pub sigma_km: f64,
    pub domain_km: f64,
    pub n: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    /// The named scenario at radius `h_max` on the default 500 km domain.
    pub fn new(scenario: Scenario, n: usize, h_max: f64, seed: u64) -> Self {
        ScenarioSpec {
            name: scenario.name().to_string(),
            centers: scenario.centers(),
            sigma_km: scenario.sigma_fraction() * h_max,
            domain_km: DEFAULT_DOMAIN_KM,
            n,
            seed,
        }
    }

    pub fn with_domain(mut self, domain_km: f64) -> Self {
        self.domain_km = domain_km;
        self
    }
}

pub fn generate_gaussian_mixture(spec: &ScenarioSpec) -> Result<PointSet> {
    if spec.n == 0 || spec.centers == 0 {
        return Err(Error::invalid("mixture needs n >= 1 and at least one centre"));
    }
    if !(spec.sigma_km >= 0.0) || !(spec.domain_km > 0.0) {
        return Err(Error::invalid(format!(
            "invalid sigma {} or domain {}",
            spec.sigma_km, spec.domain_km
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centers: Vec<(f64, f64)> = (0..spec.centers)
        .map(|_| {
            let x = rng.random::<f64>() * spec.domain_km;
            let y = rng.random::<f64>() * spec.domain_km;
            (x, y)
        })
        .collect();
    let points = (0..spec.n)
        .map(|_| {
            let (cx, cy) = centers[rng.random_range(0..spec.centers)];
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            PlanarPoint {
                x: cx + spec.sigma_km * dx,
                y: cy + spec.sigma_km * dy,
            }
        })
        .collect();
    PointSet::planar(points)
}

/// Side of the square domain that gives `n` uniform points an expected mean
/// degree of about `k_target` at radius `h_max`.
pub fn constant_k_domain(n: usize, k_target: f64, h_max: f64) -> f64 {
    (n as f64 * std::f64::consts::PI * h_max * h_max / k_target).sqrt()
}

pub fn generate_constant_k(n: usize, k_target: f64, h_max: f64, seed: u64) -> Result<PointSet> {
    if n < 2 || !(k_target > 0.0) || !(h_max > 0.0) {
        return Err(Error::invalid(format!(
            "constant-k generator needs n >= 2, k > 0, h_max > 0 (got {n}, {k_target}, {h_max})"
        )));
    }
    let side = constant_k_domain(n, k_target, h_max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let x = rng.random::<f64>() * side;
            let y = rng.random::<f64>() * side;
            PlanarPoint { x, y }
        })
        .collect();
    PointSet::planar(points)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::invalid("slope fit needs at least 3 (x, y) pairs"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("slope fit needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope fit needs at least two distinct x values"));
    }
    Ok(sxy / sxx)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Workload {
    /// Gaussian mixture on a fixed domain.
    Scenario(Scenario),
    /// Uniform points on a domain that grows with `n`.
    ConstantK { k_target: f64 },
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Workload::Scenario(s) => write!(f, "{s}"),
            Workload::ConstantK { k_target } => write!(f, "constant-k{k_target}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub sizes: Vec<usize>,
    pub workload: Workload,
    pub h_max: f64,
    pub method: Method,
    /// Cut heights as fractions of `h_max`.
    pub cut_fractions: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    /// Run the dense baseline up to this size; `None` skips it.
    pub dense_limit: Option<usize>,
    pub parallel: bool,
}

impl ExperimentSpec {
    pub fn new(sizes: Vec<usize>, workload: Workload, h_max: f64) -> Self {
        ExperimentSpec {
            sizes,
            workload,
            h_max,
            method: Method::Single,
            cut_fractions: vec![0.2, 0.5, 1.0],
            reps: 5,
            seed: 0,
            dense_limit: Some(BENCH_DENSE_LIMIT),
            parallel: false,
        }
    }

    pub fn points(&self, n: usize) -> Result<PointSet> {
        match self.workload {
            Workload::Scenario(s) => {
                generate_gaussian_mixture(&ScenarioSpec::new(s, n, self.h_max, self.seed))
            }
            Workload::ConstantK { k_target } => generate_constant_k(n, k_target, self.h_max, self.seed),
        }
    }
}

/// Mean and median of repeated timings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeStat {
    pub mean: f64,
    pub median: f64,
}

impl TimeStat {
    pub fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return TimeStat::default();
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let mid = s.len() / 2;
        let median = if s.len() % 2 == 1 { s[mid] } else { 0.5 * (s[mid - 1] + s[mid]) };
        TimeStat {
            mean: s.iter().sum::<f64>() / s.len() as f64,
            median,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseRow {
    pub secs: TimeStat,
    pub peak_mib: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub workload: String,
    pub h_max: f64,
    pub method: Method,
    pub graph_secs: TimeStat,
    pub hac_secs: TimeStat,
    pub total_secs: TimeStat,
    /// Share of total mean time spent building the graph, in percent.
    pub graph_pct: f64,
    pub graph_mib: f64,
    pub hac_peak_mib: f64,
    /// Graph entries plus clustering peak, in 8-byte words.
    pub memory_entries: usize,
    pub edges: usize,
    pub mean_degree: f64,
    pub components: usize,
    pub max_component: usize,
    pub cut_heights: Vec<f64>,
    pub cluster_counts: Vec<usize>,
    /// Full-matrix distance entries `n^2`.
    pub dense_entries: f64,
    /// Distance entries stored by the sparse graph, `2m`.
    pub sparse_entries: f64,
    /// `dense_entries / sparse_entries`.
    pub distance_ratio: f64,
    pub dense: Option<DenseRow>,
    pub dense_note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub spec: ExperimentSpec,
    pub reps: usize,
    pub rows: Vec<BenchRow>,
}

/// Column names of [`BenchReport::write_table`].
pub const BENCH_HEADER: &str = "n,workload,h_max_km,method,reps,graph_s_mean,graph_s_median,hac_s_mean,hac_s_median,total_s_mean,total_s_median,graph_pct,graph_mib,hac_peak_mib,memory_entries,m,k_bar,components,max_component,cluster_counts,distance_ratio,dense_s_mean,dense_s_median,dense_mib,dense_note";

impl BenchReport {
    /// One comma-separated row per size; cluster counts are `;`-joined in
    /// cut order and missing dense figures are `NA`.
    pub fn write_table<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{BENCH_HEADER}")?;
        for r in &self.rows {
            let counts: Vec<String> = r.cluster_counts.iter().map(|c| c.to_string()).collect();
            let (ds_mean, ds_median, dmib) = match &r.dense {
                Some(d) => (
                    format!("{:.6}", d.secs.mean),
                    format!("{:.6}", d.secs.median),
                    format!("{:.3}", d.peak_mib),
                ),
                None => ("NA".into(), "NA".into(), "NA".into()),
            };
            writeln!(
                out,
                "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.1},{:.3},{:.3},{},{},{:.3},{},{},{},{},{},{},{},{}",
                r.n,
                r.workload,
                r.h_max,
                r.method,
                self.reps,
                r.graph_secs.mean,
                r.graph_secs.median,
                r.hac_secs.mean,
                r.hac_secs.median,
                r.total_secs.mean,
                r.total_secs.median,
                r.graph_pct,
                r.graph_mib,
                r.hac_peak_mib,
                r.memory_entries,
                r.edges,
                r.mean_degree,
                r.components,
                r.max_component,
                counts.join(";"),
                r.distance_ratio,
                ds_mean,
                ds_median,
                dmib,
                r.dense_note,
            )?;
        }
        out.flush()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn run_scaling_experiment(spec: &ExperimentSpec) -> Result<BenchReport> {
    if spec.reps == 0 {
        return Err(Error::invalid("repetitions must be >= 1"));
    }
    if spec.sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("sizes must be ascending"));
    }
    let cut_heights: Vec<f64> = spec.cut_fractions.iter().map(|f| f * spec.h_max).collect();
    let mut rows = Vec::with_capacity(spec.sizes.len());
    for &n in &spec.sizes {
        let points = spec.points(n)?;
        let mut cfg = ClusterConfig::new(spec.h_max, spec.method, cut_heights.clone());
        cfg.parallel = spec.parallel;
        let (mut graph_t, mut hac_t, mut total_t) = (Vec::new(), Vec::new(), Vec::new());
        let mut last = None;
        for _ in 0..spec.reps {
            let r = sparse_geo_hclust(&points, &cfg)?;
            graph_t.push(r.timings.graph_secs);
            hac_t.push(r.timings.hac_secs);
            total_t.push(r.timings.total_secs());
            last = Some(r);
        }
        let r = last.expect("reps >= 1");

        let (dense, dense_note) = match spec.dense_limit {
            None => (None, "skipped".to_string()),
            Some(limit) if n > limit => (
                None,
                format!(
                    "infeasible: n > {limit}; condensed matrix needs {:.1} MiB",
                    dense_required_bytes(n) as f64 / MIB
                ),
            ),
            Some(limit) => {
                let mut secs = Vec::with_capacity(spec.reps);
                for _ in 0..spec.reps {
                    let started = Instant::now();
                    let d = dense_condensed(&points, limit)?;
                    let z = nn_chain_linkage(d, spec.method)?;
                    for &h in &cut_heights {
                        crate::dendrogram::cut_tree(&z, h)?;
                    }
                    secs.push(started.elapsed().as_secs_f64());
                }
                let bytes = dense_required_bytes(n) as f64 + nn_chain_scratch_bytes(n) as f64;
                (
                    Some(DenseRow {
                        secs: TimeStat::from_samples(&secs),
                        peak_mib: bytes / MIB,
                    }),
                    String::new(),
                )
            }
        };

        let total = TimeStat::from_samples(&total_t);
        let graph = TimeStat::from_samples(&graph_t);
        let dense_entries = (n as f64) * (n as f64);
        let sparse_entries = r.stored_distances as f64;
        rows.push(BenchRow {
            n,
            workload: spec.workload.to_string(),
            h_max: spec.h_max,
            method: spec.method,
            graph_secs: graph,
            hac_secs: TimeStat::from_samples(&hac_t),
            total_secs: total,
            graph_pct: if total.mean > 0.0 { 100.0 * graph.mean / total.mean } else { 0.0 },
            graph_mib: r.memory.graph_mib(),
            hac_peak_mib: r.memory.hac_peak_mib(),
            memory_entries: r.memory.total_entries(),
            edges: r.n_edges,
            mean_degree: r.mean_degree(),
            components: r.n_components(),
            max_component: r.max_component_size(),
            cut_heights: cut_heights.clone(),
            cluster_counts: r.cluster_counts(),
            dense_entries,
            sparse_entries,
            distance_ratio: dense_entries / sparse_entries,
            dense,
            dense_note,
        });
    }
    Ok(BenchReport {
        spec: spec.clone(),
        reps: spec.reps,
        rows,
    })
}
