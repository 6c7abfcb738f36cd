//! End-to-end sparse clustering, the dense baseline, and exactness checks.
//!
//! [`sparse_geo_hclust`] builds the distance-band graph, splits it into
//! connected components and clusters each component on its own. Single
//! linkage goes through the component's minimum spanning tree; the other
//! methods run the nearest-neighbour chain on the component's condensed
//! distances, which are dropped as soon as the component is done.
//!
//! Memory figures come from [`MemoryAccountant`], which is charged with the
//! sizes of the buffers each phase allocates. They are estimates intended for
//! comparing runs, not a heap profile.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dendrogram::{adjusted_rand_index, assemble_global_labels, count_clusters, cut_tree, CutLabels};
use crate::error::{Error, Result};
use crate::geo::PointSet;
use crate::graph::{
    build_distance_graph_with, connected_components, extract_component_condensed,
    extract_component_subgraph, ComponentPartition, GraphOptions, SparseDistanceGraph,
};
use crate::linkage::{nn_chain_linkage, nn_chain_scratch_bytes, CondensedDistances, LinkageMatrix, Method};
use crate::mst::{mst_path_bytes, single_linkage_from_graph};

/// Largest point count the dense baseline accepts by default.
pub const DENSE_POINT_LIMIT: usize = 50_000;

/// Order in which components are handed to the clustering step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ComponentOrder {
    #[default]
    Ascending,
    Descending,
    Shuffled(u64),
}

#[derive(Clone, Debug)]
pub struct ClusterConfig {
    pub h_max: f64,
    pub method: Method,
    pub cut_heights: Vec<f64>,
    /// Cluster components on the rayon pool. Output is identical either way.
    pub parallel: bool,
    pub order: ComponentOrder,
    /// Keep each component's dendrogram so new cuts need no re-clustering.
    pub retain_linkage: bool,
    pub leaf_size: usize,
}

impl ClusterConfig {
    pub fn new(h_max: f64, method: Method, cut_heights: Vec<f64>) -> Self {
        ClusterConfig {
            h_max,
            method,
            cut_heights,
            parallel: false,
            order: ComponentOrder::Ascending,
            retain_linkage: false,
            leaf_size: crate::index::DEFAULT_LEAF_SIZE,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.h_max > 0.0 && self.h_max.is_finite()) {
            return Err(Error::invalid(format!(
                "h_max must be positive and finite, got {}",
                self.h_max
            )));
        }
        for &h in &self.cut_heights {
            if !(h >= 0.0) {
                return Err(Error::invalid(format!("cut height must be >= 0, got {h}")));
            }
            if h > self.h_max {
                return Err(Error::CutAboveRadius {
                    height: h,
                    h_max: self.h_max,
                });
            }
        }
        Ok(())
    }
}

/// Running/peak byte counter for explicitly charged allocations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MemoryAccountant {
    current: usize,
    peak: usize,
}

impl MemoryAccountant {
    pub fn charge(&mut self, bytes: usize) {
        self.current += bytes;
        self.peak = self.peak.max(self.current);
    }

    pub fn release(&mut self, bytes: usize) {
        self.current = self.current.saturating_sub(bytes);
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn peak(&self) -> usize {
        self.peak
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub graph_secs: f64,
    pub hac_secs: f64,
}

impl Timings {
    pub fn total_secs(&self) -> f64 {
        self.graph_secs + self.hac_secs
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryUsage {
    /// Offsets, columns and weights stored by the sparse graph.
    pub graph_entries: usize,
    /// Bytes held by the sparse graph.
    pub graph_bytes: usize,
    /// Peak bytes charged during the clustering phase.
    pub hac_peak_bytes: usize,
}

pub const MIB: f64 = 1024.0 * 1024.0;

impl MemoryUsage {
    pub fn graph_mib(&self) -> f64 {
        self.graph_bytes as f64 / MIB
    }

    pub fn hac_peak_mib(&self) -> f64 {
        self.hac_peak_bytes as f64 / MIB
    }

    /// Graph entries plus the clustering peak, in 8-byte words.
    pub fn total_entries(&self) -> usize {
        self.graph_entries + self.hac_peak_bytes.div_ceil(8)
    }
}

#[derive(Clone, Debug)]
pub struct ClusteringResult {
    pub cuts: Vec<CutLabels>,
    pub partition: ComponentPartition,
    pub n_points: usize,
    pub n_edges: usize,
    /// Distance entries stored in the sparse graph (`2m`).
    pub stored_distances: usize,
    pub h_max: f64,
    /// Per-component dendrograms over local ids, when retained.
    pub linkages: Option<Vec<LinkageMatrix>>,
    pub timings: Timings,
    pub memory: MemoryUsage,
}

impl ClusteringResult {
    pub fn n_components(&self) -> usize {
        self.partition.len()
    }

    /// Mean degree `2m / n`.
    pub fn mean_degree(&self) -> f64 {
        2.0 * self.n_edges as f64 / self.n_points as f64
    }

    pub fn max_component_size(&self) -> usize {
        self.partition.max_size()
    }

    pub fn cluster_counts(&self) -> Vec<usize> {
        self.cuts.iter().map(CutLabels::n_clusters).collect()
    }

    /// Labels at a new height from the retained dendrograms.
    pub fn recut(&self, h: f64) -> Result<CutLabels> {
        let linkages = self
            .linkages
            .as_ref()
            .ok_or_else(|| Error::invalid("dendrograms were not retained"))?;
        let local = linkages
            .iter()
            .map(|z| Ok(vec![cut_tree(z, h)?]))
            .collect::<Result<Vec<_>>>()?;
        let order: Vec<usize> = (0..local.len()).collect();
        let mut cuts = assemble_global_labels(&local, &self.partition, &[h], &order)?;
        Ok(cuts.remove(0))
    }
}

struct ComponentOutput {
    cuts: Vec<Vec<usize>>,
    linkage: LinkageMatrix,
    working_bytes: usize,
}

fn cluster_component(
    g: &SparseDistanceGraph,
    points: &PointSet,
    members: &[usize],
    cfg: &ClusterConfig,
) -> Result<ComponentOutput> {
    if members.len() == 1 {
        return Ok(ComponentOutput {
            cuts: vec![vec![0]; cfg.cut_heights.len()],
            linkage: LinkageMatrix::new(1, Vec::new())?.with_height_limit(cfg.h_max),
            working_bytes: 0,
        });
    }
    let (linkage, working_bytes) = match cfg.method {
        Method::Single => {
            let sub = extract_component_subgraph(g, members)?;
            let bytes = sub.heap_bytes() + mst_path_bytes(sub.node_count(), sub.edge_count());
            (single_linkage_from_graph(&sub)?, bytes)
        }
        method => {
            let d = extract_component_condensed(g, points, members)?;
            let bytes = d.heap_bytes() + nn_chain_scratch_bytes(members.len());
            (nn_chain_linkage(d, method)?, bytes)
        }
    };
    let linkage = linkage.with_height_limit(cfg.h_max);
    let cuts = cfg
        .cut_heights
        .iter()
        .map(|&h| cut_tree(&linkage, h))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComponentOutput {
        cuts,
        linkage,
        working_bytes,
    })
}

fn processing_order(k: usize, order: ComponentOrder) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..k).collect();
    match order {
        ComponentOrder::Ascending => {}
        ComponentOrder::Descending => ids.reverse(),
        ComponentOrder::Shuffled(seed) => ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
    }
    ids
}

/// Exact hierarchical clustering of `points` at every configured cut height.
pub fn sparse_geo_hclust(points: &PointSet, cfg: &ClusterConfig) -> Result<ClusteringResult> {
    cfg.validate()?;
    let started = Instant::now();
    let graph = build_distance_graph_with(
        points,
        cfg.h_max,
        GraphOptions {
            leaf_size: cfg.leaf_size,
            parallel: cfg.parallel,
        },
    )?;
    let partition = connected_components(&graph);
    let graph_secs = started.elapsed().as_secs_f64();

    let started = Instant::now();
    let order = processing_order(partition.len(), cfg.order);
    let run = |&k: &usize| cluster_component(&graph, points, &partition.members()[k], cfg);
    let outputs: Vec<ComponentOutput> = if cfg.parallel {
        order.par_iter().map(run).collect::<Result<_>>()?
    } else {
        order.iter().map(run).collect::<Result<_>>()?
    };

    // Charge in processing order as if components ran one after another.
    let mut accountant = MemoryAccountant::default();
    let mut slots: Vec<Option<ComponentOutput>> = (0..partition.len()).map(|_| None).collect();
    for (&k, out) in order.iter().zip(outputs) {
        let kept = if cfg.retain_linkage { out.linkage.heap_bytes() } else { 0 };
        accountant.charge(out.working_bytes.max(kept));
        accountant.release(out.working_bytes.max(kept) - kept);
        slots[k] = Some(out);
    }
    let mut local = Vec::with_capacity(slots.len());
    let mut linkages = Vec::with_capacity(if cfg.retain_linkage { slots.len() } else { 0 });
    for out in slots.into_iter().flatten() {
        local.push(out.cuts);
        if cfg.retain_linkage {
            linkages.push(out.linkage);
        }
    }
    let cuts = assemble_global_labels(&local, &partition, &cfg.cut_heights, &order)?;
    let hac_secs = started.elapsed().as_secs_f64();

    Ok(ClusteringResult {
        cuts,
        n_points: points.len(),
        n_edges: graph.edge_count(),
        stored_distances: graph.weights().len(),
        h_max: cfg.h_max,
        memory: MemoryUsage {
            graph_entries: graph.storage_entries(),
            graph_bytes: graph.heap_bytes(),
            hac_peak_bytes: accountant.peak(),
        },
        partition,
        linkages: cfg.retain_linkage.then_some(linkages),
        timings: Timings {
            graph_secs,
            hac_secs,
        },
    })
}

/// Bytes of the condensed matrix for `n` points.
pub fn dense_required_bytes(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2 * std::mem::size_of::<f64>() as u64
}

/// The full pairwise matrix for `points`, refusing inputs above `limit`.
pub fn dense_condensed(points: &PointSet, limit: usize) -> Result<CondensedDistances> {
    let n = points.len();
    if n > limit {
        return Err(Error::DenseInfeasible {
            n,
            limit,
            required_bytes: dense_required_bytes(n),
        });
    }
    CondensedDistances::from_fn(n, |i, j| points.distance(i, j))
}

fn cuts_of(z: &LinkageMatrix, heights: &[f64]) -> Result<Vec<CutLabels>> {
    heights
        .iter()
        .map(|&h| {
            Ok(CutLabels {
                height: h,
                labels: cut_tree(z, h)?,
            })
        })
        .collect()
}

/// Baseline: one linkage over the complete distance matrix.
pub fn dense_hclust_oracle(points: &PointSet, method: Method, heights: &[f64]) -> Result<Vec<CutLabels>> {
    dense_hclust_oracle_with_limit(points, method, heights, DENSE_POINT_LIMIT)
}

pub fn dense_hclust_oracle_with_limit(
    points: &PointSet,
    method: Method,
    heights: &[f64],
    limit: usize,
) -> Result<Vec<CutLabels>> {
    if points.len() == 1 {
        if let Some(&h) = heights.iter().find(|h| !(**h >= 0.0)) {
            return Err(Error::invalid(format!("cut height must be >= 0, got {h}")));
        }
        return Ok(heights
            .iter()
            .map(|&h| CutLabels { height: h, labels: vec![0] })
            .collect());
    }
    let d = dense_condensed(points, limit)?;
    let z = nn_chain_linkage(d, method)?;
    cuts_of(&z, heights)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactnessRow {
    pub method: Method,
    pub height: f64,
    pub ari: f64,
    pub sparse_clusters: usize,
    pub dense_clusters: usize,
    pub labels_identical: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExactnessReport {
    pub rows: Vec<ExactnessRow>,
}

impl ExactnessReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ExactnessRow> {
        self.rows.iter().filter(|r| !r.passed)
    }
}

/// Compares sparse and dense labels for every method and cut height.
pub fn verify_exactness(
    points: &PointSet,
    h_max: f64,
    methods: &[Method],
    heights: &[f64],
) -> Result<ExactnessReport> {
    verify_exactness_with_limit(points, h_max, methods, heights, DENSE_POINT_LIMIT)
}

pub fn verify_exactness_with_limit(
    points: &PointSet,
    h_max: f64,
    methods: &[Method],
    heights: &[f64],
    limit: usize,
) -> Result<ExactnessReport> {
    let full = if points.len() >= 2 {
        Some(dense_condensed(points, limit)?)
    } else {
        None
    };
    let mut report = ExactnessReport::default();
    for &method in methods {
        let sparse = sparse_geo_hclust(points, &ClusterConfig::new(h_max, method, heights.to_vec()))?;
        let dense = match &full {
            Some(d) => cuts_of(&nn_chain_linkage(d.clone(), method)?, heights)?,
            None => dense_hclust_oracle(points, method, heights)?,
        };
        for (s, d) in sparse.cuts.iter().zip(&dense) {
            let ari = adjusted_rand_index(&s.labels, &d.labels)?;
            let (sc, dc) = (count_clusters(&s.labels), count_clusters(&d.labels));
            report.rows.push(ExactnessRow {
                method,
                height: s.height,
                ari,
                sparse_clusters: sc,
                dense_clusters: dc,
                labels_identical: s.labels == d.labels,
                passed: ari == 1.0 && sc == dc,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_points() -> PointSet {
        PointSet::from_xy(&[(0.0, 0.0), (0.0, 1.0), (0.0, 2.0), (0.0, 10.0)]).unwrap()
    }

    #[test]
    fn four_point_single() {
        let cfg = ClusterConfig::new(3.0, Method::Single, vec![0.5, 1.0, 3.0]);
        let r = sparse_geo_hclust(&four_points(), &cfg).unwrap();
        assert_eq!(r.cluster_counts(), vec![4, 2, 2]);
        assert_eq!(r.cuts[1].labels, vec![0, 0, 0, 1]);
        assert_eq!(r.n_components(), 2);
        assert_eq!(r.n_edges, 3);
        assert!((r.mean_degree() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn singleton_input() {
        let ps = PointSet::from_xy(&[(3.0, 3.0)]).unwrap();
        for m in Method::ALL {
            let r = sparse_geo_hclust(&ps, &ClusterConfig::new(1.0, m, vec![0.0, 1.0])).unwrap();
            assert_eq!(r.cluster_counts(), vec![1, 1]);
            let d = dense_hclust_oracle(&ps, m, &[0.0, 1.0]).unwrap();
            assert_eq!(d[1].labels, vec![0]);
        }
    }

    #[test]
    fn config_errors() {
        let ps = four_points();
        let err = sparse_geo_hclust(&ps, &ClusterConfig::new(3.0, Method::Single, vec![4.0])).unwrap_err();
        assert!(matches!(err, Error::CutAboveRadius { .. }));
        assert!(sparse_geo_hclust(&ps, &ClusterConfig::new(0.0, Method::Single, vec![])).is_err());
        assert!(sparse_geo_hclust(&ps, &ClusterConfig::new(3.0, Method::Single, vec![-1.0])).is_err());
    }

    #[test]
    fn dense_examples() {
        let two = PointSet::from_xy(&[(0.0, 0.0), (3.0, 4.0)]).unwrap();
        let cuts = dense_hclust_oracle(&two, Method::Average, &[5.0]).unwrap();
        assert_eq!(cuts[0].n_clusters(), 1);
        let cuts = dense_hclust_oracle(&four_points(), Method::Single, &[1.0]).unwrap();
        assert_eq!(cuts[0].n_clusters(), 2);
    }

    #[test]
    fn dense_guard_reports_memory() {
        let err = dense_hclust_oracle_with_limit(&four_points(), Method::Single, &[1.0], 3).unwrap_err();
        match err {
            Error::DenseInfeasible { n, limit, required_bytes } => {
                assert_eq!((n, limit, required_bytes), (4, 3, 48));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn recut_uses_retained_dendrograms() {
        let mut cfg = ClusterConfig::new(3.0, Method::Average, vec![1.0]);
        cfg.retain_linkage = true;
        let r = sparse_geo_hclust(&four_points(), &cfg).unwrap();
        assert_eq!(r.recut(0.5).unwrap().labels, vec![0, 1, 2, 3]);
        assert_eq!(r.recut(1.0).unwrap(), r.cuts[0]);
        assert!(r.recut(3.5).is_err());
        let plain = sparse_geo_hclust(&four_points(), &ClusterConfig::new(3.0, Method::Average, vec![1.0])).unwrap();
        assert!(plain.recut(1.0).is_err());
    }

    #[test]
    fn accountant_tracks_peak() {
        let mut a = MemoryAccountant::default();
        a.charge(100);
        a.release(60);
        a.charge(30);
        assert_eq!((a.current(), a.peak()), (70, 100));
    }

    #[test]
    fn four_point_exactness_report() {
        let rep = verify_exactness(&four_points(), 3.0, &Method::ALL, &[0.5, 1.0, 3.0]).unwrap();
        assert_eq!(rep.rows.len(), 12);
        assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
    }
}
