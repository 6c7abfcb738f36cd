//! The sparse distance-band graph and its connected components.
//!
//! [`SparseDistanceGraph`] is a symmetric CSR adjacency holding the exact
//! distance of every pair within `h_max`. Its connected components are the
//! independent clustering subproblems: any two points in different components
//! are farther apart than `h_max`.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::geo::PointSet;
use crate::index::SpatialIndex;
use crate::linkage::CondensedDistances;
use crate::union_find::DisjointSets;

/// Knobs for graph construction.
#[derive(Clone, Copy, Debug)]
pub struct GraphOptions {
    pub leaf_size: usize,
    pub parallel: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            leaf_size: crate::index::DEFAULT_LEAF_SIZE,
            parallel: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseDistanceGraph {
    n: usize,
    h_max: f64,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    weights: Vec<f64>,
}

impl SparseDistanceGraph {
    /// Builds the CSR form from upper-triangle pairs sorted by `(i, j)`.
    ///
    /// Sorted input yields rows with strictly increasing columns without a
    /// per-row sort: row `r` first receives `(k, r)` for `k < r` in order of
    /// `k`, then `(r, j)` in order of `j`.
    pub fn from_sorted_pairs(n: usize, h_max: f64, pairs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut degree = vec![0usize; n + 1];
        let mut prev: Option<(usize, usize)> = None;
        for &(i, j, w) in pairs {
            if i >= j || j >= n {
                return Err(Error::invalid(format!("bad edge ({i}, {j}) for n = {n}")));
            }
            if !(w >= 0.0 && w <= h_max) {
                return Err(Error::invalid(format!(
                    "edge ({i}, {j}) weight {w} outside [0, {h_max}]"
                )));
            }
            if prev.is_some_and(|p| p >= (i, j)) {
                return Err(Error::invalid("edge list not strictly sorted by (i, j)"));
            }
            prev = Some((i, j));
            degree[i + 1] += 1;
            degree[j + 1] += 1;
        }
        for r in 0..n {
            degree[r + 1] += degree[r];
        }
        let row_offsets = degree;
        let mut fill = row_offsets.clone();
        let mut col_indices = vec![0usize; 2 * pairs.len()];
        let mut weights = vec![0f64; 2 * pairs.len()];
        for &(i, j, w) in pairs {
            col_indices[fill[i]] = j;
            weights[fill[i]] = w;
            fill[i] += 1;
            col_indices[fill[j]] = i;
            weights[fill[j]] = w;
            fill[j] += 1;
        }
        Ok(SparseDistanceGraph {
            n,
            h_max,
            row_offsets,
            col_indices,
            weights,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Undirected edge count `m`.
    pub fn edge_count(&self) -> usize {
        self.col_indices.len() / 2
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    /// `2m / n`.
    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.col_indices.len() as f64 / self.n as f64
        }
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    pub fn neighbor_weights(&self, i: usize) -> &[f64] {
        &self.weights[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    /// Upper-triangle edges `(i, j, w)` with `i < j`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .zip(self.neighbor_weights(i))
                .filter(move |(&j, _)| j > i)
                .map(move |(&j, &w)| (i, j, w))
        })
    }

    /// Stored CSR entries: `n + 1` offsets plus `2m` columns and `2m` weights.
    pub fn storage_entries(&self) -> usize {
        self.row_offsets.len() + self.col_indices.len() + self.weights.len()
    }

    pub fn heap_bytes(&self) -> usize {
        self.storage_entries() * 8
    }

    /// Writes `i,j,d_km` lines with `i < j`, sorted by `(i, j)`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "i,j,d_km")?;
        for (i, j, w) in self.edges() {
            writeln!(out, "{i},{j},{w}")?;
        }
        out.flush()
    }
}

/// Node-to-component assignment; components are numbered by smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPartition {
    component_id: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl ComponentPartition {
    /// Builds a partition from any labelling, renumbering components by
    /// their smallest member.
    pub fn from_labels(labels: &[usize]) -> Self {
        let canonical = crate::dendrogram::canonicalize(labels);
        let k = canonical.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut members = vec![Vec::new(); k];
        for (i, &c) in canonical.iter().enumerate() {
            members[c].push(i);
        }
        ComponentPartition {
            component_id: canonical,
            members,
        }
    }

    /// Number of components `K`.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn component_id(&self) -> &[usize] {
        &self.component_id
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn max_size(&self) -> usize {
        self.members.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn build_distance_graph(points: &PointSet, h_max: f64) -> Result<SparseDistanceGraph> {
    build_distance_graph_with(points, h_max, GraphOptions::default())
}

pub fn build_distance_graph_with(
    points: &PointSet,
    h_max: f64,
    opts: GraphOptions,
) -> Result<SparseDistanceGraph> {
    if !(h_max > 0.0 && h_max.is_finite()) {
        return Err(Error::invalid(format!("h_max must be positive and finite, got {h_max}")));
    }
    let index = SpatialIndex::with_leaf_size(points, opts.leaf_size)?;
    let pairs = index.query_pairs_with(h_max, opts.parallel)?;
    SparseDistanceGraph::from_sorted_pairs(points.len(), h_max, &pairs)
}

pub fn connected_components(g: &SparseDistanceGraph) -> ComponentPartition {
    let mut sets = DisjointSets::new(g.node_count());
    for (i, j, _) in g.edges() {
        sets.union(i, j);
    }
    let mut component_id = vec![usize::MAX; g.node_count()];
    let mut members: Vec<Vec<usize>> = Vec::new();
    // Scanning ids in ascending order numbers components by smallest member.
    let mut root_component = vec![usize::MAX; g.node_count()];
    for (i, id) in component_id.iter_mut().enumerate() {
        let r = sets.find(i);
        if root_component[r] == usize::MAX {
            root_component[r] = members.len();
            members.push(Vec::new());
        }
        *id = root_component[r];
        members[root_component[r]].push(i);
    }
    ComponentPartition {
        component_id,
        members,
    }
}

fn check_members(g: &SparseDistanceGraph, comp: &[usize]) -> Result<()> {
    if comp.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("component members must be strictly increasing"));
    }
    if comp.last().is_some_and(|&last| last >= g.node_count()) {
        return Err(Error::invalid("component member out of range"));
    }
    Ok(())
}

/// All pairwise distances inside `comp` as a condensed array. Graph edges
/// supply their stored weight; the remaining pairs (connected only through
/// paths) are recomputed from coordinates.
pub fn extract_component_condensed(
    g: &SparseDistanceGraph,
    points: &PointSet,
    comp: &[usize],
) -> Result<CondensedDistances> {
    if comp.len() < 2 {
        return Err(Error::invalid(format!(
            "condensed extraction needs at least 2 members, got {}",
            comp.len()
        )));
    }
    check_members(g, comp)?;
    let c = comp.len();
    let mut data = vec![f64::NAN; c * (c - 1) / 2];
    for (a, &i) in comp.iter().enumerate() {
        for (&j, &w) in g.neighbors(i).iter().zip(g.neighbor_weights(i)) {
            if j <= i {
                continue;
            }
            if let Ok(b) = comp.binary_search(&j) {
                data[condensed_index(c, a, b)] = w;
            }
        }
    }
    let mut k = 0;
    for a in 0..c {
        for b in a + 1..c {
            if data[k].is_nan() {
                data[k] = points.distance(comp[a], comp[b]);
            }
            k += 1;
        }
    }
    CondensedDistances::new(c, data)
}

/// The subgraph induced by `comp`, relabelled by rank within `comp`.
pub fn extract_component_subgraph(
    g: &SparseDistanceGraph,
    comp: &[usize],
) -> Result<SparseDistanceGraph> {
    check_members(g, comp)?;
    let mut row_offsets = Vec::with_capacity(comp.len() + 1);
    row_offsets.push(0);
    let mut col_indices = Vec::new();
    let mut weights = Vec::new();
    for &i in comp {
        for (&j, &w) in g.neighbors(i).iter().zip(g.neighbor_weights(i)) {
            if let Ok(b) = comp.binary_search(&j) {
                col_indices.push(b);
                weights.push(w);
            }
        }
        row_offsets.push(col_indices.len());
    }
    Ok(SparseDistanceGraph {
        n: comp.len(),
        h_max: g.h_max,
        row_offsets,
        col_indices,
        weights,
    })
}

#[inline]
pub(crate) fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    n * i - i * (i + 1) / 2 + j - i - 1
}
